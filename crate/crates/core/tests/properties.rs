//! Invariants checked on random networks and rationals.

mod common;

use std::collections::BTreeMap;

use common::*;
use nnq_core::analysis::{integrate_1d, integrate_box, integrate_by_decomposition, shap_all, InputBox};
use nnq_core::lifted::{lifted_arith, lifted_compare, LiftedOp};
use nnq_core::network::{Network, NeuronId};
use nnq_core::pwl::{pwl_eval, pwl_from_network, pwl_localize, scale_stage, sum_stage, PwlFunction};
use nnq_core::query::{evaluate_query, QueryAnswer};
use nnq_core::{LiftedRational, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pwl(net: &Network) -> PwlFunction {
    pwl_from_network(net, NeuronId::Output(0)).unwrap()
}

fn net(seed: u64, m: usize, widths: &[usize]) -> Network {
    random_net(&mut ChaCha8Rng::seed_from_u64(seed), m, widths)
}

fn rat() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| Rational::new(n, d))
}

fn widths() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(1usize..=2, 0..=2)
}

fn closed(net: &Network, text: &str, params: &[(&str, &Rational)]) -> bool {
    let ps: BTreeMap<String, Rational> = params.iter().map(|(k, v)| (k.to_string(), (*v).clone())).collect();
    match evaluate_query(net, text, &ps, &[]).unwrap() {
        QueryAnswer::Closed(b) => b,
        QueryAnswer::Open { .. } => panic!("expected a sentence"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integral_is_additive_over_splits(seed in any::<u64>(), w in widths(), lo in rat(), a in 1i64..=8, b in 1i64..=8) {
        let f = pwl(&net(seed, 1, &w));
        let mid = &lo + &Rational::new(a, 2);
        let hi = &mid + &Rational::new(b, 2);
        prop_assert_eq!(
            integrate_1d(&f, &lo, &hi).unwrap(),
            integrate_1d(&f, &lo, &mid).unwrap() + integrate_1d(&f, &mid, &hi).unwrap()
        );
    }

    #[test]
    fn planar_integral_is_additive(seed in any::<u64>(), w in 1usize..=2, cut in 1i64..=3) {
        let f = pwl(&net(seed, 2, &[w]));
        let (z, four) = (Rational::from_int(-2), Rational::from_int(2));
        let c = Rational::new(cut - 2, 1);
        let whole = InputBox::new(vec![(z.clone(), four.clone()), (z.clone(), four.clone())]).unwrap();
        let left = InputBox::new(vec![(z.clone(), c.clone()), (z.clone(), four.clone())]).unwrap();
        let right = InputBox::new(vec![(c, four.clone()), (z, four)]).unwrap();
        prop_assert_eq!(
            integrate_box(&f, &whole).unwrap(),
            integrate_box(&f, &left).unwrap() + integrate_box(&f, &right).unwrap()
        );
    }

    #[test]
    fn integral_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), k in rat(), c in rat(), lo in rat(), len in 1i64..=10) {
        let (f, g) = (pwl(&net(s1, 1, &[2])), pwl(&net(s2, 1, &[1])));
        let hi = &lo + &Rational::from_int(len);
        let h = sum_stage(&[scale_stage(&f, &k), g.clone()], &c);
        let want = &k * &integrate_1d(&f, &lo, &hi).unwrap() + integrate_1d(&g, &lo, &hi).unwrap() + &c * &Rational::from_int(len);
        prop_assert_eq!(integrate_1d(&h, &lo, &hi).unwrap(), want);
    }

    #[test]
    fn trapezoid_and_decomposition_routes_agree(seed in any::<u64>(), w in widths(), lo in rat(), len in 1i64..=10) {
        let f = pwl(&net(seed, 1, &w));
        let hi = &lo + &Rational::new(len, 2);
        let b = InputBox::new(vec![(lo.clone(), hi.clone())]).unwrap();
        prop_assert_eq!(integrate_1d(&f, &lo, &hi).unwrap(), integrate_by_decomposition(&f, &b).unwrap());
    }

    #[test]
    fn shap_is_efficient(seed in any::<u64>(), m in 1usize..=2, w in 1usize..=2, t in 0i64..=4, u in 0i64..=4) {
        let net = net(seed, m, &[w]);
        let f = pwl(&net);
        let b = InputBox::new(vec![(Rational::from_int(-1), Rational::from_int(1)); m]).unwrap();
        let y: Vec<Rational> = [t, u][..m].iter().map(|&k| Rational::new(k - 2, 2)).collect();
        let total: Rational = shap_all(&f, &y, &b).unwrap().into_iter().sum();
        let mean = integrate_box(&f, &b).unwrap() / b.volume();
        prop_assert_eq!(total, pwl_eval(&f, &y).unwrap() - mean);
    }

    #[test]
    fn selected_cells_satisfy_the_matrix(seed in any::<u64>(), w in widths(), c in rat()) {
        let net = net(seed, 1, &w);
        let ps = BTreeMap::from([("c".to_string(), c.clone())]);
        let QueryAnswer::Open { cells, .. } = evaluate_query(&net, "F(x) > c", &ps, &["x".into()]).unwrap() else {
            panic!("open query");
        };
        for (_, s) in &cells {
            prop_assert!(forward_by_hand(&net, s) > c);
        }
        prop_assert_eq!(!cells.is_empty(), closed(&net, "exists x . F(x) > c", &[("c", &c)]));
    }

    #[test]
    fn quantifiers_are_dual(seed in any::<u64>(), w in widths(), c in rat(), d in rat()) {
        let net = net(seed, 1, &w);
        let ps = [("c", &c), ("d", &d)];
        let e = closed(&net, "exists x . (F(x) > c and x < d)", &ps);
        let a = closed(&net, "forall x . not (F(x) > c and x < d)", &ps);
        prop_assert_eq!(e, !a);
    }

    #[test]
    fn localized_function_agrees_inside_the_box(seed in any::<u64>(), w in widths(), c in rat(), r in 1i64..=8, t in 0i64..=16, u in 0i64..=16) {
        let net = net(seed, 2, &w);
        let f = pwl(&net);
        let half = Rational::new(r, 4);
        let region = vec![(&c - &half, &c + &half), (-&half, half.clone())];
        let local = pwl_localize(&f, &region).unwrap();
        prop_assert!(local.breakplanes().len() <= f.breakplanes().len());
        // Points strictly inside the box on a 1/17 grid.
        let x: Vec<Rational> = region
            .iter()
            .zip([t, u])
            .map(|((lo, hi), k)| lo + &((hi - lo) * Rational::new(k + 1, 18)))
            .collect();
        prop_assert_eq!(pwl_eval(&local, &x).unwrap(), forward_by_hand(&net, &x));
    }

    #[test]
    fn bottom_absorbs(x in rat(), k in rat()) {
        let bot = LiftedRational::Bottom;
        let v = LiftedRational::Value(x);
        for op in [LiftedOp::Add, LiftedOp::Sub, LiftedOp::Mul, LiftedOp::Div] {
            prop_assert_eq!(lifted_arith(op, &v, &bot), LiftedRational::Bottom);
            prop_assert_eq!(lifted_arith(op, &bot, &v), LiftedRational::Bottom);
        }
        prop_assert_eq!(bot.scale(&k), LiftedRational::Bottom);
        prop_assert_eq!(lifted_compare(&bot, &v), std::cmp::Ordering::Less);
    }

    #[test]
    fn rationals_are_canonical(n in -1000i64..=1000, d in 1i64..=1000, k in 1i64..=50) {
        let a = Rational::new(n * k, d * k);
        let b = Rational::new(-n, -d);
        prop_assert_eq!(&a, &Rational::new(n, d));
        prop_assert_eq!(&a, &b);
        prop_assert!(a.denom() > 0.into());
        prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a.clone());
        prop_assert_eq!(a.is_integer(), a.to_string().parse::<i64>().is_ok());
    }
}
