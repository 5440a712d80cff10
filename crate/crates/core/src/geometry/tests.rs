use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::affine::Sign;
use crate::linear::realizable_sign_vectors;

fn hp(c: &[i64]) -> Hyperplane {
    Hyperplane::from_ints(c).unwrap()
}

fn arr(dim: usize, planes: &[&[i64]]) -> Arrangement {
    Arrangement::from_planes(dim, planes.iter().map(|c| hp(c))).unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

#[test]
fn canonical_forms() {
    assert_eq!(hp(&[4, -2]), hp(&[-2, 1]));
    assert_eq!(
        hp(&[-2, 1]).coeffs(),
        &[Rational::from_int(-2), Rational::one()]
    );
    let third = Hyperplane::new(&AffineFunctional::new(vec![q(-1, 3), q(1, 3)])).unwrap();
    assert_eq!(third, hp(&[-1, 1]));
    assert_eq!(hp(&[0, 2, -2]), hp(&[0, -1, 1]));
    assert_eq!(
        Hyperplane::from_ints(&[3, 0, 0]),
        Err(GeometryError::Degenerate)
    );
    let (_, s) =
        Hyperplane::with_orientation(&AffineFunctional::new(vec![q(1, 1), q(-2, 1)])).unwrap();
    assert_eq!(s, Sign::Neg);
}

#[test]
fn projection_examples() {
    // x2 = x1 alone has no partner and is not vertical.
    assert!(project_arrangement(&arr(2, &[&[0, -1, 1]])).is_empty());
    let p = project_arrangement(&arr(2, &[&[0, -1, 1], &[0, 1, 1]]));
    assert_eq!(p, arr(1, &[&[0, 1]]));
    let p = project_arrangement(&arr(2, &[&[-3, 1, 0]]));
    assert_eq!(p, arr(1, &[&[-3, 1]]));
    // Parallel slanted planes project to nothing.
    assert!(project_arrangement(&arr(2, &[&[0, -1, 1], &[1, -1, 1]])).is_empty());
}

#[test]
fn small_decompositions() {
    let cd = build_cd(&Arrangement::new(1));
    assert_eq!(cd.level_sizes(), vec![1, 1]);
    assert_eq!(cd.cell(1, 0).sample, vec![Rational::zero()]);

    let a = arr(2, &[&[0, -1, 1]]);
    let cd = build_cd(&a);
    assert_eq!(cd.level_sizes(), vec![1, 1, 3]);
    let h = a.get(0);
    // The canonical form is x1 - x2 = 0, so the cell above is on its negative side.
    let sides: Vec<Sign> = (0..3).map(|i| cell_side(&cd, 2, i, h).unwrap()).collect();
    assert_eq!(sides, vec![Sign::Pos, Sign::Zero, Sign::Neg]);

    for k in 1..6 {
        let planes: Vec<Hyperplane> = (0..k).map(|i| hp(&[-i, 1])).collect();
        let cd = build_cd(&Arrangement::from_planes(1, planes).unwrap());
        assert_eq!(cd.cells(1).len() as i64, 2 * k + 1);
    }
}

#[test]
fn side_requires_pool_membership() {
    let cd = build_cd(&arr(1, &[&[0, 1]]));
    assert!(matches!(
        cell_side(&cd, 1, 0, &hp(&[-1, 1])),
        Err(GeometryError::NotInPool(..))
    ));
}

#[test]
fn compatibility_examples() {
    let a = arr(1, &[&[0, 1]]);
    let cd = build_cd(&a);
    assert!(compatibility_check(&cd, &a));
    assert!(!compatibility_check(&cd, &arr(1, &[&[-1, 1]])));
    let big = arr(2, &[&[0, -1, 1], &[1, 1, 1], &[-2, 1, 0]]);
    let cd = build_cd(&big);
    assert!(compatibility_check(&cd, &big));
    assert!(compatibility_check(&cd, &arr(2, &[&[1, 1, 1]])));
}

#[test]
fn corners() {
    // Sector between x = 1 and x = 3.
    let cd = build_cd(&arr(1, &[&[-1, 1], &[-3, 1]]));
    let mid = cd
        .cells(1)
        .iter()
        .position(|c| c.sample == vec![Rational::from_int(2)])
        .unwrap();
    assert_eq!(
        cell_corners(&cd, 1, mid).unwrap(),
        vec![vec![Rational::from_int(1)], vec![Rational::from_int(3)]]
    );
    assert_eq!(cell_corners(&cd, 1, 0), Err(GeometryError::Unbounded));

    // Triangle 0 < x1 < 2, 0 < x2 < x1: corners ⊢⊢ and ⊢⊣ coincide at the origin.
    let a = arr(2, &[&[0, 1, 0], &[-2, 1, 0], &[0, 0, 1], &[0, -1, 1]]);
    let cd = build_cd(&a);
    let pt = [q(3, 2), q(1, 2)];
    let path = cd.locate(&pt);
    let cs = cell_corners(&cd, 2, path[2]).unwrap();
    assert_eq!(cs.len(), 4);
    assert_eq!(cs[0b00], cs[0b10]);
    assert_eq!(corner_id(0b10, 2), "⊢⊣");
    let distinct: BTreeSet<_> = cs.iter().collect();
    assert_eq!(distinct.len(), 3);

    // Unit square.
    let a = arr(2, &[&[0, 1, 0], &[-1, 1, 0], &[0, 0, 1], &[-1, 0, 1]]);
    let cd = build_cd(&a);
    let path = cd.locate(&[q(1, 2), q(1, 2)]);
    let cs: BTreeSet<_> = cell_corners(&cd, 2, path[2]).unwrap().into_iter().collect();
    assert_eq!(cs.len(), 4);
}

#[test]
fn region_restriction_keeps_box_cells() {
    let a = arr(
        2,
        &[
            &[0, 1, 0],
            &[-1, 1, 0],
            &[0, -1, 1],
            &[5, 3, 1],
            &[-40, 1, 1],
        ],
    );
    let region = [(Rational::zero(), Rational::one())];
    let cd = build_cd_in_region(&a, &region);
    let full = build_cd(&a);
    assert!(cd.cells(2).len() < full.cells(2).len());
    for c in cd.cells(1) {
        let inside = c.sample[0] >= Rational::zero() && c.sample[0] <= Rational::one();
        assert_eq!(c.children.is_some(), inside);
    }
    assert!(compatibility_check(&cd, &a));
}

fn plane_strategy(dim: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-3i64..=3, dim + 1)
        .prop_filter("nonzero", |c| c[1..].iter().any(|v| *v != 0))
}

fn arrangement_strategy() -> impl Strategy<Value = Arrangement> {
    (1usize..=3)
        .prop_flat_map(|d| {
            (
                Just(d),
                proptest::collection::vec(plane_strategy(d), 0..=if d == 3 { 4 } else { 6 }),
            )
        })
        .prop_map(|(d, ps)| Arrangement::from_planes(d, ps.iter().map(|c| hp(c))).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decomposition_is_compatible_and_complete(a in arrangement_strategy()) {
        let cd = build_cd(&a);
        let d = a.dim();
        prop_assert!(compatibility_check(&cd, &a));
        let planes: Vec<_> = a.iter().map(|h| h.functional().clone()).collect();
        let oracle: BTreeSet<Vec<Sign>> = realizable_sign_vectors(d, &planes).into_iter().map(|(s, _)| s).collect();
        let ours: BTreeSet<Vec<Sign>> = cd.samples(d).map(|s| a.sign_vector(s)).collect();
        prop_assert_eq!(ours, oracle);
    }

    #[test]
    fn stacks_are_strictly_ordered(a in arrangement_strategy()) {
        let cd = build_cd(&a);
        for level in 1..=a.dim() {
            for c in cd.cells(level - 1) {
                let (s, e) = c.children.unwrap();
                let stack = &cd.cells(level)[s..e];
                prop_assert_eq!(stack.len() % 2, 1);
                for (k, cell) in stack.iter().enumerate() {
                    prop_assert_eq!(cell.is_section(), k % 2 == 1);
                }
                let sections: Vec<Rational> = stack.iter().filter(|c| c.is_section())
                    .map(|s| cd.pool(level).get(s.lower.unwrap()).section_value(&c.sample)).collect();
                prop_assert!(sections.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn decomposition_is_deterministic(a in arrangement_strategy()) {
        let x = build_cd(&a);
        let y = build_cd(&a);
        for l in 0..=a.dim() {
            prop_assert_eq!(x.cells(l), y.cells(l));
        }
    }

    #[test]
    fn samples_lie_in_their_cells(a in arrangement_strategy()) {
        let cd = build_cd(&a);
        for l in 1..=a.dim() {
            for (i, c) in cd.cells(l).iter().enumerate() {
                prop_assert!(cd.contains(l, i, &c.sample));
                prop_assert_eq!(cd.locate(&c.sample).last().copied(), Some(i));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lp_faces_match_elimination(a in arrangement_strategy()) {
        let planes: Vec<Hyperplane> = a.iter().cloned().collect();
        let fs: Vec<_> = planes.iter().map(|h| h.functional().clone()).collect();
        let oracle: BTreeSet<Vec<Sign>> = realizable_sign_vectors(a.dim(), &fs).into_iter().map(|(s, _)| s).collect();
        let faces = arrangement_faces(a.dim(), &planes);
        for (s, w) in &faces {
            prop_assert_eq!(&a.sign_vector(w), s);
        }
        let ours: BTreeSet<Vec<Sign>> = faces.into_iter().map(|(s, _)| s).collect();
        prop_assert_eq!(ours, oracle);
    }
}
