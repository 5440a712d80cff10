//! Integration against trapezoids, Monte Carlo, sawtooth fixtures and
//! Cayley-Menger volumes.

mod common;

use common::*;
use nnq_core::affine::AffineFunctional;
use nnq_core::analysis::{
    all_sectors, integrate_1d, integrate_box, integrate_by_decomposition, simplex_volume, triangulate_cell, InputBox,
    Simplex,
};
use nnq_core::geometry::{build_cd_in_region, Arrangement};
use nnq_core::network::{build_sawtooth, NeuronId};
use nnq_core::pwl::pwl_from_network;
use nnq_core::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Simplex {
    Simplex {
        corners: (0..=n).map(|_| (0..n).map(|_| small_rational(rng, 6, 3)).collect()).collect(),
    }
}

#[test]
fn simplex_volume_matches_cayley_menger() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=4 {
        for _ in 0..25 {
            let s = random_simplex(&mut rng, n);
            let v = simplex_volume(&s);
            assert_eq!(&v * &v, cayley_menger_volume_sq(&s.corners), "{:?}", s.corners);
        }
    }
}

#[test]
fn unit_simplex_volume() {
    for n in 1..=5usize {
        let mut corners = vec![vec![Rational::zero(); n]];
        for i in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[i] = Rational::one();
            corners.push(e);
        }
        let fact: i64 = (1..=n as i64).product();
        assert_eq!(simplex_volume(&Simplex { corners }), Rational::new(1, fact));
    }
}

fn box_arrangement(rng: &mut ChaCha8Rng, n: usize, lines: usize, region: &[(Rational, Rational)]) -> Arrangement {
    let mut arr = Arrangement::new(n);
    for (i, (lo, hi)) in region.iter().enumerate() {
        let xi = AffineFunctional::coordinate(n, i);
        arr.insert_functional(&xi.add_constant(&-lo)).unwrap();
        arr.insert_functional(&xi.add_constant(&-hi)).unwrap();
    }
    for _ in 0..lines {
        let coeffs: Vec<Rational> = (0..=n).map(|_| small_rational(rng, 3, 2)).collect();
        arr.insert_functional(&AffineFunctional::new(coeffs)).unwrap();
    }
    arr
}

/// Closed membership through signed volumes: `p` is in the simplex when no
/// corner swap flips the orientation.
fn in_simplex(s: &Simplex, p: &[Rational]) -> bool {
    let orient = |pts: &[Vec<Rational>]| {
        let last = &pts[pts.len() - 1];
        det_gauss(
            pts[..pts.len() - 1]
                .iter()
                .map(|v| v.iter().zip(last).map(|(a, b)| a - b).collect())
                .collect(),
        )
    };
    let base = orient(&s.corners);
    (0..s.corners.len()).all(|i| {
        let mut pts = s.corners.clone();
        pts[i] = p.to_vec();
        let d = orient(&pts);
        d.is_zero() || d.signum() == base.signum()
    })
}

#[test]
fn triangulations_tile_the_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 2..=3 {
        for _ in 0..8 {
            let region: Vec<(Rational, Rational)> = (0..n)
                .map(|_| {
                    let lo = small_rational(&mut rng, 3, 2);
                    let hi = &lo + &Rational::new(rng.gen_range(1..=4), 1);
                    (lo, hi)
                })
                .collect();
            let arr = box_arrangement(&mut rng, n, 3, &region);
            let cd = build_cd_in_region(&arr, &region);
            let inside = |x: &[Rational]| region.iter().zip(x).all(|((lo, hi), v)| lo < v && v < hi);
            let mut total = Rational::zero();
            for c in 0..cd.cells(n).len() {
                if all_sectors(&cd, n, c) && inside(&cd.cell(n, c).sample) {
                    total = total + triangulate_cell(&cd, n, c).unwrap().iter().map(simplex_volume).sum::<Rational>();
                }
            }
            let volume: Rational = region.iter().map(|(lo, hi)| hi - lo).product();
            assert_eq!(total, volume);

            // Random points fall inside a simplex of the cell that holds them.
            for _ in 0..40 {
                let x: Vec<Rational> = region
                    .iter()
                    .map(|(lo, hi)| lo + &((hi - lo) * Rational::new(rng.gen_range(1..1000), 1000)))
                    .collect();
                let path = cd.locate(&x);
                assert_eq!(path.len(), n + 1);
                let c = path[n];
                if !all_sectors(&cd, n, c) {
                    continue;
                }
                let simplices = triangulate_cell(&cd, n, c).unwrap();
                assert!(simplices.iter().any(|s| in_simplex(s, &x)), "{x:?} not covered");
            }
        }
    }
}

#[test]
fn one_dimensional_routes_agree_with_trapezoids() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let w = rng.gen_range(1..=3);
        let net = random_net(&mut rng, 1, &[w]);
        let f = pwl_from_network(&net, NeuronId::Output(0)).unwrap();
        let lo = small_rational(&mut rng, 6, 2);
        let hi = &lo + &Rational::new(rng.gen_range(1..=12), 2);
        let want = trapezoid_integral(&net, &lo, &hi);
        let b = InputBox::new(vec![(lo.clone(), hi.clone())]).unwrap();
        assert_eq!(integrate_1d(&f, &lo, &hi).unwrap(), want);
        assert_eq!(integrate_by_decomposition(&f, &b).unwrap(), want);
    }
}

#[test]
fn two_dimensional_integrals_match_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..6 {
        let widths: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(1..=2)).collect();
        let net = random_net(&mut rng, 2, &widths);
        let f = pwl_from_network(&net, NeuronId::Output(0)).unwrap();
        let region: Vec<(Rational, Rational)> = (0..2)
            .map(|_| {
                let lo = small_rational(&mut rng, 4, 1);
                (lo.clone(), &lo + &Rational::new(rng.gen_range(1..=4), 1))
            })
            .collect();
        let exact = integrate_box(&f, &InputBox::new(region.clone()).unwrap()).unwrap().to_f64();
        let fb: Vec<(f64, f64)> = region.iter().map(|(l, h)| (l.to_f64(), h.to_f64())).collect();
        let mc = monte_carlo_integral(&net, &fb, 400_000, &mut rng);
        let area = (fb[0].1 - fb[0].0) * (fb[1].1 - fb[1].0);
        // Absolute slack scaled by the box area keeps near-zero integrals stable.
        assert!((mc - exact).abs() <= 2e-2 * exact.abs().max(area), "exact {exact} mc {mc}");
    }
}

#[test]
fn sawtooth_integral_counts_teeth() {
    let t = |k: i64| Rational::new(k, 16);
    let cases = [
        (vec![t(2)], vec![t(9)], true),
        (vec![t(1), t(5)], vec![t(11)], false),
        (vec![], vec![], true),
        (vec![t(3), t(7)], vec![t(8), t(13)], true),
        (vec![t(4)], vec![], false),
    ];
    for (s1, s2, zero) in cases {
        let net = build_sawtooth(&s1, &s2).unwrap();
        let f = pwl_from_network(&net, NeuronId::Output(0)).unwrap();
        let v = integrate_box(&f, &InputBox::unit(1)).unwrap();
        assert_eq!(v.is_zero(), zero, "{s1:?} {s2:?}");
        assert_eq!(v, trapezoid_integral(&net, &Rational::zero(), &Rational::one()));
    }
}
