//! Test oracles. Each one works from the network weights or from first
//! principles and shares no code path with the routines it checks.

#![allow(dead_code)]

pub mod fm;

use nnq_core::network::{Network, Neuron};
use nnq_core::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Small rational with numerator in `-k..=k` and denominator in `1..=den`.
pub fn small_rational(rng: &mut ChaCha8Rng, k: i64, den: i64) -> Rational {
    Rational::new(rng.gen_range(-k..=k), rng.gen_range(1..=den))
}

pub fn random_neuron(rng: &mut ChaCha8Rng, fan_in: usize) -> Neuron {
    Neuron::dense(
        small_rational(rng, 4, 2),
        (0..fan_in).map(|_| small_rational(rng, 4, 2)).collect(),
    )
}

/// Random single-output net with `m` inputs and the given hidden widths.
pub fn random_net(rng: &mut ChaCha8Rng, m: usize, widths: &[usize]) -> Network {
    let mut fan = m;
    let mut hidden = Vec::new();
    for &w in widths {
        hidden.push((0..w).map(|_| random_neuron(rng, fan)).collect());
        fan = w;
    }
    let out = random_neuron(rng, fan);
    Network::new(m, hidden, vec![out]).unwrap()
}

/// Random net in `F(m, l)`: `l - 1` hidden layers of width in `1..=max_width`.
pub fn random_net_in_class(rng: &mut ChaCha8Rng, m: usize, l: usize, max_width: usize) -> Network {
    let widths: Vec<usize> = (1..l).map(|_| rng.gen_range(1..=max_width)).collect();
    random_net(rng, m, &widths)
}

pub fn random_point(rng: &mut ChaCha8Rng, m: usize) -> Vec<Rational> {
    (0..m).map(|_| small_rational(rng, 12, 4)).collect()
}

/// Direct forward pass from the raw weights.
pub fn forward_by_hand(net: &Network, x: &[Rational]) -> Rational {
    let dot = |n: &Neuron, v: &[Rational]| {
        n.weights
            .iter()
            .zip(v)
            .fold(n.bias.clone(), |acc, (w, xi)| match w {
                Some(w) => acc + w * xi,
                None => acc,
            })
    };
    let mut v = x.to_vec();
    for layer in net.hidden() {
        v = layer
            .iter()
            .map(|n| dot(n, &v).max(Rational::zero()))
            .collect();
    }
    dot(&net.outputs()[0], &v)
}

/// One activation pattern of a single-hidden-layer net: linear constraints
/// `(coeffs, constant, strict)` meaning `coeffs·x + constant > 0` (or `>= 0`)
/// and the affine output `(coeffs, constant)` on that region.
pub struct Pattern {
    pub region: Vec<(Vec<Rational>, Rational, bool)>,
    pub output: (Vec<Rational>, Rational),
}

/// Case split of a one-hidden-layer net over all activation patterns.
pub fn activation_patterns(net: &Network) -> Vec<Pattern> {
    assert_eq!(net.depth(), 2, "oracle handles one hidden layer");
    let m = net.inputs();
    let layer = &net.hidden()[0];
    let out = &net.outputs()[0];
    let w = |n: &Neuron, i: usize| n.weights[i].clone().unwrap_or_else(Rational::zero);
    let mut pats = Vec::new();
    for mask in 0..(1usize << layer.len()) {
        let mut region = Vec::new();
        let mut oc = vec![Rational::zero(); m];
        let mut o0 = out.bias.clone();
        for (k, n) in layer.iter().enumerate() {
            let coeffs: Vec<Rational> = (0..m).map(|i| w(n, i)).collect();
            if mask >> k & 1 == 1 {
                region.push((coeffs.clone(), n.bias.clone(), false));
                let v = w(out, k);
                for i in 0..m {
                    oc[i] = &oc[i] + &(&v * &coeffs[i]);
                }
                o0 = o0 + &v * &n.bias;
            } else {
                region.push((coeffs.iter().map(|c| -c).collect(), -&n.bias, true));
            }
        }
        pats.push(Pattern {
            region,
            output: (oc, o0),
        });
    }
    pats
}

/// `f64` forward pass from the raw weights.
pub fn forward_f64(net: &Network, x: &[f64]) -> f64 {
    let dot = |n: &Neuron, v: &[f64]| {
        n.weights.iter().zip(v).fold(n.bias.to_f64(), |acc, (w, xi)| match w {
            Some(w) => acc + w.to_f64() * xi,
            None => acc,
        })
    };
    let mut v = x.to_vec();
    for layer in net.hidden() {
        v = layer.iter().map(|n| dot(n, &v).max(0.0)).collect();
    }
    dot(&net.outputs()[0], &v)
}

/// Values of `x_i` at which some hidden unit of a one-hidden-layer net changes
/// phase on the line through `a` parallel to axis `i`. A superset of the true
/// breakpoints of the restriction.
pub fn line_kinks(net: &Network, a: &[Rational], i: usize) -> Vec<Rational> {
    assert_eq!(net.depth(), 2, "oracle handles one hidden layer");
    let mut out = Vec::new();
    for n in &net.hidden()[0] {
        let w = |j: usize| n.weights[j].clone().unwrap_or_else(Rational::zero);
        if w(i).is_zero() {
            continue;
        }
        let mut rest = n.bias.clone();
        for (j, aj) in a.iter().enumerate() {
            if j != i {
                rest = rest + w(j) * aj;
            }
        }
        out.push(-rest / w(i));
    }
    out.sort();
    out.dedup();
    out
}

/// `F` restricted to the line through `a` along axis `i`.
pub fn along(net: &Network, a: &[Rational], i: usize, t: &Rational) -> Rational {
    let mut x = a.to_vec();
    x[i] = t.clone();
    forward_by_hand(net, &x)
}

/// Integral over `[lo, hi]` of a one-input, one-hidden-layer net by the
/// trapezoid rule on the unit kinks, which is exact for a piecewise-linear
/// function.
pub fn trapezoid_integral(net: &Network, lo: &Rational, hi: &Rational) -> Rational {
    let mut pts = vec![lo.clone(), hi.clone()];
    pts.extend(line_kinks(net, &[Rational::zero()], 0).into_iter().filter(|k| lo < k && k < hi));
    pts.sort();
    let two = Rational::from_int(2);
    pts.windows(2)
        .map(|w| {
            let f = |t: &Rational| forward_by_hand(net, &[t.clone()]);
            (f(&w[0]) + f(&w[1])) * (&w[1] - &w[0]) / &two
        })
        .sum()
}

/// Plain Monte-Carlo estimate of the integral over a box.
pub fn monte_carlo_integral(net: &Network, bounds: &[(f64, f64)], samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let vol: f64 = bounds.iter().map(|(a, b)| b - a).product();
    let mut x = vec![0.0; bounds.len()];
    let mut acc = 0.0;
    for _ in 0..samples {
        for (xi, (a, b)) in x.iter_mut().zip(bounds) {
            *xi = rng.gen_range(*a..*b);
        }
        acc += forward_f64(net, &x);
    }
    acc / samples as f64 * vol
}

/// Points `a + k / 2^bits` with `|k / 2^bits| < eps`.
pub fn grid_around(a: &Rational, eps: &Rational, bits: u32) -> Vec<Rational> {
    let step = Rational::new(1, 1i64 << bits);
    let mut out = vec![a.clone()];
    let mut k = Rational::one();
    loop {
        let off = &k * &step;
        if off >= *eps {
            break;
        }
        out.push(a + &off);
        out.push(a - &off);
        k = k + Rational::one();
    }
    out
}

/// Whether the one-input net moves by `delta` or more somewhere on the grid
/// around `a` inside the open `eps`-ball.
pub fn grid_falsifies(net: &Network, a: &Rational, eps: &Rational, delta: &Rational, bits: u32) -> bool {
    let fa = forward_by_hand(net, &[a.clone()]);
    grid_around(a, eps, bits)
        .iter()
        .any(|x| (forward_by_hand(net, &[x.clone()]) - &fa).abs() >= *delta)
}

/// Infimum of `r > 0` such that changing feature `i` of `a` by `r` in some
/// direction moves the output by more than `eps`. Scans the pieces of the
/// line restriction between consecutive kinks.
pub fn contribution_by_scan(net: &Network, a: &[Rational], i: usize, eps: &Rational) -> Option<Rational> {
    let f0 = forward_by_hand(net, a);
    let kinks = line_kinks(net, a, i);
    let mut best: Option<Rational> = None;
    for dir in [Rational::one(), -Rational::one()] {
        // Knot radii in increasing order, starting at 0.
        let mut radii = vec![Rational::zero()];
        radii.extend(kinks.iter().map(|k| (k - &a[i]) * &dir).filter(|r| r.is_positive()));
        radii.sort();
        radii.dedup();
        let g = |r: &Rational| along(net, a, i, &(&a[i] + r * &dir)) - &f0;
        for (k, r0) in radii.iter().enumerate() {
            let r1 = radii.get(k + 1).cloned().unwrap_or_else(|| r0 + Rational::one());
            let (g0, g1) = (g(r0), g(&r1));
            if g0.abs() > *eps {
                best = Some(best.map_or(r0.clone(), |b| b.min(r0.clone())));
                break;
            }
            let slope = (&g1 - &g0) / (&r1 - r0);
            if slope.is_zero() {
                continue;
            }
            let target = if slope.is_positive() { eps.clone() } else { -eps };
            let hit = r0 + (target - &g0) / &slope;
            let last = k + 1 == radii.len();
            if last || hit < r1 {
                best = Some(best.map_or(hit.clone(), |b| b.min(hit)));
                break;
            }
        }
    }
    best
}

/// Closest point to `a` in the closure of `{x : F(x) > t}` for a one-input,
/// one-hidden-layer net, solved piece by piece on the kinks. Ties go to the
/// smaller point. `None` if the region is empty.
pub fn counterfactual_1d(net: &Network, a: &Rational, t: &Rational) -> Option<(Rational, Rational)> {
    let f = |x: &Rational| forward_by_hand(net, &[x.clone()]);
    let kinks = line_kinks(net, &[Rational::zero()], 0);
    let one = Rational::one();
    // Pieces as (lo, hi) with None for an infinite end.
    let mut ends: Vec<Option<Rational>> = vec![None];
    ends.extend(kinks.iter().cloned().map(Some));
    ends.push(None);
    let mut best: Option<(Rational, Rational)> = None;
    for w in ends.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        // Two points inside the closed piece give its affine form.
        let (p, q) = match (lo, hi) {
            (Some(l), Some(h)) => (l.clone(), h.clone()),
            (Some(l), None) => (l.clone(), l + &one),
            (None, Some(h)) => (h - &one, h.clone()),
            (None, None) => (Rational::zero(), one.clone()),
        };
        let slope = (f(&q) - f(&p)) / (&q - &p);
        let value_p = f(&p);
        // Closure of {x in [lo, hi] : F(x) > t}, an interval since F is affine here.
        let (mut l, mut h) = (lo.clone(), hi.clone());
        if slope.is_zero() {
            if value_p <= *t {
                continue;
            }
        } else {
            let root = &p + (t - &value_p) / &slope;
            if slope.is_positive() {
                if hi.as_ref().is_some_and(|h| *h <= root) {
                    continue;
                }
                l = Some(l.map_or(root.clone(), |v| v.max(root)));
            } else {
                if lo.as_ref().is_some_and(|l| *l >= root) {
                    continue;
                }
                h = Some(h.map_or(root.clone(), |v| v.min(root)));
            }
        }
        let x = match (&l, &h) {
            (Some(l), _) if a < l => l.clone(),
            (_, Some(h)) if a > h => h.clone(),
            _ => a.clone(),
        };
        let d = (&x - a).abs();
        let better = match &best {
            None => true,
            Some((bd, bx)) => d < *bd || (d == *bd && x < *bx),
        };
        if better {
            best = Some((d, x));
        }
    }
    best
}

/// Determinant by plain Gaussian elimination over the rationals.
pub fn det_gauss(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det = det * &m[c][c];
        for r in c + 1..n {
            let k = &m[r][c] / &m[c][c];
            for j in c..n {
                let v = &m[c][j] * &k;
                m[r][j] = &m[r][j] - &v;
            }
        }
    }
    det
}

/// Squared volume of a simplex from its pairwise squared distances.
pub fn cayley_menger_volume_sq(corners: &[Vec<Rational>]) -> Rational {
    let k = corners.len();
    let n = k - 1;
    let mut m = vec![vec![Rational::one(); k + 1]; k + 1];
    m[0][0] = Rational::zero();
    for i in 0..k {
        for j in 0..k {
            m[i + 1][j + 1] = corners[i].iter().zip(&corners[j]).map(|(a, b)| (a - b) * (a - b)).sum();
        }
    }
    let fact: Rational = (1..=n as i64).map(Rational::from_int).product();
    let scale = Rational::from_int(1i64 << n) * &fact * &fact;
    let sign = if (n + 1) % 2 == 0 { Rational::one() } else { -Rational::one() };
    sign * det_gauss(m) / scale
}

/// Integral over `[lo, hi]` of `F` along axis `i` through `a`, for a
/// one-hidden-layer net, by trapezoids on the unit kinks.
pub fn line_integral(net: &Network, a: &[Rational], i: usize, lo: &Rational, hi: &Rational) -> Rational {
    let mut pts = vec![lo.clone(), hi.clone()];
    pts.extend(line_kinks(net, a, i).into_iter().filter(|k| lo < k && k < hi));
    pts.sort();
    let two = Rational::from_int(2);
    pts.windows(2)
        .map(|w| (along(net, a, i, &w[0]) + along(net, a, i, &w[1])) * (&w[1] - &w[0]) / &two)
        .sum()
}
