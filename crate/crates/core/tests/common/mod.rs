#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use realpath::minkowski::{classify, CausalClass, MinkowskiPath};
use realpath::path::{Event, SpacetimePath};
use realpath::toy::{M1Spec, M2Spec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Prob(P_i) by direct summation, normalised at the end.
pub fn naive_probabilities(amps: &[Complex64], d: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let n = amps.len();
    let mut raw = vec![0.0; n];
    for i in 0..n {
        let mut re = 0.0;
        let mut im = 0.0;
        let mut vol = 0.0;
        for j in 0..n {
            let e = if d[i][j] == f64::INFINITY { 0.0 } else { (-d[i][j]).exp() };
            re += amps[j].re * e;
            im += amps[j].im * e;
            vol += e;
        }
        raw[i] = if w[i] == 0.0 { 0.0 } else { w[i] * (re * re + im * im) / vol };
    }
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

/// 1+1D polyline on integer times `0..=steps` from `x = 0` back to `x = 0`.
pub fn random_galilean_path(rng: &mut impl Rng, steps: usize, mass: f64) -> SpacetimePath {
    let mut points = vec![(0.0, 0.0)];
    for t in 1..steps {
        points.push((rng.gen_range(-3.0..3.0), t as f64));
    }
    points.push((0.0, steps as f64));
    SpacetimePath::from_xt(&points, mass).unwrap()
}

/// Same, but with random intermediate times so grids differ between paths.
pub fn random_irregular_path(rng: &mut impl Rng, vertices: usize, span: f64) -> SpacetimePath {
    let mut times: Vec<f64> = (0..vertices).map(|_| rng.gen_range(0.0..span)).collect();
    times.sort_by(f64::total_cmp);
    let mut points = vec![(0.0, 0.0)];
    for t in times {
        if t > points.last().unwrap().1 && t < span {
            points.push((rng.gen_range(-3.0..3.0), t));
        }
    }
    points.push((0.0, span));
    SpacetimePath::from_xt(&points, 1.0).unwrap()
}

pub const MINKOWSKI_SPAN: f64 = 2.0;

fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// 3+1D polyline from the origin to `(0, 0, 0, MINKOWSKI_SPAN)` with
/// increasing times; `reach` scales the spatial excursions relative to the
/// light cone, so values above 1 tend to give non-causal paths.
pub fn random_minkowski_path(rng: &mut impl Rng, reach: f64) -> MinkowskiPath {
    let vertices = rng.gen_range(1..=4);
    let mut times: Vec<f64> = (0..vertices).map(|_| rng.gen_range(0.05..MINKOWSKI_SPAN - 0.05)).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut events = vec![Event::new3(0.0, 0.0, 0.0, 0.0)];
    for t in times {
        let r = reach * rng.gen_range(0.0..1.0) * t.min(MINKOWSKI_SPAN - t) * 0.5;
        let u = random_unit(rng);
        events.push(Event::new3(r * u[0], r * u[1], r * u[2], t));
    }
    events.push(Event::new3(0.0, 0.0, 0.0, MINKOWSKI_SPAN));
    MinkowskiPath::new(events, 3).unwrap()
}

/// Mixed corpus of causal and non-causal paths sharing endpoints.
pub fn minkowski_corpus(rng: &mut impl Rng, size: usize) -> Vec<MinkowskiPath> {
    let mut out = Vec::with_capacity(size);
    let (mut causal, mut non) = (0, 0);
    while out.len() < size {
        let reach = if out.len() % 2 == 0 { 1.0 } else { 6.0 };
        let p = random_minkowski_path(rng, reach);
        match classify(&p) {
            CausalClass::Causal if causal <= size / 2 => {
                causal += 1;
                out.push(p);
            }
            CausalClass::NonCausal if non <= size / 2 => {
                non += 1;
                out.push(p);
            }
            _ => {}
        }
    }
    out
}

/// Null zigzag from the origin to `(0, 0, 0, MINKOWSKI_SPAN)` along a random
/// direction.
pub fn null_zigzag(rng: &mut impl Rng) -> MinkowskiPath {
    let u = random_unit(rng);
    let h = MINKOWSKI_SPAN / 2.0;
    MinkowskiPath::new(
        vec![
            Event::new3(0.0, 0.0, 0.0, 0.0),
            Event::new3(h * u[0], h * u[1], h * u[2], h),
            Event::new3(0.0, 0.0, 0.0, MINKOWSKI_SPAN),
        ],
        3,
    )
    .unwrap()
}

pub fn random_boost(rng: &mut impl Rng) -> (f64, [f64; 3]) {
    (rng.gen_range(-2.0..2.0), random_unit(rng))
}

pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Smeared sum, volume and value at 1-based `i`, evaluated the slow way.
pub fn naive_step_value(amps: &[Complex64], i: usize, d: usize) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    let mut vol = 0.0;
    for j in 1..=amps.len() {
        let w = match i.abs_diff(j).cmp(&d) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater => 0.0,
        };
        s += amps[j - 1] * w;
        vol += w;
    }
    s.norm_sqr() / vol
}

pub fn m1_specs() -> Vec<(M1Spec, usize)> {
    let mut out = Vec::new();
    for &(n, m, k, d) in &[
        (24, 9, 3, 3),
        (60, 21, 4, 5),
        (60, 21, 4, 2),
        (101, 41, 6, 3),
        (101, 41, 6, 4),
        (101, 41, 6, 7),
        (200, 81, 11, 6),
        (200, 81, 11, 5),
        (200, 81, 10, 5),
        (400, 101, 30, 10),
        (400, 101, 30, 15),
        (400, 101, 30, 16),
        (2000, 901, 40, 5),
        (2000, 901, 40, 21),
        (2000, 901, 40, 20),
        (2000, 901, 40, 100),
        (2000, 501, 201, 60),
        (1000, 301, 7, 50),
        (1000, 301, 7, 3),
        (1000, 301, 7, 4),
        (51, 15, 2, 1),
        (51, 15, 1, 1),
    ] {
        let n = if (n - m - k) % 2 == 0 { n } else { n + 1 };
        out.push((M1Spec { n, m, k }, d));
    }
    out
}

pub fn close_spec(k: usize, theta0: f64, theta1: f64) -> (M2Spec, usize) {
    let d = 10 * (2 * k + 3);
    let m0 = 2 * d + 3;
    let m1 = m0 + k + 3;
    let n = m1 + k + 2 * d + 2;
    (M2Spec { n, m0, k0: k, m1, k1: k, theta0, theta1 }, d)
}

pub fn far_spec(k0: usize, k1: usize) -> (M2Spec, usize) {
    let d = 10 * k0.max(k1);
    let m0 = 2 * d + 3;
    let mut m1 = m0 + k0 + 2 * d + 3;
    if (m1 - m0 - k0) % 2 == 0 {
        m1 += 1;
    }
    let mut n = m1 + k1 + 2 * d + 4;
    if (n - m1 - k1) % 2 == 1 {
        n += 1;
    }
    (M2Spec { n, m0, k0, m1, k1, theta0: 0.0, theta1: 0.0 }, d)
}
