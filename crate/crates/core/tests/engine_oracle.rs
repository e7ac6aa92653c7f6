mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use realpath::engine::*;
use realpath::path::PathEnsemble;
use realpath::toy::{build_m1, M1Spec};
use realpath::Error;

#[test]
fn engine_matches_naive_summation() {
    let mut rng = rng(21);
    for case in 0..200 {
        let n = rng.gen_range(1..=12);
        let amps: Vec<Complex64> = (0..n).map(|_| random_phase(&mut rng)).collect();
        let d: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.gen_range(0.0..4.0) }).collect()).collect();
        let w: Vec<f64> = if case % 2 == 0 { vec![1.0; n] } else { (0..n).map(|_| rng.gen_range(0.1..2.0)).collect() };
        let want = naive_probabilities(&amps, &d, &w);
        let ens = PathEnsemble::new(amps).unwrap();
        let m = DistanceMatrix::new(n, d.concat()).unwrap();
        let got = path_probabilities(&ens, &m, |i| w[i]).unwrap();
        for (g, e) in got.probs.iter().zip(&want) {
            assert!((g - e).abs() <= 1e-12, "case {case}: {g} vs {e}");
        }
    }
}

#[test]
fn step_fast_path_matches_naive_summation() {
    let spec = M1Spec { n: 61, m: 21, k: 6 };
    let ens = build_m1(&spec).unwrap();
    let d = 4;
    let dm: Vec<Vec<f64>> =
        (1..=61).map(|i| (1..=61).map(|j| realpath::distance::step_distance(i, j, d)).collect()).collect();
    let want = naive_probabilities(ens.amplitudes(), &dm, &[1.0; 61]);
    let got = path_probabilities(&ens, &StepIndexDistance::new(d), uniform).unwrap();
    for (g, e) in got.probs.iter().zip(&want) {
        assert!((g - e).abs() <= 1e-12);
    }
}

#[test]
fn prob_of_cancelled_window_is_zero_and_plateau_ratio_is_nine() {
    let ens = build_m1(&M1Spec { n: 24, m: 9, k: 3 }).unwrap();
    let r = path_probabilities(&ens, &StepIndexDistance::new(3), uniform).unwrap();
    assert_eq!(r.probs[4], 0.0);
    assert!((r.probs[9] / r.probs[6] - 9.0).abs() < 1e-12);
    assert!((r.unnormalized[0] - 1.0 / 14.0).abs() < 1e-15);
}

#[test]
fn limits_of_the_distance() {
    let mut rng = rng(22);
    for n in [1, 2, 7, 50, 301] {
        let ens = PathEnsemble::new((0..n).map(|_| random_phase(&mut rng)).collect()).unwrap();
        for r in [
            path_probabilities(&ens, &ZeroDistance, uniform).unwrap(),
            path_probabilities(&ens, &DiagonalDistance, uniform).unwrap(),
        ] {
            let u = 1.0 / n as f64;
            assert!(r.probs.iter().all(|p| (p - u).abs() <= 1e-9 * u));
        }
    }
}

#[test]
fn unit_weight_is_bitwise_the_unweighted_postulate() {
    let mut rng = rng(23);
    let n = 40;
    let ens = PathEnsemble::new((0..n).map(|_| random_phase(&mut rng)).collect()).unwrap();
    let values: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..3.0)).collect();
    let m = DistanceMatrix::new(n, values).unwrap();
    let a = path_probabilities(&ens, &m, uniform).unwrap();
    let b = path_probabilities(&ens, &m, |_| 1.0).unwrap();
    assert_eq!(a, b);
}

#[test]
fn quantum_final_state_ratios_in_the_zero_distance_limit() {
    let mut rng = rng(24);
    for _ in 0..20 {
        let size = rng.gen_range(1..10);
        let groups: Vec<PathEnsemble> = (0..3)
            .map(|g| PathEnsemble::with_endpoint((0..size).map(|_| random_phase(&mut rng)).collect(), format!("B{g}")).unwrap())
            .collect();
        let fs = final_state_probabilities(&groups, &ZeroDistance, uniform, CrossEndpoint::SameEndpointOnly).unwrap();
        let sq: Vec<f64> = groups.iter().map(|g| g.total_amplitude().norm_sqr()).collect();
        let total: f64 = sq.iter().sum();
        for (p, s) in fs.probs.iter().zip(&sq) {
            assert!((p - s / total).abs() <= 1e-9);
        }
    }
}

#[test]
fn all_zero_weights_are_rejected() {
    let ens = PathEnsemble::new(vec![Complex64::new(1.0, 0.0); 3]).unwrap();
    assert_eq!(path_probabilities(&ens, &ZeroDistance, |_| 0.0), Err(Error::AllZeroProbability));
}

fn ensemble_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..60).prop_flat_map(|n| {
        (proptest::collection::vec(0.0f64..6.3, n), proptest::collection::vec(0.0f64..5.0, n * n)).prop_map(move |(p, mut d)| {
            for i in 0..n {
                d[i * n + i] = 0.0;
            }
            (p, d)
        })
    })
}

proptest! {
    #[test]
    fn probabilities_are_normalised((phases, dists) in ensemble_strategy()) {
        let n = phases.len();
        let ens = PathEnsemble::new(phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()).unwrap();
        let m = DistanceMatrix::new(n, dists).unwrap();
        if let Ok(r) = path_probabilities(&ens, &m, uniform) {
            prop_assert!((r.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(r.probs.iter().all(|&p| p >= 0.0));
            prop_assert!(r.denom.iter().all(|&d| d >= 1.0));
        }
    }

    #[test]
    fn global_phase_is_invisible((phases, dists) in ensemble_strategy(), phase in 0.0f64..6.3) {
        let n = phases.len();
        let ens = PathEnsemble::new(phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()).unwrap();
        let turned = ens.rephased(Complex64::from_polar(1.0, phase)).unwrap();
        let m = DistanceMatrix::new(n, dists).unwrap();
        if let (Ok(a), Ok(b)) = (path_probabilities(&ens, &m, uniform), path_probabilities(&turned, &m, uniform)) {
            for (x, y) in a.probs.iter().zip(&b.probs) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn large_step_ensembles_stay_normalised() {
    let ens = build_m1(&M1Spec { n: 4999, m: 2001, k: 300 }).unwrap();
    let r = path_probabilities(&ens, &StepIndexDistance::new(40), uniform).unwrap();
    assert!((r.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}
