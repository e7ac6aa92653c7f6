use std::f64::consts::PI;

use realpath::error::Error;
use realpath::screen::*;

fn rel_tolerance(spec: &ScreenSpec) -> f64 {
    3.0 / (spec.min_beam_k() + 1) as f64
}

#[test]
fn unequal_single_beams_follow_beam_strengths() {
    let spec = ScreenSpec::compact(&[vec![(4, 0.0)], vec![(9, 0.0)]], 12, 4, 4);
    let r = evaluate_screen(&spec).unwrap();
    let x = &detection_ratios(&r)[0];
    assert!((x.quantum - 0.25).abs() < 1e-15);
    assert!(x.rel_err <= rel_tolerance(&spec), "{x:?}");
}

#[test]
fn strengths_two_and_four() {
    let spec = ScreenSpec::compact(&[vec![(1, 0.0)], vec![(3, 0.0)]], 8, 1, 1);
    let r = evaluate_screen(&spec).unwrap();
    let x = &detection_ratios(&r)[0];
    assert_eq!(x.quantum, 0.25);
    assert!(x.rel_err <= rel_tolerance(&spec), "{x:?}");
}

#[test]
fn constructive_against_destructive() {
    let spec = ScreenSpec::compact(&[vec![(4, 0.0), (4, 0.0)], vec![(4, 0.0), (4, PI)]], 12, 4, 4);
    let r = evaluate_screen(&spec).unwrap();
    assert_eq!(r.quantum[1], 0.0);
    let back = detection_ratios(&r).into_iter().find(|x| x.j == 2).unwrap();
    assert_eq!(back.quantum, 0.0);
    assert!(back.direct <= rel_tolerance(&spec), "{back:?}");
}

#[test]
fn symmetric_endpoints_have_unit_ratio() {
    let spec = ScreenSpec::compact(&[vec![(3, 0.5), (2, 1.0)], vec![(3, 0.5), (2, 1.0)]], 6, 2, 2);
    let r = evaluate_screen(&spec).unwrap();
    let x = &detection_ratios(&r)[0];
    assert!((x.direct - 1.0).abs() < 1e-12);
}

#[test]
fn doubling_post_absorption_block_keeps_ratios() {
    for beams in [vec![vec![(4, 0.0)], vec![(9, 0.0)]], vec![vec![(4, 0.0), (4, 0.0)], vec![(4, 0.0), (4, PI / 2.0)]]] {
        let a = ScreenSpec::compact(&beams, 12, 4, 4);
        let b = ScreenSpec::compact(&beams, 12, 4, 8);
        let ra = detection_ratios(&evaluate_screen(&a).unwrap())[0].direct;
        let rb = detection_ratios(&evaluate_screen(&b).unwrap())[0].direct;
        assert!(((ra - rb) / ra).abs() <= rel_tolerance(&a), "{ra} vs {rb}");
    }
}

#[test]
fn everything_close_gives_quantum_ratios() {
    let mut spec = ScreenSpec::compact(&[vec![(2, 0.0), (3, 1.0)], vec![(4, 2.0)], vec![(1, 0.0), (1, PI)]], 2, 2, 2);
    let total = spec.endpoints.iter().map(|e| e.n).max().unwrap() + spec.before.n + spec.after.n;
    spec.d = total;
    assert!(spec.validate().is_err());
    spec.enforce_ordering = false;
    let r = evaluate_screen(&spec).unwrap();
    for x in detection_ratios(&r) {
        if x.quantum == 0.0 {
            assert!(x.direct.abs() < 1e-9, "{x:?}");
        } else if x.quantum.is_finite() {
            assert!(x.rel_err < 1e-9, "{x:?}");
        }
    }
}

fn composite_values(spec: &ScreenSpec) -> Vec<((usize, usize, usize, usize), f64)> {
    let ev = ScreenEvaluator::new(spec).unwrap();
    let mut values = Vec::new();
    for (j, e) in spec.endpoints.iter().enumerate() {
        for i in 0..e.n {
            for k in 0..spec.before.n {
                for m in 0..spec.after.n {
                    values.push(((j, i, k, m), ev.value(j, i, k, m)));
                }
            }
        }
    }
    values
}

/// Composite paths away from the list ends whose probability exceeds
/// `1e-9` of the maximum but have some component further than `D` from its
/// block.
fn far_significant_paths(spec: &ScreenSpec) -> Vec<(usize, usize, usize, usize)> {
    let d = spec.d;
    let values = composite_values(spec);
    let max = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let near = |idx: usize, lo: usize, hi: usize| idx + d >= lo && idx <= hi + d;
    // Windows touching either list end carry boundary artefacts.
    let interior = |idx: usize, n: usize| idx > d && idx + d + 1 < n;
    let mut out = Vec::new();
    for ((j, i, k, m), v) in values {
        let e = &spec.endpoints[j];
        let (lo, hi) = e.block_span();
        let a = spec.after.anchors[j];
        if !(interior(i, e.n) && interior(k, spec.before.n) && interior(m, spec.after.n)) {
            continue;
        }
        let all_near = near(i + 1, lo, hi)
            && near(k + 1, spec.before.m, spec.before.m + spec.before.k)
            && near(m + 1, a, a + spec.after.k);
        if v > 1e-9 * max && !all_near {
            out.push((j, i, k, m));
        }
    }
    out
}

#[test]
#[ignore = "does not hold for the exact step distance under the max rule; see far_paths_keep_probability_under_the_max_rule"]
fn significant_paths_sit_near_their_blocks() {
    let spec = ScreenSpec::compact(&[vec![(2, 0.0)], vec![(3, 0.0)]], 3, 2, 2);
    assert_eq!(far_significant_paths(&spec), vec![]);
}

#[test]
fn far_paths_keep_probability_under_the_max_rule() {
    // The composite weight is the minimum of the component weights, so a
    // tail path's window edge no longer cancels against its interior once the
    // other components see different edge sums.
    let spec = ScreenSpec::compact(&[vec![(2, 0.0)], vec![(3, 0.0)]], 3, 2, 2);
    let far = far_significant_paths(&spec);
    assert!(!far.is_empty());
    let ev = ScreenEvaluator::new(&spec).unwrap();
    let (j, i, k, m) = far[0];
    assert!(ev.value(j, i, k, m) > 0.0);
}

#[test]
fn million_path_model_is_accepted_and_larger_is_not() {
    let spec = ScreenSpec::compact(&[vec![(9, 0.0), (9, 0.0)], vec![(9, 0.0), (9, PI / 2.0)]], 12, 9, 9);
    assert!(spec.path_count() <= MAX_COMPOSITE_PATHS);
    assert!(evaluate_screen(&spec).is_ok());
    let big = ScreenSpec::compact(&[vec![(9, 0.0)], vec![(9, 0.0)]], 20, 9, 9);
    assert!(matches!(evaluate_screen(&big), Err(Error::ModelTooLarge { .. })));
}
