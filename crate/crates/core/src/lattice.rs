//! Exhaustive free-particle path sums on a 1+1D lattice with unit spacing
//! and `dt = 1`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{galilean_distance, DistanceSpec};
use crate::engine::{final_state_probabilities, path_probabilities, CrossEndpoint, PathDistribution};
use crate::error::{Error, Result};
use crate::path::{amplitude_from_action, free_action, PathEnsemble, SpacetimePath};

/// Upper bound on `(2h+1)^(T-1)` accepted by [`enumerate_paths`].
pub const MAX_ENUMERATED_PATHS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    #[serde(rename = "T")]
    pub steps: usize,
    /// Sites run over `-X..=X`.
    #[serde(rename = "X")]
    pub extent: i64,
    pub start: i64,
    pub end: i64,
    pub mass: f64,
    /// Largest allowed `|dx|` per step.
    pub hop: i64,
}

impl LatticeSpec {
    fn check_shape(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::SpecViolation("lattice needs T >= 1".into()));
        }
        if self.extent < 0 || self.hop < 0 {
            return Err(Error::SpecViolation("extent and hop must be non-negative".into()));
        }
        if self.start.abs() > self.extent || self.end.abs() > self.extent {
            return Err(Error::SpecViolation(format!(
                "start {} and end {} must lie within -{}..={}",
                self.start, self.end, self.extent, self.extent
            )));
        }
        if !(self.mass.is_finite() && self.mass >= 0.0) {
            return Err(Error::SpecViolation(format!("mass {} must be finite and non-negative", self.mass)));
        }
        if (self.end - self.start).unsigned_abs() > self.hop.unsigned_abs() * self.steps as u64 {
            return Err(Error::NoPaths);
        }
        Ok(())
    }

    /// `(2h+1)^(T-1)`, saturating.
    pub fn enumeration_bound(&self) -> u64 {
        let base = 2 * self.hop.max(0) as u64 + 1;
        (1..self.steps).fold(1u64, |acc, _| acc.saturating_mul(base))
    }

    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        let bound = self.enumeration_bound();
        if bound > MAX_ENUMERATED_PATHS {
            return Err(Error::TooManyPaths { bound, limit: MAX_ENUMERATED_PATHS });
        }
        Ok(())
    }

    fn sites(&self) -> std::ops::RangeInclusive<i64> {
        -self.extent..=self.extent
    }
}

/// Enumerated lattice paths: site sequences, their polylines and the
/// `exp(-iS)` ensemble, all in depth-first order.
#[derive(Debug, Clone)]
pub struct LatticeEnsemble {
    pub sites: Vec<Vec<i64>>,
    pub paths: Vec<SpacetimePath>,
    pub ensemble: PathEnsemble,
}

impl LatticeEnsemble {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

fn site_sequences(spec: &LatticeSpec) -> Vec<Vec<i64>> {
    fn walk(spec: &LatticeSpec, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let x = *current.last().unwrap();
        let remaining = spec.steps - (current.len() - 1);
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for dx in -spec.hop..=spec.hop {
            let next = x + dx;
            if next.abs() > spec.extent {
                continue;
            }
            if (spec.end - next).abs() > spec.hop * (remaining as i64 - 1) {
                continue;
            }
            current.push(next);
            walk(spec, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    walk(spec, &mut vec![spec.start], &mut out);
    out
}

pub fn enumerate_paths(spec: &LatticeSpec) -> Result<LatticeEnsemble> {
    spec.validate()?;
    let sites = site_sequences(spec);
    if sites.is_empty() {
        return Err(Error::NoPaths);
    }
    let paths = sites
        .iter()
        .map(|s| {
            let points: Vec<(f64, f64)> = s.iter().enumerate().map(|(t, &x)| (x as f64, t as f64)).collect();
            SpacetimePath::from_xt(&points, spec.mass)
        })
        .collect::<Result<Vec<_>>>()?;
    let amps = paths.iter().map(|p| free_action(p, spec.mass).map(amplitude_from_action)).collect::<Result<Vec<_>>>()?;
    let ensemble = PathEnsemble::with_endpoint(amps, format!("x={}", spec.end))?;
    Ok(LatticeEnsemble { sites, paths, ensemble })
}

/// `Σ_P exp(-iS(P))` by stepping a site vector through the one-step kernel.
pub fn transfer_amplitude(spec: &LatticeSpec) -> Result<Complex64> {
    spec.check_shape()?;
    let width = (2 * spec.extent + 1) as usize;
    let index = |x: i64| (x + spec.extent) as usize;
    let kernel: Vec<Complex64> =
        (0..=spec.hop).map(|dx| amplitude_from_action(spec.mass * (dx * dx) as f64 / 2.0)).collect();
    let mut psi = vec![Complex64::new(0.0, 0.0); width];
    psi[index(spec.start)] = Complex64::new(1.0, 0.0);
    for _ in 0..spec.steps {
        let mut next = vec![Complex64::new(0.0, 0.0); width];
        for x in spec.sites() {
            let a = psi[index(x)];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for dx in -spec.hop..=spec.hop {
                let y = x + dx;
                if y.abs() <= spec.extent {
                    next[index(y)] += a * kernel[dx.unsigned_abs() as usize];
                }
            }
        }
        psi = next;
    }
    let total = psi[index(spec.end)];
    if total == Complex64::new(0.0, 0.0) && site_sequences(spec).is_empty() {
        return Err(Error::NoPaths);
    }
    Ok(total)
}

/// Weight functions on lattice site sequences.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LatticeWeight {
    #[default]
    Uniform,
    /// 0 when any `|dx_{k+1} - dx_k|` exceeds `max_change`.
    CurvatureCutoff { max_change: i64 },
    /// 1 when every interior site satisfies `x >= offset` or every one
    /// satisfies `x <= -offset`, else 0.
    TwoArm { offset: i64 },
}

impl LatticeWeight {
    pub fn eval(&self, sites: &[i64]) -> f64 {
        let keep = match *self {
            LatticeWeight::Uniform => true,
            LatticeWeight::CurvatureCutoff { max_change } => {
                sites.windows(3).all(|w| ((w[2] - w[1]) - (w[1] - w[0])).abs() <= max_change)
            }
            LatticeWeight::TwoArm { offset } => arm_of(sites, offset).is_some(),
        };
        if keep {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Left,
    Right,
}

/// The corridor holding every interior site of the path, if any.
pub fn arm_of(sites: &[i64], offset: i64) -> Option<Arm> {
    let interior = &sites[1..sites.len().saturating_sub(1).max(1)];
    if interior.is_empty() {
        return None;
    }
    if interior.iter().all(|&x| x >= offset) {
        Some(Arm::Right)
    } else if interior.iter().all(|&x| x <= -offset) {
        Some(Arm::Left)
    } else {
        None
    }
}

/// Row-major matrix of Galilean distances, rows evaluated in parallel.
pub fn distance_values(paths: &[SpacetimePath], d: &DistanceSpec) -> Result<Vec<f64>> {
    let n = paths.len();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| galilean_distance(&paths[i], &paths[j], d)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.concat())
}

pub fn run_lattice_experiment(spec: &LatticeSpec, d: &DistanceSpec, w: &LatticeWeight) -> Result<PathDistribution> {
    let lat = enumerate_paths(spec)?;
    let n = lat.len();
    let values = distance_values(&lat.paths, d)?;
    let weights: Vec<f64> = lat.sites.iter().map(|s| w.eval(s)).collect();
    path_probabilities(&lat.ensemble, &|i: usize, j: usize| values[i * n + j], |i| weights[i])
}

/// Outcome of the two-arm experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoArmResult {
    /// Final-state probability of the in-phase port.
    pub p_plus: f64,
    /// Final-state probability of the port where the right arm is flipped.
    pub p_minus: f64,
    pub visibility: f64,
}

/// Two output ports fed by the same lattice paths: the `+` port adds the
/// arms, the `-` port flips the sign of every path whose middle site is to
/// the right of `x = 0`. Corridors are enforced by [`LatticeWeight::TwoArm`],
/// so off-corridor paths carry amplitude but are never realised.
pub fn two_arm_experiment(spec: &LatticeSpec, d: &DistanceSpec, offset: i64) -> Result<TwoArmResult> {
    let mut base = *d;
    base.scale = None;
    Ok(two_arm_scale_sweep(spec, &base, &[d.scale()], offset)?[0])
}

/// [`two_arm_experiment`] at each distance scale, sharing one distance matrix.
pub fn two_arm_scale_sweep(spec: &LatticeSpec, d: &DistanceSpec, scales: &[f64], offset: i64) -> Result<Vec<TwoArmResult>> {
    if offset < 1 {
        return Err(Error::SpecViolation("corridor offset must be at least 1".into()));
    }
    let lat = enumerate_paths(spec)?;
    if !lat.sites.iter().any(|s| arm_of(s, offset) == Some(Arm::Left))
        || !lat.sites.iter().any(|s| arm_of(s, offset) == Some(Arm::Right))
    {
        return Err(Error::SpecViolation("both corridors need at least one path".into()));
    }
    let n = lat.len();
    let values = distance_values(&lat.paths, d)?;
    let mid = spec.steps / 2;
    let flipped: Vec<Complex64> = lat
        .sites
        .iter()
        .zip(lat.ensemble.amplitudes())
        .map(|(s, a)| if s[mid] > 0 { -a } else { *a })
        .collect();
    let plus = PathEnsemble::with_endpoint(lat.ensemble.amplitudes().to_vec(), "+")?;
    let minus = PathEnsemble::with_endpoint(flipped, "-")?;
    let weights: Vec<f64> = lat.sites.iter().map(|s| LatticeWeight::TwoArm { offset }.eval(s)).collect();
    let groups = [plus, minus];
    scales
        .iter()
        .map(|&scale| {
            let scaled = DistanceSpec { scale: Some(scale), ..*d };
            scaled.validate()?;
            let fs = final_state_probabilities(
                &groups,
                &|i: usize, j: usize| scale_distance(values[(i % n) * n + j % n], scale),
                |i| weights[i % n],
                CrossEndpoint::SameEndpointOnly,
            )?;
            let (p_plus, p_minus) = (fs.probs[0], fs.probs[1]);
            Ok(TwoArmResult { p_plus, p_minus, visibility: (p_plus - p_minus).abs() / (p_plus + p_minus) })
        })
        .collect()
}

fn scale_distance(d: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        d * scale
    }
}
