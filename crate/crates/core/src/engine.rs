//! The path probability postulate.
//!
//! For every path `P` of an ensemble the engine forms the distance-smeared
//! amplitude `sum_Q A(Q) exp(-d(P,Q))` and the smearing volume
//! `sum_Q exp(-d(P,Q))`, with `Q` ranging over the whole ensemble including
//! `P`. The probability of `P` is `C w(P) |smeared|^2 / volume` with `C`
//! fixed by normalisation.
//!
//! Target paths are evaluated in parallel; each path's sums run in index
//! order so results are reproducible bit for bit.

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{step_distance_with, weight, StepConvention};
use crate::error::{Error, Result};
use crate::path::PathEnsemble;

/// A distance evaluator over 0-based ensemble indices.
pub trait PairDistance: Sync {
    fn distance(&self, i: usize, j: usize) -> f64;

    /// If `Some(b)`, the distance is `+inf` whenever `|i - j| > b`.
    fn band(&self) -> Option<usize> {
        None
    }
}

impl<F> PairDistance for F
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    fn distance(&self, i: usize, j: usize) -> f64 {
        self(i, j)
    }
}

/// Step distance on ensemble indices, evaluated on its band only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepIndexDistance {
    pub window: usize,
    pub convention: StepConvention,
}

impl StepIndexDistance {
    pub fn new(window: usize) -> Self {
        Self { window, convention: StepConvention::Corrected }
    }
}

impl PairDistance for StepIndexDistance {
    fn distance(&self, i: usize, j: usize) -> f64 {
        step_distance_with(i, j, self.window, self.convention)
    }

    fn band(&self) -> Option<usize> {
        Some(self.window)
    }
}

/// Row-major dense distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidDistance(format!("{} entries for a {n}x{n} matrix", values.len())));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(i, j));
            }
        }
        Self { n, values }
    }
}

impl PairDistance for DistanceMatrix {
    fn distance(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// `d = 0` for every pair: the standard path integral limit.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroDistance;

impl PairDistance for ZeroDistance {
    fn distance(&self, _: usize, _: usize) -> f64 {
        0.0
    }
}

/// `d = 0` on the diagonal and `+inf` elsewhere: the naive `|A|^2` rule.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiagonalDistance;

impl PairDistance for DiagonalDistance {
    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn band(&self) -> Option<usize> {
        Some(0)
    }
}

/// The uniform weight function `w = 1`.
pub fn uniform(_: usize) -> f64 {
    1.0
}

/// Per-path probabilities and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDistribution {
    pub probs: Vec<f64>,
    pub norm_constant: f64,
    pub smeared: Vec<Complex64>,
    pub denom: Vec<f64>,
    /// `w(P) |smeared|^2 / denom` before normalisation.
    pub unnormalized: Vec<f64>,
}

impl PathDistribution {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Sum of the unnormalised values, i.e. `1 / C`.
    pub fn unnormalized_total(&self) -> f64 {
        self.unnormalized.iter().sum()
    }

    /// 1-based indices of the `k` most probable paths, ties by index.
    pub fn top_indices(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.probs.len()).collect();
        idx.sort_by(|&a, &b| self.probs[b].total_cmp(&self.probs[a]).then(a.cmp(&b)));
        idx.into_iter().take(k).map(|i| i + 1).collect()
    }
}

struct PathTerms {
    smeared: Complex64,
    denom: f64,
    unnormalized: f64,
}

fn path_terms<D, W>(amps: &[Complex64], i: usize, range: Range<usize>, distance: &D, w: &W) -> Result<PathTerms>
where
    D: PairDistance + ?Sized,
    W: Fn(usize) -> f64 + Sync,
{
    let mut smeared = Complex64::new(0.0, 0.0);
    let mut denom = 0.0;
    for j in range {
        let wt = weight(distance.distance(i, j));
        smeared += amps[j] * wt;
        denom += wt;
    }
    let wi = w(i);
    if !(wi >= 0.0 && wi.is_finite()) {
        return Err(Error::InvalidDistance(format!("weight {wi} at index {} is not a finite non-negative", i + 1)));
    }
    let unnormalized = if wi == 0.0 {
        0.0
    } else if denom > 0.0 {
        wi * smeared.norm_sqr() / denom
    } else {
        return Err(Error::InvalidDistance(format!("path {} has an empty neighbourhood", i + 1)));
    };
    Ok(PathTerms { smeared, denom, unnormalized })
}

fn normalise(terms: Vec<PathTerms>) -> Result<PathDistribution> {
    let total: f64 = terms.iter().map(|t| t.unnormalized).sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::AllZeroProbability);
    }
    let norm_constant = 1.0 / total;
    let mut out = PathDistribution {
        probs: Vec::with_capacity(terms.len()),
        norm_constant,
        smeared: Vec::with_capacity(terms.len()),
        denom: Vec::with_capacity(terms.len()),
        unnormalized: Vec::with_capacity(terms.len()),
    };
    for t in terms {
        out.probs.push(t.unnormalized * norm_constant);
        out.smeared.push(t.smeared);
        out.denom.push(t.denom);
        out.unnormalized.push(t.unnormalized);
    }
    Ok(out)
}

fn neighbourhood(i: usize, within: Range<usize>, band: Option<usize>) -> Range<usize> {
    match band {
        Some(b) => within.start.max(i.saturating_sub(b))..within.end.min(i + b + 1),
        None => within,
    }
}

/// Per-path probabilities over one ensemble, conditioned on its endpoints.
///
/// `w` is the weight function on 0-based indices; pass [`uniform`] for the
/// unweighted postulate.
pub fn path_probabilities<D, W>(ensemble: &PathEnsemble, distance: &D, w: W) -> Result<PathDistribution>
where
    D: PairDistance + ?Sized,
    W: Fn(usize) -> f64 + Sync,
{
    let amps = ensemble.amplitudes();
    let n = amps.len();
    let band = distance.band();
    let terms = (0..n)
        .into_par_iter()
        .map(|i| path_terms(amps, i, neighbourhood(i, 0..n, band), distance, &w))
        .collect::<Result<Vec<_>>>()?;
    normalise(terms)
}

/// Whether smeared sums for final-state probabilities cross endpoint groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossEndpoint {
    /// `Q` ranges over paths with the same endpoints as `P`.
    #[default]
    SameEndpointOnly,
    /// `Q` ranges over the union, using the supplied distance across groups.
    AllPairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalStateDistribution {
    pub endpoints: Vec<String>,
    /// `Prob(B_j | A)`, summing to 1 over the listed endpoints.
    pub probs: Vec<f64>,
    /// Per-path distribution over the union, in group order.
    pub paths: PathDistribution,
    /// Half-open ranges of union indices for each group.
    pub groups: Vec<Range<usize>>,
}

/// Final-state probabilities over a discrete endpoint basis with a uniform
/// measure. `distance` and `w` act on union indices (groups concatenated in
/// order).
pub fn final_state_probabilities<D, W>(
    groups: &[PathEnsemble],
    distance: &D,
    w: W,
    cross: CrossEndpoint,
) -> Result<FinalStateDistribution>
where
    D: PairDistance + ?Sized,
    W: Fn(usize) -> f64 + Sync,
{
    if groups.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut ranges = Vec::with_capacity(groups.len());
    let mut amps = Vec::new();
    for g in groups {
        let start = amps.len();
        amps.extend_from_slice(g.amplitudes());
        ranges.push(start..amps.len());
    }
    let n = amps.len();
    let band = distance.band();
    let owner: Vec<usize> = ranges.iter().enumerate().flat_map(|(g, r)| std::iter::repeat(g).take(r.len())).collect();
    let terms = (0..n)
        .into_par_iter()
        .map(|i| {
            let within = match cross {
                CrossEndpoint::SameEndpointOnly => ranges[owner[i]].clone(),
                CrossEndpoint::AllPairs => 0..n,
            };
            path_terms(&amps, i, neighbourhood(i, within, band), distance, &w)
        })
        .collect::<Result<Vec<_>>>()?;
    let paths = normalise(terms)?;
    let probs = ranges.iter().map(|r| paths.probs[r.clone()].iter().sum()).collect();
    Ok(FinalStateDistribution {
        endpoints: groups.iter().map(|g| g.endpoint().to_string()).collect(),
        probs,
        paths,
        groups: ranges,
    })
}

/// `(max - min) / (max + min)` over detection weights of several settings.
pub fn visibility(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max + min > 0.0) {
        return 0.0;
    }
    (max - min) / (max + min)
}
