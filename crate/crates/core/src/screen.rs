//! A particle detected on a screen: composite paths
//! `(particle ⊗ screen) ⊕ post-absorption screen`, one particle family per
//! impact point, with max-rule composition over the step distance.
//!
//! Two evaluation routes are provided. [`ScreenEvaluator`] never builds the
//! composite ensemble: under the max rule the composite weight is the minimum
//! of the component weights, and a minimum of step weights splits into a sum
//! over weight levels of products of per-component window sums. The
//! materialised route ([`build_screen_model`], [`evaluate_materialised`])
//! goes through the generic composition and engine code and is only
//! practical for small models.

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::composition::{composite_distance_by, CompositionRule};
use crate::distance::{step_distance_with, weight, StepConvention};
use crate::engine::{final_state_probabilities, uniform, CrossEndpoint, DistanceMatrix};
use crate::error::{Error, Result};
use crate::path::{compose, CompositeKind, CompositePath, IndexedPath, PathEnsemble, PathNode};
use crate::toy::{build_m1, build_m3, M1Spec, M3Spec, Premises, Region};

/// Upper bound on the number of composite paths in one model.
pub const MAX_COMPOSITE_PATHS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfterAbsorption {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    /// First index of the block for each impact point.
    #[serde(rename = "M")]
    pub anchors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenSpec {
    /// Particle paths ending at each impact point.
    pub endpoints: Vec<M3Spec>,
    /// Screen paths up to the impact time.
    pub before: M1Spec,
    pub after: AfterAbsorption,
    #[serde(rename = "D")]
    pub d: usize,
    /// Distance between particle paths ending at different impact points.
    /// `None` means `+inf`.
    #[serde(default)]
    pub cross_distance: Option<f64>,
    /// Require impact blocks to be separated by more than `2D+1`.
    #[serde(default = "yes")]
    pub enforce_ordering: bool,
    #[serde(default)]
    pub convention: StepConvention,
}

fn yes() -> bool {
    true
}

fn violation(msg: impl Into<String>) -> Error {
    Error::SpecViolation(msg.into())
}

impl ScreenSpec {
    pub fn validate(&self) -> Result<()> {
        let l = self.endpoints.len();
        if l == 0 {
            return Err(violation("at least one impact point is required"));
        }
        if self.after.anchors.len() != l {
            return Err(violation(format!("{} impact anchors for {l} impact points", self.after.anchors.len())));
        }
        if self.d == 0 {
            return Err(violation("D must be positive"));
        }
        if let Some(c) = self.cross_distance {
            if c.is_nan() || c < 0.0 {
                return Err(violation(format!("cross distance {c} must be non-negative")));
            }
        }
        for e in &self.endpoints {
            e.validate()?;
        }
        self.before.validate(&Premises::default())?;
        for &m in &self.after.anchors {
            M1Spec { n: self.after.n, m, k: self.after.k }
                .validate(&Premises::default())
                .map_err(|e| violation(format!("post-absorption block at {m}: {e}")))?;
        }
        if self.enforce_ordering {
            let (d, k) = (self.d, self.after.k);
            let a = &self.after.anchors;
            if 2 * d + 1 >= a[0] {
                return Err(violation(format!("2D+1 < M''_1 fails: {} >= {}", 2 * d + 1, a[0])));
            }
            for j in 1..l {
                if a[j] <= a[j - 1] + k + 2 * d + 1 {
                    return Err(violation(format!("M''_{} > M''_{} + K'' + 2D + 1 fails", j + 1, j)));
                }
            }
            if a[l - 1] + k + 2 * d + 1 >= self.after.n {
                return Err(violation("M''_l + K'' + 2D + 1 < N'' fails"));
            }
        }
        let paths = self.path_count();
        if paths > MAX_COMPOSITE_PATHS {
            return Err(Error::ModelTooLarge { paths, limit: MAX_COMPOSITE_PATHS });
        }
        Ok(())
    }

    /// Total number of composite paths, over all impact points.
    pub fn path_count(&self) -> u64 {
        let per = self.before.n as u64 * self.after.n as u64;
        self.endpoints.iter().map(|e| e.n as u64 * per).sum()
    }

    /// `|sum_k (K_k + 1) exp(-i theta_k)|^2` for each impact point, with
    /// rounding residue of fully destructive sums snapped to 0.
    pub fn quantum_weights(&self) -> Vec<f64> {
        self.endpoints
            .iter()
            .map(|e| {
                let scale: f64 = e.regions.iter().map(|r| (r.k + 1) as f64).sum();
                let w = e.quantum_amplitude().norm_sqr();
                if w <= 1e-24 * scale * scale {
                    0.0
                } else {
                    w
                }
            })
            .collect()
    }

    /// Smallest valid layout: each impact point's beams `(K, theta)` sit in
    /// one run of adjacent blocks, and every block is just over `2D+1` from
    /// the list ends and from the other impact blocks.
    pub fn compact(beams: &[Vec<(usize, f64)>], d: usize, k_before: usize, k_after: usize) -> Self {
        let lead = 2 * d + 3;
        let endpoints = beams
            .iter()
            .map(|b| {
                let mut m = lead;
                let mut regions = Vec::new();
                for &(k, theta) in b {
                    regions.push(Region::new(m, k, theta));
                    m += k + 1;
                }
                M3Spec { n: m - 1 + 2 * d + 4, regions }
            })
            .collect();
        let before = M1Spec { n: lead + k_before + 2 * d + 4, m: lead, k: k_before };
        let spacing = k_after + 2 * d + 2 + k_after % 2;
        let anchors: Vec<usize> = (0..beams.len()).map(|j| lead + j * spacing).collect();
        let n = anchors[anchors.len() - 1] + k_after + 2 * d + 4;
        ScreenSpec {
            endpoints,
            before,
            after: AfterAbsorption { n, k: k_after, anchors },
            d,
            cross_distance: None,
            enforce_ordering: true,
            convention: StepConvention::Corrected,
        }
    }

    /// Smallest block parameter among the particle beams.
    pub fn min_beam_k(&self) -> usize {
        self.endpoints.iter().flat_map(|e| e.regions.iter().map(|r| r.k)).min().unwrap_or(0)
    }

    fn after_ensemble(&self, j: usize) -> Result<PathEnsemble> {
        build_m1(&M1Spec { n: self.after.n, m: self.after.anchors[j], k: self.after.k })
    }

    fn cross_weight(&self) -> f64 {
        self.cross_distance.map_or(0.0, weight)
    }

    fn edge_weight(&self) -> f64 {
        weight(step_distance_with(0, self.d, self.d, self.convention))
    }
}

/// Prefix sums over one indexed family for fast window sums.
struct Family {
    amps: Vec<Complex64>,
    prefix: Vec<Complex64>,
}

impl Family {
    fn new(amps: &[Complex64]) -> Self {
        let mut prefix = Vec::with_capacity(amps.len() + 1);
        let mut acc = Complex64::new(0.0, 0.0);
        prefix.push(acc);
        for a in amps {
            acc += a;
            prefix.push(acc);
        }
        Self { amps: amps.to_vec(), prefix }
    }

    fn len(&self) -> usize {
        self.amps.len()
    }

    fn total(&self) -> Complex64 {
        self.prefix[self.len()]
    }

    /// Amplitude sum and count over 0-based `j` with `|i - j| < d`.
    fn inner(&self, i: usize, d: usize) -> (Complex64, f64) {
        let lo = (i + 1).saturating_sub(d);
        let hi = (i + d).min(self.len());
        (self.prefix[hi] - self.prefix[lo], (hi - lo) as f64)
    }

    /// Amplitude sum and count over 0-based `j` with `|i - j| = d`.
    fn edge(&self, i: usize, d: usize) -> (Complex64, f64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut c = 0.0;
        if i >= d {
            s += self.amps[i - d];
            c += 1.0;
        }
        if i + d < self.len() {
            s += self.amps[i + d];
            c += 1.0;
        }
        (s, c)
    }
}

/// Sum and count over the indices whose step weight is at least `level`.
fn level_sum(f: &Family, i: usize, d: usize, level: f64, edge_w: f64) -> (Complex64, f64) {
    let mut s = Complex64::new(0.0, 0.0);
    let mut c = 0.0;
    if 1.0 >= level {
        let (a, n) = f.inner(i, d);
        s += a;
        c += n;
    }
    if edge_w >= level {
        let (a, n) = f.edge(i, d);
        s += a;
        c += n;
    }
    (s, c)
}

/// Per-impact-point totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenResult {
    pub endpoints: Vec<String>,
    /// Unnormalised detection weights.
    pub weights: Vec<f64>,
    /// `Prob(A -> B_j)`.
    pub probs: Vec<f64>,
    /// Pure-interference prediction `|sum_k (K_k + 1) exp(-i theta_k)|^2`.
    pub quantum: Vec<f64>,
    pub paths: u64,
}

/// Lazy evaluator over index quadruples `(j, i, k, m)`, all 0-based.
pub struct ScreenEvaluator {
    spec: ScreenSpec,
    particles: Vec<Family>,
    before: Family,
    after: Vec<Family>,
    levels: Vec<f64>,
    edge_w: f64,
    cross_w: f64,
}

impl ScreenEvaluator {
    pub fn new(spec: &ScreenSpec) -> Result<Self> {
        spec.validate()?;
        let particles = spec
            .endpoints
            .iter()
            .map(|e| build_m3(e).map(|p| Family::new(p.amplitudes())))
            .collect::<Result<Vec<_>>>()?;
        let before = Family::new(build_m1(&spec.before)?.amplitudes());
        let after = (0..spec.endpoints.len())
            .map(|j| spec.after_ensemble(j).map(|p| Family::new(p.amplitudes())))
            .collect::<Result<Vec<_>>>()?;
        let edge_w = spec.edge_weight();
        let cross_w = spec.cross_weight();
        let mut levels: Vec<f64> = [1.0, edge_w, cross_w].into_iter().filter(|w| *w > 0.0).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        Ok(Self { spec: spec.clone(), particles, before, after, levels, edge_w, cross_w })
    }

    pub fn spec(&self) -> &ScreenSpec {
        &self.spec
    }

    /// Smeared amplitude and smearing volume of one composite path.
    pub fn terms(&self, j: usize, i: usize, k: usize, m: usize) -> (Complex64, f64) {
        let d = self.spec.d;
        let mut smeared = Complex64::new(0.0, 0.0);
        let mut volume = 0.0;
        let mut below = 0.0;
        for &level in &self.levels {
            let step = level - below;
            below = level;
            let (bs, bc) = level_sum(&self.before, k, d, level, self.edge_w);
            if bc == 0.0 {
                continue;
            }
            let (cs, cc) = level_sum(&self.after[j], m, d, level, self.edge_w);
            let (ps, pc) = level_sum(&self.particles[j], i, d, level, self.edge_w);
            let mut amp = ps * cs;
            let mut count = pc * cc;
            if self.cross_w >= level {
                for (jj, fam) in self.particles.iter().enumerate() {
                    if jj != j {
                        let (cs2, _) = level_sum(&self.after[jj], m, d, level, self.edge_w);
                        amp += fam.total() * cs2;
                        count += fam.len() as f64 * cc;
                    }
                }
            }
            smeared += amp * bs * step;
            volume += count * bc * step;
        }
        (smeared, volume)
    }

    /// Unnormalised probability of one composite path.
    pub fn value(&self, j: usize, i: usize, k: usize, m: usize) -> f64 {
        let (s, v) = self.terms(j, i, k, m);
        if v > 0.0 {
            s.norm_sqr() / v
        } else {
            0.0
        }
    }

    /// Detection weights and probabilities for every impact point.
    pub fn evaluate(&self) -> Result<ScreenResult> {
        let (nb, na) = (self.before.len(), self.spec.after.n);
        let rows: Vec<(usize, usize)> =
            self.particles.iter().enumerate().flat_map(|(j, f)| (0..f.len()).map(move |i| (j, i))).collect();
        let sums: Vec<f64> = rows
            .par_iter()
            .map(|&(j, i)| {
                let mut acc = 0.0;
                for k in 0..nb {
                    for m in 0..na {
                        acc += self.value(j, i, k, m);
                    }
                }
                acc
            })
            .collect();
        let mut weights = vec![0.0; self.particles.len()];
        for (&(j, _), s) in rows.iter().zip(&sums) {
            weights[j] += s;
        }
        finish(&self.spec, weights)
    }
}

fn finish(spec: &ScreenSpec, weights: Vec<f64>) -> Result<ScreenResult> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::AllZeroProbability);
    }
    Ok(ScreenResult {
        endpoints: endpoint_names(spec.endpoints.len()),
        probs: weights.iter().map(|w| w / total).collect(),
        weights,
        quantum: spec.quantum_weights(),
        paths: spec.path_count(),
    })
}

fn endpoint_names(l: usize) -> Vec<String> {
    (1..=l).map(|j| format!("B{j}")).collect()
}

/// Evaluates a screen model without building its composite ensemble.
pub fn evaluate_screen(spec: &ScreenSpec) -> Result<ScreenResult> {
    ScreenEvaluator::new(spec)?.evaluate()
}

const PARTICLE_BASE: u32 = 2;
const BEFORE: u32 = 0;
const AFTER: u32 = 1;

/// A materialised screen model.
#[derive(Debug, Clone)]
pub struct ScreenModel {
    pub paths: Vec<CompositePath>,
    /// One ensemble per impact point, composite amplitudes in path order.
    pub groups: Vec<PathEnsemble>,
    pub ranges: Vec<Range<usize>>,
    /// `(j, i, k, m)` of each path, 0-based.
    pub labels: Vec<(usize, usize, usize, usize)>,
}

/// Builds every composite path explicitly.
pub fn build_screen_model(spec: &ScreenSpec) -> Result<ScreenModel> {
    spec.validate()?;
    let before = build_m1(&spec.before)?;
    let mut model = ScreenModel { paths: Vec::new(), groups: Vec::new(), ranges: Vec::new(), labels: Vec::new() };
    for (j, e) in spec.endpoints.iter().enumerate() {
        let particle = build_m3(e)?;
        let after = spec.after_ensemble(j)?;
        let start = model.paths.len();
        let mut amps = Vec::new();
        for i in 0..e.n {
            for k in 0..spec.before.n {
                let head = compose(
                    CompositeKind::Product,
                    vec![
                        IndexedPath { family: PARTICLE_BASE + j as u32, index: i + 1, span: (0.0, 1.0) }.into(),
                        IndexedPath { family: BEFORE, index: k + 1, span: (0.0, 1.0) }.into(),
                    ],
                )?;
                for m in 0..spec.after.n {
                    let tail = IndexedPath { family: AFTER, index: m + 1, span: (1.0, 2.0) };
                    model.paths.push(compose(CompositeKind::Sequence, vec![head.clone().into(), tail.into()])?);
                    model.labels.push((j, i, k, m));
                    amps.push(particle.amplitudes()[i] * before.amplitudes()[k] * after.amplitudes()[m]);
                }
            }
        }
        model.ranges.push(start..model.paths.len());
        model.groups.push(PathEnsemble::with_endpoint(amps, format!("B{}", j + 1))?);
    }
    Ok(model)
}

/// Evaluates a materialised model through the generic composite distance and
/// the probability engine. Returns the result and the per-path values.
pub fn evaluate_materialised(spec: &ScreenSpec, model: &ScreenModel) -> Result<(ScreenResult, Vec<f64>)> {
    let rule = CompositionRule::max();
    let cross = spec.cross_distance.unwrap_or(f64::INFINITY);
    let mut leaf = |a: &PathNode, b: &PathNode| -> Result<f64> {
        match (a, b) {
            (PathNode::Indexed(p), PathNode::Indexed(q)) => {
                if p.family == q.family {
                    Ok(step_distance_with(p.index, q.index, spec.d, spec.convention))
                } else if p.family >= PARTICLE_BASE && q.family >= PARTICLE_BASE {
                    Ok(cross)
                } else {
                    Ok(f64::INFINITY)
                }
            }
            _ => Err(Error::StructureMismatch("screen models use indexed leaves".into())),
        }
    };
    let nodes: Vec<PathNode> = model.paths.iter().cloned().map(PathNode::Composite).collect();
    let n = nodes.len();
    let mut values = Vec::with_capacity(n * n);
    for p in &nodes {
        for q in &nodes {
            values.push(composite_distance_by(p, q, &rule, &mut leaf)?);
        }
    }
    let dist = DistanceMatrix::new(n, values)?;
    let fs = final_state_probabilities(&model.groups, &dist, uniform, CrossEndpoint::AllPairs)?;
    let weights = fs.groups.iter().map(|r| fs.paths.unnormalized[r.clone()].iter().sum()).collect();
    Ok((finish(spec, weights)?, fs.paths.unnormalized))
}

/// One detection ratio between impact points `j` and `k` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionRatio {
    pub j: usize,
    pub k: usize,
    /// `Prob(A -> B_j) / Prob(A -> B_k)`; `+inf` when the denominator is 0.
    pub direct: f64,
    pub quantum: f64,
    /// `|direct - quantum| / quantum`, or `|direct|` when `quantum = 0`.
    pub rel_err: f64,
    pub zero_denominator: bool,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// Ratios for every ordered pair of distinct impact points.
pub fn detection_ratios(result: &ScreenResult) -> Vec<DetectionRatio> {
    let l = result.probs.len();
    let mut out = Vec::new();
    for j in 0..l {
        for k in 0..l {
            if j == k {
                continue;
            }
            let direct = ratio(result.probs[j], result.probs[k]);
            let quantum = ratio(result.quantum[j], result.quantum[k]);
            let rel_err = if quantum == 0.0 { direct.abs() } else { (direct - quantum).abs() / quantum };
            out.push(DetectionRatio { j: j + 1, k: k + 1, direct, quantum, rel_err, zero_denominator: result.probs[k] == 0.0 });
        }
    }
    out
}
