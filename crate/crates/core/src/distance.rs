//! Path distance functions: the index distances of the toy models and the
//! Galilean geometric family on polyline paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::SpacetimePath;

/// How the step distance treats `|i - j| = D`.
///
/// `Corrected` gives `log 2` so the weight there is exactly 1/2. `LiteralLogHalf`
/// gives `log(1/2)`, a negative distance with weight 2, for comparisons only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepConvention {
    #[default]
    Corrected,
    LiteralLogHalf,
}

/// 0 inside the window, `log 2` on its edge, `+inf` beyond.
pub fn step_distance(i: usize, j: usize, window: usize) -> f64 {
    step_distance_with(i, j, window, StepConvention::Corrected)
}

pub fn step_distance_with(i: usize, j: usize, window: usize, convention: StepConvention) -> f64 {
    let gap = i.abs_diff(j);
    match gap.cmp(&window) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Greater => f64::INFINITY,
        std::cmp::Ordering::Equal => match convention {
            StepConvention::Corrected => std::f64::consts::LN_2,
            StepConvention::LiteralLogHalf => -std::f64::consts::LN_2,
        },
    }
}

/// `exp(|i - j| / D)`, the smooth counterpart of the step distance.
pub fn exp_index_distance(i: usize, j: usize, window: usize) -> f64 {
    (i.abs_diff(j) as f64 / window as f64).exp()
}

/// `exp(-d)`, with `+inf` mapped to exactly 0.
pub fn weight(d: f64) -> f64 {
    if d == f64::INFINITY {
        0.0
    } else {
        (-d).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceName {
    Step,
    ExpIndex,
    MaxSep,
    MassMaxSep,
    L1TimeIntegral,
    L1TimeAverage,
    MassL1,
    L2,
    VelocityL1,
}

impl DistanceName {
    pub fn is_index(self) -> bool {
        matches!(self, DistanceName::Step | DistanceName::ExpIndex)
    }

    pub fn is_mass_weighted(self) -> bool {
        matches!(self, DistanceName::MassMaxSep | DistanceName::MassL1)
    }

    /// The unweighted variant a mass-weighted one scales.
    pub fn unweighted(self) -> DistanceName {
        match self {
            DistanceName::MassMaxSep => DistanceName::MaxSep,
            DistanceName::MassL1 => DistanceName::L1TimeIntegral,
            other => other,
        }
    }
}

/// A named, parameterised distance.
///
/// JSON form: `{"name": "...", "D": k, "mass": m}`; `scale` multiplies the
/// result and defaults to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSpec {
    pub name: DistanceName,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl DistanceSpec {
    pub fn new(name: DistanceName) -> Self {
        Self { name, window: None, mass: None, scale: None }
    }

    pub fn step(window: usize) -> Self {
        Self { window: Some(window), ..Self::new(DistanceName::Step) }
    }

    pub fn exp_index(window: usize) -> Self {
        Self { window: Some(window), ..Self::new(DistanceName::ExpIndex) }
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = Some(mass);
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn scale(&self) -> f64 {
        self.scale.unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_index() {
            match self.window {
                Some(d) if d >= 1 => {}
                _ => return Err(Error::InvalidDistance(format!("{:?} requires a positive integer D", self.name))),
            }
        }
        if let Some(m) = self.mass {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidDistance(format!("mass {m} must be positive")));
            }
        }
        if let Some(s) = self.scale {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidDistance(format!("scale {s} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Index distance between 1-based labels; errors for geometric variants.
    pub fn index_distance(&self, i: usize, j: usize, convention: StepConvention) -> Result<f64> {
        self.validate()?;
        let window = self.window.unwrap_or(1);
        let d = match self.name {
            DistanceName::Step => step_distance_with(i, j, window, convention),
            DistanceName::ExpIndex => exp_index_distance(i, j, window),
            other => return Err(Error::InvalidDistance(format!("{other:?} is not an index distance"))),
        };
        Ok(scaled(d, self.scale()))
    }
}

// 0 * inf is taken as 0: a zero scale switches the distance off entirely.
fn scaled(d: f64, scale: f64) -> f64 {
    if scale == 1.0 {
        d
    } else if scale == 0.0 {
        0.0
    } else {
        d * scale
    }
}

/// Positions of two paths resampled on the union of their event times.
struct CommonGrid {
    times: Vec<f64>,
    gaps: Vec<f64>,
    /// Per-segment `|v_P - v_Q|`.
    velocity_gaps: Vec<f64>,
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn diff(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn common_grid(p: &SpacetimePath, q: &SpacetimePath) -> Result<CommonGrid> {
    if p.dim() != q.dim() {
        return Err(Error::IncompatibleGrids(format!("spatial dimensions {} and {}", p.dim(), q.dim())));
    }
    if !p.shares_endpoints(q) {
        return Err(Error::EndpointMismatch);
    }
    let (t0, t1) = p.time_span();
    if !(t1 > t0) {
        return Err(Error::IncompatibleGrids("zero-duration time range".into()));
    }
    let mut times: Vec<f64> = p.events().iter().chain(q.events()).map(|e| e.t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let xp: Vec<[f64; 3]> = times.iter().map(|&t| p.position_at(t)).collect();
    let xq: Vec<[f64; 3]> = times.iter().map(|&t| q.position_at(t)).collect();
    let gaps = xp.iter().zip(&xq).map(|(a, b)| norm(diff(*a, *b))).collect();
    let velocity_gaps = (1..times.len())
        .map(|k| {
            let dt = times[k] - times[k - 1];
            let vp = diff(xp[k], xp[k - 1]);
            let vq = diff(xq[k], xq[k - 1]);
            norm(diff(vp, vq)) / dt
        })
        .collect();
    Ok(CommonGrid { times, gaps, velocity_gaps })
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    (1..times.len()).map(|k| 0.5 * (values[k - 1] + values[k]) * (times[k] - times[k - 1])).sum()
}

/// Galilean distance between polyline paths sharing endpoints, on the union
/// of their time grids (linear interpolation), integrals by the trapezoid
/// rule and velocities by per-segment differences.
pub fn galilean_distance(p: &SpacetimePath, q: &SpacetimePath, spec: &DistanceSpec) -> Result<f64> {
    spec.validate()?;
    if spec.name.is_index() {
        return Err(Error::InvalidDistance(format!("{:?} is an index distance", spec.name)));
    }
    let grid = common_grid(p, q)?;
    let base = match spec.name.unweighted() {
        DistanceName::MaxSep => grid.gaps.iter().copied().fold(0.0, f64::max),
        DistanceName::L1TimeIntegral => trapezoid(&grid.times, &grid.gaps),
        DistanceName::L1TimeAverage => {
            let span = grid.times[grid.times.len() - 1] - grid.times[0];
            trapezoid(&grid.times, &grid.gaps) / span
        }
        DistanceName::L2 => {
            let sq: Vec<f64> = grid.gaps.iter().map(|g| g * g).collect();
            trapezoid(&grid.times, &sq).sqrt()
        }
        DistanceName::VelocityL1 => {
            (1..grid.times.len()).map(|k| grid.velocity_gaps[k - 1] * (grid.times[k] - grid.times[k - 1])).sum()
        }
        _ => unreachable!("index and mass variants handled above"),
    };
    let d = if spec.name.is_mass_weighted() {
        let m = spec.mass.unwrap_or_else(|| p.mass());
        m * base
    } else {
        base
    };
    Ok(scaled(d, spec.scale()))
}
