//! Path representations shared by every model: indexed amplitude ensembles,
//! polyline spacetime paths and product/sequence composites.
//!
//! Units are natural (hbar = c = 1). Amplitudes follow the `exp(-iS)`
//! convention throughout.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Modulus tolerance accepted when constructing an ensemble.
pub const UNIT_TOLERANCE: f64 = 1e-9;

const TIME_TOLERANCE: f64 = 1e-12;

/// A finite indexed set of paths with unit-modulus amplitudes.
///
/// Indices are contiguous. The public API reports them 1-based, storage is
/// 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    amplitudes: Vec<Complex64>,
    endpoint: String,
}

impl PathEnsemble {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_endpoint(amplitudes, "B")
    }

    pub fn with_endpoint(amplitudes: Vec<Complex64>, endpoint: impl Into<String>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        for (i, a) in amplitudes.iter().enumerate() {
            let modulus = a.norm();
            if !((modulus - 1.0).abs() <= UNIT_TOLERANCE) {
                return Err(Error::NonUnitAmplitude { index: i + 1, modulus });
            }
        }
        Ok(Self { amplitudes, endpoint: endpoint.into() })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of the path with 1-based index `index`.
    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index - 1]
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// `Σ A_j`, with compensated summation so large lattice ensembles
    /// stay accurate.
    pub fn total_amplitude(&self) -> Complex64 {
        let re = compensated_sum(self.amplitudes.iter().map(|a| a.re));
        let im = compensated_sum(self.amplitudes.iter().map(|a| a.im));
        Complex64::new(re, im)
    }

    /// Multiplies every amplitude by a common unit phase.
    pub fn rephased(&self, phase: Complex64) -> Result<Self> {
        Self::with_endpoint(self.amplitudes.iter().map(|a| a * phase).collect(), self.endpoint.clone())
    }
}

// Neumaier's variant of Kahan summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Builds an ensemble indexed 1..N in list order.
pub fn make_indexed_ensemble(amplitudes: Vec<Complex64>) -> Result<PathEnsemble> {
    PathEnsemble::new(amplitudes)
}

#[derive(Serialize, Deserialize)]
struct EnsembleDoc {
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for PathEnsemble {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        EnsembleDoc { amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PathEnsemble {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = EnsembleDoc::deserialize(deserializer)?;
        let amps = doc.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        PathEnsemble::new(amps).map_err(serde::de::Error::custom)
    }
}

/// A spacetime event: up to three spatial coordinates and a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub x: [f64; 3],
    pub t: f64,
}

impl Event {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x: [x, 0.0, 0.0], t }
    }

    pub fn new3(x: f64, y: f64, z: f64, t: f64) -> Self {
        Self { x: [x, y, z], t }
    }

    pub fn sub(&self, other: &Event) -> Event {
        Event {
            x: [self.x[0] - other.x[0], self.x[1] - other.x[1], self.x[2] - other.x[2]],
            t: self.t - other.t,
        }
    }

    pub fn spatial_norm_sq(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    pub fn approx_eq(&self, other: &Event, tol: f64) -> bool {
        let d = self.sub(other);
        d.t.abs() <= tol && d.x.iter().all(|v| v.abs() <= tol)
    }
}

/// A polyline of events with a shared spatial dimension and a particle mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimePath {
    events: Vec<Event>,
    dim: usize,
    mass: f64,
}

impl SpacetimePath {
    /// Galilean path: time coordinates must be non-decreasing.
    pub fn new(events: Vec<Event>, dim: usize, mass: f64) -> Result<Self> {
        let path = Self::unchecked(events, dim, mass)?;
        for (k, w) in path.events.windows(2).enumerate() {
            if w[1].t < w[0].t {
                return Err(Error::InvalidPath(format!("time decreases along segment {}", k + 1)));
            }
        }
        Ok(path)
    }

    /// 1+1D Galilean path from `(x, t)` pairs.
    pub fn from_xt(points: &[(f64, f64)], mass: f64) -> Result<Self> {
        Self::new(points.iter().map(|&(x, t)| Event::new(x, t)).collect(), 1, mass)
    }

    /// Path without the time-ordering check, for Minkowski use.
    pub(crate) fn unchecked(events: Vec<Event>, dim: usize, mass: f64) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InvalidPath("path has no events".into()));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidPath(format!("spatial dimension {dim} not in 1..=3")));
        }
        let finite = events.iter().all(|e| e.t.is_finite() && e.x.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidPath("non-finite coordinate".into()));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::InvalidPath(format!("mass {mass} must be finite and non-negative")));
        }
        Ok(Self { events, dim, mass })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn start(&self) -> &Event {
        &self.events[0]
    }

    pub fn end(&self) -> &Event {
        &self.events[self.events.len() - 1]
    }

    pub fn time_span(&self) -> (f64, f64) {
        (self.start().t, self.end().t)
    }

    pub fn shares_endpoints(&self, other: &SpacetimePath) -> bool {
        self.start().approx_eq(other.start(), TIME_TOLERANCE)
            && self.end().approx_eq(other.end(), TIME_TOLERANCE)
    }

    /// Applies `f` to every event.
    pub fn map_events(&self, f: impl Fn(&Event) -> Event) -> Result<Self> {
        Self::unchecked(self.events.iter().map(f).collect(), self.dim, self.mass)
    }

    /// Linear interpolation of the position at time `t`. `t` must lie in the
    /// time span and the path must be time-ordered.
    pub fn position_at(&self, t: f64) -> [f64; 3] {
        let ev = &self.events;
        if t <= ev[0].t {
            return ev[0].x;
        }
        // first index whose time is >= t
        let hi = ev.partition_point(|e| e.t < t);
        if hi >= ev.len() {
            return ev[ev.len() - 1].x;
        }
        let (a, b) = (&ev[hi - 1], &ev[hi]);
        if b.t == t || b.t == a.t {
            return b.x;
        }
        let f = (t - a.t) / (b.t - a.t);
        [
            a.x[0] + f * (b.x[0] - a.x[0]),
            a.x[1] + f * (b.x[1] - a.x[1]),
            a.x[2] + f * (b.x[2] - a.x[2]),
        ]
    }
}

/// Discrete free-particle action `sum m |dx|^2 / (2 dt)` over the segments.
pub fn free_action(path: &SpacetimePath, mass: f64) -> Result<f64> {
    if path.events.len() < 2 {
        return Err(Error::InvalidPath("action needs at least two events".into()));
    }
    let mut action = 0.0;
    for (k, w) in path.events.windows(2).enumerate() {
        let d = w[1].sub(&w[0]);
        if !(d.t > 0.0) {
            return Err(Error::DegenerateSegment { segment: k + 1, dt: d.t });
        }
        action += mass * d.spatial_norm_sq() / (2.0 * d.t);
    }
    Ok(action)
}

/// `exp(-iS)`.
pub fn amplitude_from_action(action: f64) -> Complex64 {
    Complex64::from_polar(1.0, -action)
}

#[derive(Serialize, Deserialize)]
struct SpacetimeDoc {
    events: Vec<Vec<f64>>,
    #[serde(default = "default_mass")]
    mass: f64,
}

fn default_mass() -> f64 {
    1.0
}

impl SpacetimePath {
    /// Parses `{"events": [[x..., t], ...], "mass": m}` without the
    /// time-ordering check (Minkowski path files may run backwards in time).
    pub fn from_json_unordered(text: &str) -> Result<Self> {
        let doc: SpacetimeDoc = serde_json::from_str(text)?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: SpacetimeDoc) -> Result<Self> {
        let width = doc.events.first().map(Vec::len).unwrap_or(0);
        if !(2..=4).contains(&width) {
            return Err(Error::Parse(format!("event rows must have 2 to 4 entries, got {width}")));
        }
        let mut events = Vec::with_capacity(doc.events.len());
        for row in &doc.events {
            if row.len() != width {
                return Err(Error::Parse("event rows have inconsistent widths".into()));
            }
            let mut x = [0.0; 3];
            x[..width - 1].copy_from_slice(&row[..width - 1]);
            events.push(Event { x, t: row[width - 1] });
        }
        Self::unchecked(events, width - 1, doc.mass)
    }
}

impl Serialize for SpacetimePath {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let events = self
            .events
            .iter()
            .map(|e| {
                let mut row = e.x[..self.dim].to_vec();
                row.push(e.t);
                row
            })
            .collect();
        SpacetimeDoc { events, mass: self.mass }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpacetimePath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = SpacetimeDoc::deserialize(deserializer)?;
        let path = SpacetimePath::from_doc(doc).map_err(serde::de::Error::custom)?;
        SpacetimePath::new(path.events, path.dim, path.mass).map_err(serde::de::Error::custom)
    }
}

/// A path named by its position in an indexed family, as in the toy models.
///
/// Paths in different families have no index relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexedPath {
    pub family: u32,
    pub index: usize,
    pub span: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeKind {
    /// Simultaneous subsystems over one time interval.
    Product,
    /// Temporal concatenation.
    Sequence,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathNode {
    Indexed(IndexedPath),
    Spacetime(SpacetimePath),
    Composite(CompositePath),
}

impl PathNode {
    pub fn time_span(&self) -> (f64, f64) {
        match self {
            PathNode::Indexed(p) => p.span,
            PathNode::Spacetime(p) => p.time_span(),
            PathNode::Composite(c) => c.time_span(),
        }
    }
}

impl From<IndexedPath> for PathNode {
    fn from(p: IndexedPath) -> Self {
        PathNode::Indexed(p)
    }
}

impl From<SpacetimePath> for PathNode {
    fn from(p: SpacetimePath) -> Self {
        PathNode::Spacetime(p)
    }
}

impl From<CompositePath> for PathNode {
    fn from(p: CompositePath) -> Self {
        PathNode::Composite(p)
    }
}

/// Product or sequence of component paths. Structure is kept so distance
/// rules can dispatch on the kind.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositePath {
    kind: CompositeKind,
    components: Vec<PathNode>,
}

impl CompositePath {
    pub fn kind(&self) -> CompositeKind {
        self.kind
    }

    pub fn components(&self) -> &[PathNode] {
        &self.components
    }

    pub fn time_span(&self) -> (f64, f64) {
        let first = self.components[0].time_span();
        match self.kind {
            CompositeKind::Product => first,
            CompositeKind::Sequence => (first.0, self.components[self.components.len() - 1].time_span().1),
        }
    }

    /// Same structure with the components reordered by `perm`
    /// (component `k` of the result is component `perm[k]` of `self`).
    pub fn permuted(&self, perm: &[usize]) -> CompositePath {
        CompositePath { kind: self.kind, components: perm.iter().map(|&k| self.components[k].clone()).collect() }
    }
}

/// Builds a composite path, checking the time-span invariants of its kind.
pub fn compose(kind: CompositeKind, components: Vec<PathNode>) -> Result<CompositePath> {
    if components.is_empty() {
        return Err(Error::StructureMismatch("composite needs at least one component".into()));
    }
    match kind {
        CompositeKind::Product => {
            let span = components[0].time_span();
            for (k, c) in components.iter().enumerate().skip(1) {
                let s = c.time_span();
                if (s.0 - span.0).abs() > TIME_TOLERANCE || (s.1 - span.1).abs() > TIME_TOLERANCE {
                    return Err(Error::TimeMismatch(format!(
                        "product component {} spans [{}, {}], expected [{}, {}]",
                        k + 1,
                        s.0,
                        s.1,
                        span.0,
                        span.1
                    )));
                }
            }
        }
        CompositeKind::Sequence => {
            for (k, w) in components.windows(2).enumerate() {
                let end = w[0].time_span().1;
                let start = w[1].time_span().0;
                if (end - start).abs() > TIME_TOLERANCE {
                    return Err(Error::TimeMismatch(format!(
                        "sequence component {} ends at {end} but component {} starts at {start}",
                        k + 1,
                        k + 2
                    )));
                }
            }
        }
    }
    Ok(CompositePath { kind, components })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn indexed_ensemble_construction() {
        let e = make_indexed_ensemble(vec![c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.amplitude(1), c(1.0, 0.0));
        assert_eq!(e.amplitude(2), c(-1.0, 0.0));
        assert_eq!(e.amplitude(3), c(1.0, 0.0));
    }

    #[test]
    fn empty_and_non_unit_rejected() {
        assert_eq!(make_indexed_ensemble(vec![]), Err(Error::EmptyEnsemble));
        match make_indexed_ensemble(vec![c(1.0, 0.0), c(2.0, 0.0)]) {
            Err(Error::NonUnitAmplitude { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn free_action_examples() {
        let p = SpacetimePath::from_xt(&[(0.0, 0.0), (0.0, 1.0)], 1.0).unwrap();
        assert_eq!(free_action(&p, 1.0).unwrap(), 0.0);
        let p = SpacetimePath::from_xt(&[(0.0, 0.0), (1.0, 1.0)], 2.0).unwrap();
        assert_eq!(free_action(&p, 2.0).unwrap(), 1.0);
        let p = SpacetimePath::from_xt(&[(0.0, 0.0), (1.0, 1.0), (0.0, 2.0)], 1.0).unwrap();
        assert_eq!(free_action(&p, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn free_action_rejects_zero_duration() {
        let p = SpacetimePath::from_xt(&[(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)], 1.0).unwrap();
        assert!(matches!(free_action(&p, 1.0), Err(Error::DegenerateSegment { segment: 1, .. })));
    }

    #[test]
    fn decreasing_time_rejected_in_galilean_mode() {
        assert!(SpacetimePath::from_xt(&[(0.0, 1.0), (0.0, 0.5)], 1.0).is_err());
    }

    fn leaf(t0: f64, t1: f64) -> PathNode {
        PathNode::Indexed(IndexedPath { family: 0, index: 1, span: (t0, t1) })
    }

    #[test]
    fn compose_checks_spans() {
        assert!(compose(CompositeKind::Product, vec![leaf(0.0, 2.0), leaf(0.0, 2.0)]).is_ok());
        assert!(compose(CompositeKind::Sequence, vec![leaf(0.0, 1.0), leaf(1.0, 3.0)]).is_ok());
        assert!(matches!(
            compose(CompositeKind::Sequence, vec![leaf(0.0, 1.0), leaf(2.0, 3.0)]),
            Err(Error::TimeMismatch(_))
        ));
        assert!(matches!(
            compose(CompositeKind::Product, vec![leaf(0.0, 1.0), leaf(0.0, 3.0)]),
            Err(Error::TimeMismatch(_))
        ));
    }

    #[test]
    fn json_documents() {
        let e: PathEnsemble = serde_json::from_str(r#"{"amplitudes": [[1,0],[0,1]]}"#).unwrap();
        assert_eq!(e.amplitude(2), c(0.0, 1.0));
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"amplitudes":[[1.0,0.0],[0.0,1.0]]}"#);
        assert!(serde_json::from_str::<PathEnsemble>(r#"{"amplitudes": [[2,0]]}"#).is_err());

        let p: SpacetimePath = serde_json::from_str(r#"{"events": [[0,0],[1,1],[0,2]], "mass": 2}"#).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.mass(), 2.0);
        assert_eq!(p.events()[1], Event::new(1.0, 1.0));
        let back: SpacetimePath = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn interpolation() {
        let p = SpacetimePath::from_xt(&[(0.0, 0.0), (2.0, 2.0), (0.0, 4.0)], 1.0).unwrap();
        assert_eq!(p.position_at(1.0)[0], 1.0);
        assert_eq!(p.position_at(2.0)[0], 2.0);
        assert_eq!(p.position_at(3.5)[0], 0.5);
    }
}
