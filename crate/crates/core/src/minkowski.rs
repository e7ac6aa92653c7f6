//! Lorentz-invariant distances between polyline paths in Minkowski space.
//!
//! Signature is `(+, +, +, -)`: `Δ(x, t) = |x|^2 - t^2`, so spacelike vectors
//! have positive length, and `c = 1`. Along a pair of straight segments the
//! interval between their points is a quadratic in the two segment
//! parameters, which makes every maximum and integral below exact rather
//! than sampled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{Event, SpacetimePath};

/// Relative tolerance for causal-cone membership tests.
const CONE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiPath {
    events: Vec<Event>,
    dim: usize,
}

impl MinkowskiPath {
    pub fn new(events: Vec<Event>, dim: usize) -> Result<Self> {
        if events.len() < 2 {
            return Err(Error::InvalidPath("a Minkowski path needs at least two events".into()));
        }
        let p = SpacetimePath::unchecked(events, dim, 0.0)?;
        Ok(Self { events: p.events().to_vec(), dim })
    }

    /// 1+1D path from `(x, t)` pairs.
    pub fn from_xt(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().map(|&(x, t)| Event::new(x, t)).collect(), 1)
    }

    /// Parses `{"events": [[x, t], ...]}` or `[[x, y, z, t], ...]`.
    pub fn from_json(text: &str) -> Result<Self> {
        let p = SpacetimePath::from_json_unordered(text)?;
        Self::new(p.events().to_vec(), p.dim())
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start(&self) -> &Event {
        &self.events[0]
    }

    pub fn end(&self) -> &Event {
        &self.events[self.events.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (Event, Event)> + '_ {
        self.events.windows(2).map(|w| (w[0], w[1].sub(&w[0])))
    }

    pub fn map_events(&self, f: impl Fn(&Event) -> Event) -> Result<Self> {
        Self::new(self.events.iter().map(f).collect(), self.dim)
    }

    /// Same path with every segment split at its midpoint.
    pub fn refined(&self) -> Self {
        let mut events = Vec::with_capacity(2 * self.events.len() - 1);
        for w in self.events.windows(2) {
            events.push(w[0]);
            events.push(lerp(&w[0], &w[1], 0.5));
        }
        events.push(*self.end());
        Self { events, dim: self.dim }
    }

    fn scale(&self) -> f64 {
        self.events.iter().map(|e| e.t.abs().max(e.x.iter().fold(0.0, |a: f64, v| a.max(v.abs())))).fold(1.0, f64::max)
    }
}

impl Serialize for MinkowskiPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = self
            .events
            .iter()
            .map(|e| {
                let mut r = e.x[..self.dim].to_vec();
                r.push(e.t);
                r
            })
            .collect();
        #[derive(Serialize)]
        struct Doc {
            events: Vec<Vec<f64>>,
        }
        Doc { events: rows }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MinkowskiPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        MinkowskiPath::from_json(&v.to_string()).map_err(serde::de::Error::custom)
    }
}

fn lerp(a: &Event, b: &Event, s: f64) -> Event {
    Event {
        x: [a.x[0] + s * (b.x[0] - a.x[0]), a.x[1] + s * (b.x[1] - a.x[1]), a.x[2] + s * (b.x[2] - a.x[2])],
        t: a.t + s * (b.t - a.t),
    }
}

/// Minkowski inner product `x·y - t s`.
pub fn inner(a: &Event, b: &Event) -> f64 {
    a.x[0] * b.x[0] + a.x[1] * b.x[1] + a.x[2] * b.x[2] - a.t * b.t
}

/// `Δ(v) = |x|^2 - t^2`.
pub fn delta(v: &Event) -> f64 {
    inner(v, v)
}

/// `Δ(u - v)`.
pub fn interval(u: &Event, v: &Event) -> f64 {
    delta(&u.sub(v))
}

fn add_scaled(a: &Event, b: &Event, s: f64) -> Event {
    Event { x: [a.x[0] + s * b.x[0], a.x[1] + s * b.x[1], a.x[2] + s * b.x[2]], t: a.t + s * b.t }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    Causal,
    NonCausal,
    AntiCausal,
}

impl CausalClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CausalClass::Causal => "causal",
            CausalClass::NonCausal => "non-causal",
            CausalClass::AntiCausal => "anti-causal",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            CausalClass::Causal => 0,
            CausalClass::NonCausal => 1,
            CausalClass::AntiCausal => 2,
        }
    }
}

impl std::fmt::Display for CausalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether `v` points into the causal future (null included) within `tol`.
fn future_causal(v: &Event, tol: f64) -> bool {
    v.t >= -tol && v.spatial_norm_sq().sqrt() <= v.t + tol
}

/// `t + |x|` of the separation; at most 0 with `t < 0` means `v` points into
/// the causal past.
fn past_margin(v: &Event) -> f64 {
    v.t + v.spatial_norm_sq().sqrt()
}

/// Golden-section minimisation of a convex function on `[0, 1]`.
fn golden_min(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mut best = (f(0.0), 0.0);
    for s in [1.0, c, d] {
        let v = f(s);
        if v < best.0 {
            best = (v, s);
        }
    }
    best
}

/// Whether some later point of segment `j` lies in the causal past of some
/// earlier point of segment `i < j`.
fn segment_pair_anti_causal(a0: &Event, da: &Event, b0: &Event, db: &Event, tol: f64) -> bool {
    let sep = |u: f64, v: f64| add_scaled(b0, db, v).sub(&add_scaled(a0, da, u));
    let is_past = |w: &Event| w.t < -tol && past_margin(w) <= tol;
    for (u, v) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
        if is_past(&sep(u, v)) {
            return true;
        }
    }
    if da.t >= 0.0 && db.t >= 0.0 && b0.t >= a0.t + da.t {
        // Both segments run forward and `b` starts after `a` ends: every
        // separation has non-negative time.
        return false;
    }
    // `t + |x|` of the separation is convex in (u, v).
    let (m, u) = golden_min(|u| golden_min(|v| past_margin(&sep(u, v))).0);
    let (_, v) = golden_min(|v| past_margin(&sep(u, v)));
    m <= tol && sep(u, v).t < -tol
}

/// Causal, non-causal or anti-causal (the strongest label applies).
pub fn classify(p: &MinkowskiPath) -> CausalClass {
    let tol = CONE_TOLERANCE * p.scale();
    let ev = p.events();
    let mut causal = true;
    for i in 0..ev.len() {
        for j in (i + 1)..ev.len() {
            if !future_causal(&ev[j].sub(&ev[i]), tol) {
                causal = false;
            }
        }
    }
    if causal {
        return CausalClass::Causal;
    }
    let segs: Vec<(Event, Event)> = p.segments().collect();
    for (k, (_, d)) in segs.iter().enumerate() {
        let along = *d;
        if along.t < -tol && past_margin(&along) <= tol {
            return CausalClass::AntiCausal;
        }
        for (b0, db) in &segs[k + 1..] {
            if segment_pair_anti_causal(&segs[k].0, d, b0, db, tol) {
                return CausalClass::AntiCausal;
            }
        }
    }
    CausalClass::NonCausal
}

fn check_admissible(p: &MinkowskiPath, q: &MinkowskiPath) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidPath(format!("dimensions {} and {} differ", p.dim(), q.dim())));
    }
    let tol = 1e-9 * p.scale().max(q.scale());
    if !p.start().approx_eq(q.start(), tol) || !p.end().approx_eq(q.end(), tol) {
        return Err(Error::EndpointMismatch);
    }
    if classify(p) == CausalClass::AntiCausal || classify(q) == CausalClass::AntiCausal {
        return Err(Error::AntiCausalArgument);
    }
    warn_outside_slab(q, p);
    warn_outside_slab(p, q);
    Ok(())
}

/// Logs a warning when `q` leaves the slab between the constant-time planes
/// through the endpoints of `p`.
fn warn_outside_slab(q: &MinkowskiPath, p: &MinkowskiPath) {
    let (lo, hi) = (p.start().t.min(p.end().t), p.start().t.max(p.end().t));
    let tol = 1e-9 * p.scale();
    if q.events().iter().any(|e| e.t < lo - tol || e.t > hi + tol) {
        log::warn!("path leaves the time slab [{lo}, {hi}] between the endpoint hypersurfaces");
    }
}

/// `a s^2 + b s + c` on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    c: f64,
    lo: f64,
    hi: f64,
}

impl Piece {
    fn eval(&self, s: f64) -> f64 {
        (self.a * s + self.b) * s + self.c
    }

    fn integral(&self, lo: f64, hi: f64) -> f64 {
        let f = |s: f64| ((self.a / 3.0 * s + self.b / 2.0) * s + self.c) * s;
        f(hi) - f(lo)
    }

    fn max_on(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.eval(lo).max(self.eval(hi));
        if self.a < 0.0 {
            let s = -self.b / (2.0 * self.a);
            if s > lo && s < hi {
                m = m.max(self.eval(s));
            }
        }
        m
    }
}

/// `Δ(w0 + s dw)` as a quadratic in `s`.
fn quad(w0: &Event, dw: &Event) -> (f64, f64, f64) {
    (delta(dw), 2.0 * inner(w0, dw), delta(w0))
}

/// Pieces whose upper envelope is `s -> max over Q of Δ(P(s) - Q)` for the
/// segment `P(s) = p0 + s dp`, `s` in `[0, 1]`.
fn envelope_pieces(p0: &Event, dp: &Event, q: &MinkowskiPath, clamp: bool) -> Vec<Piece> {
    let mut pieces = Vec::new();
    for v in q.events() {
        let (a, b, c) = quad(&p0.sub(v), dp);
        pieces.push(Piece { a, b, c, lo: 0.0, hi: 1.0 });
    }
    for (q0, dq) in q.segments() {
        let dd = delta(&dq);
        if dd >= 0.0 {
            // Convex or linear along the segment: maxima sit on its vertices.
            continue;
        }
        // w(s) = p0 - q0 + s dp; the maximum over the segment parameter is at
        // v* = <w, dq> / Δ(dq) when v* lies in (0, 1), with value
        // Δ(w) - <w, dq>^2 / Δ(dq).
        let w0 = p0.sub(&q0);
        let (a0, b0, c0) = quad(&w0, dp);
        let (k0, k1) = (inner(&w0, &dq), inner(dp, &dq));
        let a = a0 - k1 * k1 / dd;
        let b = b0 - 2.0 * k0 * k1 / dd;
        let c = c0 - k0 * k0 / dd;
        // v*(s) = v0 + s v1 must lie in [0, 1].
        let (v0, v1) = (k0 / dd, k1 / dd);
        let (lo, hi) = if v1 == 0.0 {
            if !(0.0..=1.0).contains(&v0) {
                continue;
            }
            (0.0, 1.0)
        } else {
            let (s0, s1) = (-v0 / v1, (1.0 - v0) / v1);
            (s0.min(s1).max(0.0), s0.max(s1).min(1.0))
        };
        if lo >= hi {
            continue;
        }
        pieces.push(Piece { a, b, c, lo, hi });
    }
    if clamp {
        pieces.push(Piece { a: 0.0, b: 0.0, c: 0.0, lo: 0.0, hi: 1.0 });
    }
    pieces
}

/// Real roots of `a s^2 + b s + c` in `(0, 1)`.
fn roots_in_unit(a: f64, b: f64, c: f64, out: &mut Vec<f64>) {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return;
    }
    let (a, b, c) = (a / scale, b / scale, c / scale);
    let mut push = |s: f64| {
        if s > 0.0 && s < 1.0 {
            out.push(s);
        }
    };
    if a.abs() < 1e-14 {
        if b.abs() > 1e-14 {
            push(-c / b);
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    push(q / a);
    if q != 0.0 {
        push(c / q);
    }
}

/// Breakpoints splitting `[0, 1]` so that one piece is maximal on each part.
fn breakpoints(pieces: &[Piece]) -> Vec<f64> {
    let mut pts = vec![0.0, 1.0];
    for (k, p) in pieces.iter().enumerate() {
        pts.push(p.lo);
        pts.push(p.hi);
        for q in &pieces[k + 1..] {
            roots_in_unit(p.a - q.a, p.b - q.b, p.c - q.c, &mut pts);
        }
    }
    pts.retain(|s| (0.0..=1.0).contains(s));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    pts
}

fn envelope_integral(pieces: &[Piece]) -> f64 {
    let pts = breakpoints(pieces);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let best = pieces
            .iter()
            .filter(|p| p.lo <= mid && mid <= p.hi)
            .max_by(|x, y| x.eval(mid).total_cmp(&y.eval(mid)));
        if let Some(p) = best {
            total += p.integral(lo, hi);
        }
    }
    total
}

fn envelope_max(pieces: &[Piece]) -> f64 {
    pieces.iter().map(|p| p.max_on(p.lo, p.hi)).fold(f64::NEG_INFINITY, f64::max)
}

/// Maximum of `Δ(X_P(λ) - X_Q(λ'))` over all pairs of points.
pub fn d1(p: &MinkowskiPath, q: &MinkowskiPath) -> Result<f64> {
    check_admissible(p, q)?;
    Ok(d1_unchecked(p, q))
}

fn d1_unchecked(p: &MinkowskiPath, q: &MinkowskiPath) -> f64 {
    // With one point on a vertex, the interval along the other segment is a
    // 1D quadratic; the maximum over a segment pair always sits on such an
    // edge because no 2-plane of Minkowski space is negative definite.
    let mut best = f64::NEG_INFINITY;
    for (p0, dp) in p.segments() {
        best = best.max(envelope_max(&envelope_pieces(&p0, &dp, q, false)));
    }
    for (q0, dq) in q.segments() {
        for v in p.events() {
            let (a, b, c) = quad(&q0.sub(v), &dq);
            best = best.max(Piece { a, b, c, lo: 0.0, hi: 1.0 }.max_on(0.0, 1.0));
        }
    }
    best
}

/// The variants of the proper-time weighted distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum D2Variant {
    /// Requires a causal first argument.
    Plain,
    /// Sums over the causal segments of the first argument only.
    Prime,
    /// `(prime(P, Q) + prime(Q, P)) / 2`.
    Symmetrized,
}

/// Proper length of a segment, 0 unless it is timelike; segments within
/// rounding of the light cone count as null.
fn proper_time(d: &Event) -> f64 {
    let s = -delta(d);
    if s <= CONE_TOLERANCE * (d.t * d.t + d.spatial_norm_sq()) {
        0.0
    } else {
        s.sqrt()
    }
}

fn d2_sum(p: &MinkowskiPath, q: &MinkowskiPath, causal_only: bool, clamp: bool) -> f64 {
    let tol = CONE_TOLERANCE * p.scale();
    let mut total = 0.0;
    for (p0, dp) in p.segments() {
        if causal_only && !future_causal(&dp, tol) {
            continue;
        }
        let tau = proper_time(&dp);
        if tau == 0.0 {
            continue;
        }
        total += tau * envelope_integral(&envelope_pieces(&p0, &dp, q, clamp));
    }
    total
}

/// Proper time along `P` of the largest interval to `Q`.
///
/// The integrand is signed: a point of `P` timelike to all of `Q`
/// contributes a negative value. `clamp` replaces such contributions by 0.
pub fn d2(p: &MinkowskiPath, q: &MinkowskiPath, variant: D2Variant, clamp: bool) -> Result<f64> {
    check_admissible(p, q)?;
    match variant {
        D2Variant::Plain => {
            if classify(p) != CausalClass::Causal {
                return Err(Error::NonCausalPlainArgument);
            }
            Ok(d2_sum(p, q, false, clamp))
        }
        D2Variant::Prime => Ok(d2_sum(p, q, true, clamp)),
        D2Variant::Symmetrized => Ok(0.5 * (d2_sum(p, q, true, clamp) + d2_sum(q, p, true, clamp))),
    }
}

/// Boost with rapidity `eta` along the unit vector `axis`.
pub fn boost(p: &MinkowskiPath, eta: f64, axis: [f64; 3]) -> Result<MinkowskiPath> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidPath("boost axis must be non-zero".into()));
    }
    let n = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
    let (g, gb) = (eta.cosh(), eta.sinh());
    p.map_events(|e| {
        let along = e.x[0] * n[0] + e.x[1] * n[1] + e.x[2] * n[2];
        let t = g * e.t - gb * along;
        let shift = (g - 1.0) * along - gb * e.t;
        Event { x: [e.x[0] + shift * n[0], e.x[1] + shift * n[1], e.x[2] + shift * n[2]], t }
    })
}

/// 1 for causal paths, 0 otherwise.
pub fn causal_weight(p: &MinkowskiPath) -> f64 {
    if classify(p) == CausalClass::Causal {
        1.0
    } else {
        0.0
    }
}

/// Paths kept for a causal-only evaluation: anti-causal paths are dropped,
/// non-causal ones stay with weight 0 so they still contribute amplitude.
#[derive(Debug, Clone)]
pub struct CausalEnsemble {
    pub paths: Vec<MinkowskiPath>,
    /// Positions of the kept paths in the input.
    pub kept: Vec<usize>,
    pub weights: Vec<f64>,
    pub removed: Vec<usize>,
}

pub fn prepare_causal_ensemble(paths: &[MinkowskiPath]) -> CausalEnsemble {
    let mut out = CausalEnsemble { paths: Vec::new(), kept: Vec::new(), weights: Vec::new(), removed: Vec::new() };
    for (k, p) in paths.iter().enumerate() {
        match classify(p) {
            CausalClass::AntiCausal => out.removed.push(k),
            c => {
                out.paths.push(p.clone());
                out.kept.push(k);
                out.weights.push(if c == CausalClass::Causal { 1.0 } else { 0.0 });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xt(points: &[(f64, f64)]) -> MinkowskiPath {
        MinkowskiPath::from_xt(points).unwrap()
    }

    #[test]
    fn interval_signs() {
        let o = Event::new3(0.0, 0.0, 0.0, 0.0);
        assert_eq!(interval(&o, &o), 0.0);
        assert_eq!(interval(&Event::new3(1.0, 0.0, 0.0, 0.0), &o), 1.0);
        assert_eq!(interval(&Event::new3(0.0, 0.0, 0.0, 1.0), &o), -1.0);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&xt(&[(0.0, 0.0), (0.0, 1.0), (0.0, 2.0)])), CausalClass::Causal);
        assert_eq!(classify(&xt(&[(0.0, 0.0), (1.0, 0.1), (0.0, 2.0)])), CausalClass::NonCausal);
        assert_eq!(classify(&xt(&[(0.0, 0.0), (0.0, 1.0), (0.0, 0.5), (0.0, 2.0)])), CausalClass::AntiCausal);
        assert_eq!(classify(&xt(&[(0.0, 0.0), (1.0, 1.0), (0.0, 2.0)])), CausalClass::Causal);
    }

    #[test]
    fn past_null_step_is_anti_causal() {
        let q = xt(&[(0.0, 0.0), (0.0, 2.0), (1.0, 1.0), (0.0, 3.0)]);
        assert_eq!(classify(&q), CausalClass::AntiCausal);
    }

    #[test]
    fn d1_examples() {
        let p = xt(&[(0.0, 0.0), (0.0, 2.0)]);
        let q = xt(&[(0.0, 0.0), (1.0, 1.0), (0.0, 2.0)]);
        assert!((d1(&p, &q).unwrap() - 1.0).abs() < 1e-12);
        assert!(d1(&p, &p).unwrap().abs() < 1e-12);
        let nc = xt(&[(0.0, 0.0), (1.0, 0.1), (0.0, 2.0)]);
        assert!(d1(&nc, &nc).unwrap() >= 0.99);
        let r = xt(&[(0.0, 0.0), (0.0, 1.0), (0.0, 0.5), (0.0, 2.0)]);
        assert_eq!(d1(&p, &r), Err(Error::AntiCausalArgument));
        let s = xt(&[(0.0, 0.0), (0.0, 3.0)]);
        assert_eq!(d1(&p, &s), Err(Error::EndpointMismatch));
    }

    #[test]
    fn d1_matches_grid_search() {
        let p = xt(&[(0.0, 0.0), (0.0, 2.0)]);
        let q = xt(&[(0.0, 0.0), (1.0, 1.0), (0.0, 2.0)]);
        let mut best = f64::NEG_INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let a = Event::new(0.0, 2.0 * i as f64 / 400.0);
                let s = j as f64 / 400.0;
                let b = if s < 0.5 { Event::new(2.0 * s, 2.0 * s) } else { Event::new(2.0 - 2.0 * s, 2.0 * s) };
                best = best.max(interval(&a, &b));
            }
        }
        assert!((best - d1(&p, &q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn d2_examples() {
        let p = xt(&[(0.0, 0.0), (0.0, 2.0)]);
        let q = xt(&[(0.0, 0.0), (1.0, 1.0), (0.0, 2.0)]);
        let pq = d2(&p, &q, D2Variant::Plain, false).unwrap();
        assert!((pq - 4.0 / 3.0).abs() < 1e-12, "{pq}");
        let qp = d2(&q, &p, D2Variant::Plain, false).unwrap();
        assert_eq!(qp, 0.0);
        let s1 = d2(&p, &q, D2Variant::Symmetrized, false).unwrap();
        let s2 = d2(&q, &p, D2Variant::Symmetrized, false).unwrap();
        assert_eq!(s1, s2);
        let nc = xt(&[(0.0, 0.0), (1.0, 0.1), (0.0, 2.0)]);
        assert_eq!(d2(&nc, &p, D2Variant::Plain, false), Err(Error::NonCausalPlainArgument));
        assert!(d2(&nc, &p, D2Variant::Prime, false).is_ok());
    }

    #[test]
    fn d2_can_be_negative_unless_clamped() {
        // Q hugs P, so mid-segment points of P are timelike to all of Q.
        let p = xt(&[(0.0, 0.0), (0.0, 4.0)]);
        let q = xt(&[(0.0, 0.0), (0.0, 4.0)]);
        let raw = d2(&p, &q, D2Variant::Plain, false).unwrap();
        assert!(raw.abs() < 1e-12);
        let q = xt(&[(0.0, 0.0), (0.1, 2.0), (0.0, 4.0)]);
        let clamped = d2(&p, &q, D2Variant::Plain, true).unwrap();
        assert!(clamped >= 0.0);
    }

    #[test]
    fn boosts_preserve_intervals() {
        let a = Event::new3(0.3, -0.2, 0.5, 1.0);
        let b = Event::new3(-0.4, 0.1, 0.2, 2.5);
        let p = MinkowskiPath::new(vec![a, b], 3).unwrap();
        let bp = boost(&p, 1.7, [0.2, 0.5, -0.3]).unwrap();
        let (a2, b2) = (bp.events()[0], bp.events()[1]);
        assert!((interval(&a, &b) - interval(&a2, &b2)).abs() < 1e-12);
    }

    #[test]
    fn causal_weights_and_removal() {
        let c = xt(&[(0.0, 0.0), (0.0, 2.0)]);
        let n = xt(&[(0.0, 0.0), (1.0, 0.1), (0.0, 2.0)]);
        let r = xt(&[(0.0, 0.0), (0.0, 1.0), (0.0, 0.5), (0.0, 2.0)]);
        assert_eq!(causal_weight(&c), 1.0);
        assert_eq!(causal_weight(&n), 0.0);
        let e = prepare_causal_ensemble(&[c, n, r]);
        assert_eq!(e.kept, vec![0, 1]);
        assert_eq!(e.weights, vec![1.0, 0.0]);
        assert_eq!(e.removed, vec![2]);
    }

    #[test]
    fn json_round_trip() {
        let p = MinkowskiPath::from_json(r#"{"events": [[0, 0], [1, 1], [0, 2]]}"#).unwrap();
        assert_eq!(p.dim(), 1);
        let text = serde_json::to_string(&p).unwrap();
        let back: MinkowskiPath = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        let p4 = MinkowskiPath::from_json(r#"{"events": [[0, 0, 0, 0], [0, 0, 0, 1]]}"#).unwrap();
        assert_eq!(p4.dim(), 3);
    }
}
