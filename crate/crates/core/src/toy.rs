//! Indexed toy ensembles with blocks of constant phase inside alternating
//! `+1, -1` tails, and closed-form predictions for them under the step
//! distance.
//!
//! Indices are 1-based throughout, matching the usual presentation of the
//! models. Closed forms are unnormalised: the true probability is the value
//! times the ensemble's normalisation constant.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{make_indexed_ensemble, PathEnsemble};

/// Concrete reading of the `x << y` premises: `factor * x <= y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Premises {
    pub factor: f64,
    /// Also check the single-block `K << M, N` and `D << N` premises.
    pub strict: bool,
}

impl Default for Premises {
    fn default() -> Self {
        Self { factor: 10.0, strict: false }
    }
}

impl Premises {
    pub fn strict() -> Self {
        Self { strict: true, ..Self::default() }
    }

    fn much_less(&self, x: usize, y: usize) -> bool {
        self.factor * x as f64 <= y as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct M1Spec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default)]
    pub theta: f64,
}

impl Region {
    pub fn new(m: usize, k: usize, theta: f64) -> Self {
        Self { m, k, theta }
    }

    /// Last index of the block.
    pub fn end(&self) -> usize {
        self.m + self.k
    }

    /// `(K + 1) exp(-i theta)`, the summed amplitude of the block.
    pub fn strength(&self) -> Complex64 {
        Complex64::from_polar((self.k + 1) as f64, -self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct M2Spec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M0")]
    pub m0: usize,
    #[serde(rename = "K0")]
    pub k0: usize,
    #[serde(rename = "M1")]
    pub m1: usize,
    #[serde(rename = "K1")]
    pub k1: usize,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default)]
    pub theta1: f64,
}

impl M2Spec {
    pub fn regions(&self) -> [Region; 2] {
        [Region::new(self.m0, self.k0, self.theta0), Region::new(self.m1, self.k1, self.theta1)]
    }

    pub fn as_m3(&self) -> M3Spec {
        M3Spec { n: self.n, regions: self.regions().to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M3Spec {
    #[serde(rename = "N")]
    pub n: usize,
    pub regions: Vec<Region>,
}

impl M3Spec {
    /// `sum_k (K_k + 1) exp(-i theta_k)`.
    pub fn quantum_amplitude(&self) -> Complex64 {
        self.regions.iter().map(Region::strength).sum()
    }

    /// First and last index of the span covering every block.
    pub fn block_span(&self) -> (usize, usize) {
        (self.regions[0].m, self.regions[self.regions.len() - 1].end())
    }
}

/// A toy model document, tagged by `"model"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum ToyModel {
    M1(M1Spec),
    M2(M2Spec),
    M3(M3Spec),
}

impl ToyModel {
    pub fn build(&self) -> Result<PathEnsemble> {
        match self {
            ToyModel::M1(s) => build_m1(s),
            ToyModel::M2(s) => build_m2(s),
            ToyModel::M3(s) => build_m3(s),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ToyModel::M1(s) => s.n,
            ToyModel::M2(s) => s.n,
            ToyModel::M3(s) => s.n,
        }
    }
}

fn violation(msg: impl Into<String>) -> Error {
    Error::SpecViolation(msg.into())
}

fn check_regions(n: usize, regions: &[Region]) -> Result<()> {
    if regions.is_empty() {
        return Err(violation("at least one region is required"));
    }
    for (k, r) in regions.iter().enumerate() {
        if r.k == 0 {
            return Err(violation(format!("K_{k} must be positive")));
        }
        if !(r.theta.is_finite() && (0.0..TAU).contains(&r.theta)) {
            return Err(violation(format!("theta_{k} = {} is outside [0, 2pi)", r.theta)));
        }
    }
    if regions[0].m <= 1 {
        return Err(violation("1 < M_0 is required"));
    }
    if regions[0].m % 2 == 0 {
        return Err(violation(format!("M_0 = {} must be odd", regions[0].m)));
    }
    for k in 1..regions.len() {
        let (prev, next) = (&regions[k - 1], &regions[k]);
        if next.m <= prev.end() {
            return Err(violation(format!("regions {} and {k} overlap or are out of order", k - 1)));
        }
        if (next.m - prev.end()) % 2 == 0 {
            return Err(violation(format!(
                "M_{k} - M_{} - K_{} = {} must be odd",
                k - 1,
                k - 1,
                next.m - prev.end()
            )));
        }
    }
    let last = regions[regions.len() - 1];
    if last.end() >= n {
        return Err(violation(format!("M_last + K_last = {} must be below N = {n}", last.end())));
    }
    if (n - last.end()) % 2 != 0 {
        return Err(violation(format!("N - M_last - K_last = {} must be even", n - last.end())));
    }
    Ok(())
}

impl M1Spec {
    pub fn validate(&self, premises: &Premises) -> Result<()> {
        if self.k == 0 {
            return Err(violation("K must be positive"));
        }
        if self.m <= 1 || self.m + self.k >= self.n {
            return Err(violation(format!("1 < M < M+K < N fails for N={}, M={}, K={}", self.n, self.m, self.k)));
        }
        if self.m % 2 == 0 {
            return Err(violation(format!("M = {} must be odd", self.m)));
        }
        if (self.n - self.m - self.k) % 2 != 0 {
            return Err(violation(format!("N - M - K = {} must be even", self.n - self.m - self.k)));
        }
        if premises.strict {
            if 2 * self.k > self.m {
                return Err(violation(format!("K = {} exceeds M/2", self.k)));
            }
            if 10 * self.k > self.n {
                return Err(violation(format!("K = {} exceeds N/10", self.k)));
            }
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        Region::new(self.m, self.k, 0.0)
    }
}

impl M2Spec {
    pub fn validate(&self) -> Result<()> {
        check_regions(self.n, &self.regions())
    }
}

impl M3Spec {
    pub fn validate(&self) -> Result<()> {
        check_regions(self.n, &self.regions)
    }
}

/// Amplitudes for blocks `regions` inside alternating tails; no validation.
fn region_amplitudes(n: usize, regions: &[Region]) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(n);
    let mut next = 0;
    let mut last_end: Option<usize> = None;
    for i in 1..=n {
        if next < regions.len() && i >= regions[next].m {
            let r = regions[next];
            amps.push(Complex64::from_polar(1.0, -r.theta));
            if i == r.end() {
                last_end = Some(i);
                next += 1;
            }
            continue;
        }
        let sign = match last_end {
            None => i - 1,
            Some(e) => i - e,
        };
        amps.push(Complex64::new(if sign % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
    }
    amps
}

pub fn build_m1(spec: &M1Spec) -> Result<PathEnsemble> {
    spec.validate(&Premises::default())?;
    make_indexed_ensemble(region_amplitudes(spec.n, &[spec.region()]))
}

pub fn build_m2(spec: &M2Spec) -> Result<PathEnsemble> {
    spec.validate()?;
    make_indexed_ensemble(region_amplitudes(spec.n, &spec.regions()))
}

pub fn build_m3(spec: &M3Spec) -> Result<PathEnsemble> {
    spec.validate()?;
    make_indexed_ensemble(region_amplitudes(spec.n, &spec.regions))
}

/// A closed-form prediction at one index, in units of the normalisation
/// constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// Inside one of the stated regime ranges.
    Covered(f64),
    /// Within `D` of either end of the list.
    Boundary(f64),
    /// Not covered by any stated range.
    Uncovered,
}

impl ClosedForm {
    pub fn value(&self) -> Option<f64> {
        match *self {
            ClosedForm::Covered(v) | ClosedForm::Boundary(v) => Some(v),
            ClosedForm::Uncovered => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            ClosedForm::Covered(_) => "covered",
            ClosedForm::Boundary(_) => "boundary",
            ClosedForm::Uncovered => "uncovered",
        }
    }
}

/// Edge values for `i <= D` and `i > N - D`, where the window is truncated by
/// the list end and meets only the alternating tail.
fn boundary_value(i: usize, n: usize, d: usize) -> Option<f64> {
    if i <= d {
        Some(0.25 / (i as f64 + d as f64 - 0.5))
    } else if i > n - d {
        Some(0.25 / ((n - i) as f64 + d as f64 + 0.5))
    } else {
        None
    }
}

fn check_index(i: usize, n: usize, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::PreconditionViolation("D must be positive".into()));
    }
    if i == 0 || i > n {
        return Err(Error::PreconditionViolation(format!("index {i} outside 1..={n}")));
    }
    Ok(())
}

/// Piecewise prediction for M1 under the step distance with window `d`.
pub fn m1_closed_form(i: usize, spec: &M1Spec, d: usize, premises: &Premises) -> Result<ClosedForm> {
    spec.validate(premises)?;
    check_index(i, spec.n, d)?;
    let (n, m, k) = (spec.n as i64, spec.m as i64, spec.k as i64);
    let (ii, dd) = (i as i64, d as i64);
    if m <= 2 * dd + 1 {
        return Err(Error::PreconditionViolation(format!("M = {m} must exceed 2D+1 = {}", 2 * dd + 1)));
    }
    if n - m - k <= 2 * dd + 1 {
        return Err(Error::PreconditionViolation(format!("N-M-K = {} must exceed 2D+1 = {}", n - m - k, 2 * dd + 1)));
    }
    if premises.strict && !premises.much_less(d, spec.n) {
        return Err(Error::PreconditionViolation(format!("D = {d} is not << N = {n}")));
    }
    if let Some(v) = boundary_value(i, spec.n, d) {
        return Ok(ClosedForm::Boundary(v));
    }
    let two_d = 2.0 * d as f64;
    let sq = |x: i64| (x * x) as f64 / two_d;
    let value = if 2 * dd > k {
        if (dd + 1 < ii && ii < m - dd) || (n - (dd + 1) > ii && ii > m + k + dd) {
            Some(0.0)
        } else if m + k - dd < ii && ii < m + dd {
            Some(sq(k))
        } else if m < ii + dd && ii + dd < m + k {
            Some(sq(ii + dd - m))
        } else if m < ii - dd && ii - dd < m + k {
            Some(sq(m + k - ii + dd))
        } else {
            None
        }
    } else if (dd + 1 <= ii && ii < m - dd) || (n - (dd + 1) >= ii && ii > m + k + dd) {
        Some(0.0)
    } else if m + dd < ii && ii < m + k - dd {
        Some(two_d)
    } else if ii - dd < m && m < ii + dd {
        Some(sq(ii + dd - m))
    } else if ii - dd < m + k && m + k < ii + dd {
        Some(sq(m + k - ii + dd))
    } else {
        None
    };
    Ok(value.map_or(ClosedForm::Uncovered, ClosedForm::Covered))
}

/// The two M2 regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum M2Case {
    /// Both blocks inside one window: interference.
    #[serde(rename = "i")]
    Close,
    /// Blocks further apart than a window: no interference.
    #[serde(rename = "ii")]
    Distant,
}

impl std::str::FromStr for M2Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" | "1" | "close" => Ok(M2Case::Close),
            "ii" | "2" | "distant" => Ok(M2Case::Distant),
            _ => Err(Error::Parse(format!("unknown M2 case {s:?}"))),
        }
    }
}

/// Checks the regime premises for `case`.
pub fn m2_premises(spec: &M2Spec, d: usize, case: M2Case, premises: &Premises) -> Result<()> {
    spec.validate()?;
    let fail = |msg: String| Err(Error::PreconditionViolation(msg));
    if spec.m0 <= 2 * d + 1 {
        return fail(format!("M0 = {} must exceed 2D+1 = {}", spec.m0, 2 * d + 1));
    }
    if spec.n - spec.m1 - spec.k1 <= 2 * d + 1 {
        return fail(format!("N-M1-K1 = {} must exceed 2D+1 = {}", spec.n - spec.m1 - spec.k1, 2 * d + 1));
    }
    if !premises.much_less(spec.k0, d) || !premises.much_less(spec.k1, d) {
        return fail(format!("K0 = {} and K1 = {} must be << D = {d}", spec.k0, spec.k1));
    }
    match case {
        M2Case::Close => {
            let span = spec.m1 + spec.k1 - spec.m0;
            if !premises.much_less(span, d) {
                return fail(format!("M1+K1-M0 = {span} must be << D = {d}"));
            }
        }
        M2Case::Distant => {
            if 2 * d + 1 >= spec.m1 - spec.m0 - spec.k0 {
                return fail(format!("2D+1 = {} must be below M1-M0-K0 = {}", 2 * d + 1, spec.m1 - spec.m0 - spec.k0));
            }
        }
    }
    Ok(())
}

/// Prediction for M2 in regime `case`.
pub fn m2_closed_form(i: usize, spec: &M2Spec, d: usize, case: M2Case, premises: &Premises) -> Result<ClosedForm> {
    m2_premises(spec, d, case, premises)?;
    check_index(i, spec.n, d)?;
    if let Some(v) = boundary_value(i, spec.n, d) {
        return Ok(ClosedForm::Boundary(v));
    }
    let two_d = 2.0 * d as f64;
    let (lo, hi) = (i as i64 - d as i64, i + d);
    let spans = |r: &Region| lo < r.m as i64 && hi > r.end();
    let regions = spec.regions();
    let value = match case {
        M2Case::Close => {
            if lo < spec.m0 as i64 && hi > regions[1].end() {
                Some(M3Spec { n: spec.n, regions: regions.to_vec() }.quantum_amplitude().norm_sqr() / two_d)
            } else {
                None
            }
        }
        M2Case::Distant => regions.iter().find(|r| spans(r)).map(|r| ((r.k + 1) * (r.k + 1)) as f64 / two_d),
    };
    Ok(value.map_or(ClosedForm::Uncovered, ClosedForm::Covered))
}

/// Relative tolerance for M2 comparisons, `3 / (min K + 1)`.
pub fn m2_tolerance(spec: &M2Spec) -> f64 {
    3.0 / (spec.k0.min(spec.k1) + 1) as f64
}

/// Whether an unnormalised direct value agrees with an M2 closed form.
///
/// The smeared sum differs from the block sum `S` by a tail residue `r` with
/// `|r| <= 1`, so `||S + r|^2 - |S|^2| <= 2|S| + 1`. Measured against
/// `max(|S|^2, (K_min + 1)^2) / 2D` this is within the tolerance everywhere,
/// including near fully destructive settings.
pub fn m2_agrees(direct: f64, closed: f64, spec: &M2Spec, d: usize) -> bool {
    let kmin = (spec.k0.min(spec.k1) + 1) as f64;
    let scale = closed.max(kmin * kmin / (2.0 * d as f64));
    (direct - closed).abs() <= m2_tolerance(spec) * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn m1(n: usize, m: usize, k: usize) -> M1Spec {
        M1Spec { n, m, k }
    }

    #[test]
    fn m1_pattern() {
        let e = build_m1(&m1(24, 9, 3)).unwrap();
        let re: Vec<f64> = e.amplitudes().iter().map(|a| a.re).collect();
        let want = [
            1., -1., 1., -1., 1., -1., 1., -1., 1., 1., 1., 1., -1., 1., -1., 1., -1., 1., -1., 1., -1., 1., -1., 1.,
        ];
        assert_eq!(re, want);
        assert!(e.amplitudes().iter().all(|a| a.im == 0.0));
    }

    #[test]
    fn m1_violations() {
        assert!(matches!(build_m1(&m1(24, 8, 3)), Err(Error::SpecViolation(s)) if s.contains("odd")));
        assert!(matches!(build_m1(&m1(25, 9, 3)), Err(Error::SpecViolation(s)) if s.contains("even")));
        assert!(build_m1(&m1(12, 9, 3)).is_err());
        assert!(m1(24, 9, 3).validate(&Premises::strict()).is_err());
        assert!(m1(240, 9, 3).validate(&Premises::strict()).is_ok());
    }

    #[test]
    fn m1_total_is_block_size() {
        for (n, m, k) in [(24, 9, 3), (101, 41, 6), (51, 3, 2)] {
            let e = build_m1(&m1(n, m, k)).unwrap();
            assert!((e.total_amplitude() - Complex64::new((k + 1) as f64, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn m1_closed_form_examples() {
        let s = m1(24, 9, 3);
        let p = Premises::default();
        assert_eq!(m1_closed_form(5, &s, 3, &p).unwrap(), ClosedForm::Covered(0.0));
        assert_eq!(m1_closed_form(10, &s, 3, &p).unwrap(), ClosedForm::Covered(9.0 / 6.0));
        assert_eq!(m1_closed_form(11, &s, 3, &p).unwrap(), ClosedForm::Covered(9.0 / 6.0));
        assert_eq!(m1_closed_form(7, &s, 3, &p).unwrap(), ClosedForm::Covered(1.0 / 6.0));
        assert_eq!(m1_closed_form(8, &s, 3, &p).unwrap(), ClosedForm::Covered(4.0 / 6.0));
        assert_eq!(m1_closed_form(1, &s, 3, &p).unwrap(), ClosedForm::Boundary(1.0 / 14.0));
        assert_eq!(m1_closed_form(24, &s, 3, &p).unwrap(), ClosedForm::Boundary(1.0 / 14.0));
        assert_eq!(m1_closed_form(12, &s, 3, &p).unwrap(), ClosedForm::Uncovered);
        assert!(matches!(m1_closed_form(5, &s, 4, &p), Err(Error::PreconditionViolation(_))));
        assert!(matches!(m1_closed_form(25, &s, 3, &p), Err(Error::PreconditionViolation(_))));
    }

    #[test]
    fn m2_degenerates_to_two_plateaus() {
        let s = M2Spec { n: 41, m0: 9, k0: 3, m1: 17, k1: 2, theta0: 0.0, theta1: 0.0 };
        let e = build_m2(&s).unwrap();
        let a = e.amplitudes();
        assert!((9..=12).chain(17..=19).all(|i| a[i - 1] == Complex64::new(1.0, 0.0)));
        assert_eq!(a[12].re, -1.0);
        assert_eq!(a[15].re, 1.0);
        assert!((e.total_amplitude().re - 7.0).abs() < 1e-12);
    }

    #[test]
    fn m3_single_region_is_m1() {
        let a = build_m3(&M3Spec { n: 24, regions: vec![Region::new(9, 3, 0.0)] }).unwrap();
        assert_eq!(a, build_m1(&m1(24, 9, 3)).unwrap());
        let b = build_m3(&M3Spec { n: 24, regions: vec![Region::new(9, 3, 1.0)] }).unwrap();
        assert!((b.amplitude(10) - Complex64::from_polar(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn m3_parity_is_enforced() {
        let bad = M3Spec { n: 200, regions: vec![Region::new(31, 4, 0.0), Region::new(41, 4, PI)] };
        assert!(matches!(build_m3(&bad), Err(Error::SpecViolation(s)) if s.contains("odd")));
        let good = M3Spec { n: 200, regions: vec![Region::new(31, 4, 0.0), Region::new(42, 4, PI)] };
        let e = build_m3(&good).unwrap();
        assert!(e.total_amplitude().norm() < 1e-12);
        assert!(good.quantum_amplitude().norm() < 1e-12);
    }

    #[test]
    fn m2_closed_form_examples() {
        let p = Premises::default();
        let close = |t1: f64| M2Spec { n: 2000, m0: 803, k0: 4, m1: 810, k1: 4, theta0: 0.0, theta1: t1 };
        let d = 400;
        let i = 700;
        assert_eq!(m2_closed_form(i, &close(PI), d, M2Case::Close, &p).unwrap().value().map(|v| v < 1e-25), Some(true));
        let v = m2_closed_form(i, &close(0.0), d, M2Case::Close, &p).unwrap();
        assert!((v.value().unwrap() - 4.0 * 25.0 / 800.0).abs() < 1e-12);

        let far = M2Spec { n: 401, m0: 41, k0: 4, m1: 100, k1: 9, theta0: 0.0, theta1: 0.0 };
        let b0 = m2_closed_form(45, &far, 12, M2Case::Distant, &Premises { factor: 1.0, strict: false }).unwrap();
        let b1 = m2_closed_form(105, &far, 12, M2Case::Distant, &Premises { factor: 1.0, strict: false }).unwrap();
        assert!((b0.value().unwrap() / b1.value().unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(m2_closed_form(45, &far, 12, M2Case::Distant, &p), Err(Error::PreconditionViolation(_))));
    }

    #[test]
    fn json_forms() {
        let t: ToyModel = serde_json::from_str(r#"{"model":"M1","N":24,"M":9,"K":3,"D":3}"#).unwrap();
        assert_eq!(t, ToyModel::M1(m1(24, 9, 3)));
        let t: ToyModel =
            serde_json::from_str(r#"{"model":"M3","N":200,"regions":[{"M":31,"K":4,"theta":0},{"M":42,"K":4}]}"#)
                .unwrap();
        assert_eq!(t.n(), 200);
        assert!(t.build().is_ok());
    }
}
