//! Distances between composite paths built from component distances.
//!
//! Extended-real conventions: `+inf` absorbs under max, sum and average; a
//! geometric mean containing `+inf` is `+inf`, otherwise one containing 0 is 0.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::distance::{galilean_distance, DistanceSpec, StepConvention};
use crate::error::{Error, Result};
use crate::path::{CompositeKind, CompositePath, PathNode};

/// Largest arity for exhaustive permutation symmetrisation.
pub const MAX_SYMMETRIZED_COMPONENTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductRule {
    #[default]
    Max,
    Sum,
    Average,
    GeometricMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceRule {
    #[default]
    Max,
}

/// JSON form: `{"product":"max","sequence":"max","symmetrize":false}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompositionRule {
    #[serde(default)]
    pub product: ProductRule,
    #[serde(default)]
    pub sequence: SequenceRule,
    #[serde(default)]
    pub symmetrize: bool,
}

impl CompositionRule {
    pub fn max() -> Self {
        Self::default()
    }

    pub fn with_product(product: ProductRule) -> Self {
        Self { product, ..Self::default() }
    }
}

impl ProductRule {
    /// Combines component distances.
    pub fn combine(self, parts: &[f64]) -> Result<f64> {
        if parts.is_empty() {
            return Err(Error::StructureMismatch("no component distances to combine".into()));
        }
        let has_inf = parts.iter().any(|d| *d == f64::INFINITY);
        let out = match self {
            ProductRule::Max => parts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ProductRule::Sum => parts.iter().sum(),
            ProductRule::Average => {
                if has_inf {
                    f64::INFINITY
                } else {
                    parts.iter().sum::<f64>() / parts.len() as f64
                }
            }
            ProductRule::GeometricMean => {
                if parts.iter().any(|d| *d < 0.0) {
                    return Err(Error::InvalidDistance("geometric mean of a negative distance".into()));
                }
                if has_inf {
                    f64::INFINITY
                } else if parts.iter().any(|d| *d == 0.0) {
                    0.0
                } else if parts.len() == 2 {
                    (parts[0] * parts[1]).sqrt()
                } else {
                    parts.iter().product::<f64>().powf(1.0 / parts.len() as f64)
                }
            }
        };
        Ok(out)
    }
}

impl SequenceRule {
    pub fn combine(self, parts: &[f64]) -> Result<f64> {
        if parts.is_empty() {
            return Err(Error::StructureMismatch("no component distances to combine".into()));
        }
        Ok(parts.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Distance between two leaves under `base`: index distances for indexed
/// leaves of the same family, `+inf` across families, Galilean distances for
/// spacetime leaves.
pub fn leaf_distance(a: &PathNode, b: &PathNode, base: &DistanceSpec, convention: StepConvention) -> Result<f64> {
    match (a, b) {
        (PathNode::Indexed(p), PathNode::Indexed(q)) => {
            if p.family != q.family {
                Ok(f64::INFINITY)
            } else {
                base.index_distance(p.index, q.index, convention)
            }
        }
        (PathNode::Spacetime(p), PathNode::Spacetime(q)) => galilean_distance(p, q, base),
        _ => Err(Error::StructureMismatch("leaves of different kinds".into())),
    }
}

/// Recursive composite distance with a caller-supplied leaf distance.
pub fn composite_distance_by<F>(p: &PathNode, q: &PathNode, rule: &CompositionRule, leaf: &mut F) -> Result<f64>
where
    F: FnMut(&PathNode, &PathNode) -> Result<f64>,
{
    match (p, q) {
        (PathNode::Composite(cp), PathNode::Composite(cq)) => {
            if cp.kind() != cq.kind() || cp.components().len() != cq.components().len() {
                return Err(Error::StructureMismatch(format!(
                    "{:?} of {} vs {:?} of {}",
                    cp.kind(),
                    cp.components().len(),
                    cq.kind(),
                    cq.components().len()
                )));
            }
            let parts = cp
                .components()
                .iter()
                .zip(cq.components())
                .map(|(a, b)| composite_distance_by(a, b, rule, leaf))
                .collect::<Result<Vec<_>>>()?;
            match cp.kind() {
                CompositeKind::Product => rule.product.combine(&parts),
                CompositeKind::Sequence => rule.sequence.combine(&parts),
            }
        }
        (PathNode::Composite(_), _) | (_, PathNode::Composite(_)) => {
            Err(Error::StructureMismatch("composite compared with a leaf".into()))
        }
        _ => leaf(p, q),
    }
}

/// Composite distance: product rule across product components, max across
/// sequence components, `base` on the leaves.
pub fn composite_distance(p: &CompositePath, q: &CompositePath, rule: &CompositionRule, base: &DistanceSpec) -> Result<f64> {
    let (p, q) = (PathNode::Composite(p.clone()), PathNode::Composite(q.clone()));
    composite_distance_by(&p, &q, rule, &mut |a, b| leaf_distance(a, b, base, StepConvention::Corrected))
}

/// Minimum of the composite distance over all permutations of the
/// components of `q`. Both arguments must be products of equal arity.
pub fn symmetrized_distance(p: &CompositePath, q: &CompositePath, rule: &CompositionRule, base: &DistanceSpec) -> Result<f64> {
    symmetrized_distance_by(p, q, rule, &mut |a, b| leaf_distance(a, b, base, StepConvention::Corrected))
}

pub fn symmetrized_distance_by<F>(p: &CompositePath, q: &CompositePath, rule: &CompositionRule, leaf: &mut F) -> Result<f64>
where
    F: FnMut(&PathNode, &PathNode) -> Result<f64>,
{
    if p.kind() != CompositeKind::Product || q.kind() != CompositeKind::Product {
        return Err(Error::StructureMismatch("symmetrisation needs product composites".into()));
    }
    let n = p.components().len();
    if n != q.components().len() {
        return Err(Error::StructureMismatch(format!("arity {n} vs {}", q.components().len())));
    }
    if n > MAX_SYMMETRIZED_COMPONENTS {
        return Err(Error::TooManyComponents { n, limit: MAX_SYMMETRIZED_COMPONENTS });
    }
    // pairwise[a][b] = d(P_a, Q_b)
    let mut pairwise = vec![vec![0.0; n]; n];
    for (a, pa) in p.components().iter().enumerate() {
        for (b, qb) in q.components().iter().enumerate() {
            pairwise[a][b] = composite_distance_by(pa, qb, rule, leaf)?;
        }
    }
    let mut best = f64::INFINITY;
    let mut parts = vec![0.0; n];
    for perm in (0..n).permutations(n) {
        for (a, &b) in perm.iter().enumerate() {
            parts[a] = pairwise[a][b];
        }
        let d = rule.product.combine(&parts)?;
        if d < best {
            best = d;
        }
    }
    Ok(best)
}

/// Dispatches on `rule.symmetrize`.
pub fn distance(p: &CompositePath, q: &CompositePath, rule: &CompositionRule, base: &DistanceSpec) -> Result<f64> {
    if rule.symmetrize {
        symmetrized_distance(p, q, rule, base)
    } else {
        composite_distance(p, q, rule, base)
    }
}
