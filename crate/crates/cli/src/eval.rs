//! Model evaluation shared by the subcommands.

use std::f64::consts::PI;

use realpath::distance::{exp_index_distance, step_distance_with, DistanceName, DistanceSpec, StepConvention};
use realpath::engine::{path_probabilities, uniform, visibility, PairDistance, PathDistribution};
use realpath::lattice::{arm_of, enumerate_paths, run_lattice_experiment, two_arm_experiment, LatticeWeight};
use realpath::screen::{evaluate_screen, ScreenResult};
use realpath::toy::{Premises, ToyModel};
use realpath::Result;

use crate::config::{Model, RunConfig};

/// Index distance on 0-based ensemble positions.
pub struct IndexDistance {
    name: DistanceName,
    window: usize,
    scale: f64,
    convention: StepConvention,
}

impl IndexDistance {
    pub fn new(spec: &DistanceSpec, convention: StepConvention) -> Result<Self> {
        spec.validate()?;
        // Rejects geometric variants.
        spec.index_distance(1, 1, convention)?;
        Ok(Self { name: spec.name, window: spec.window.unwrap_or(1), scale: spec.scale(), convention })
    }
}

impl PairDistance for IndexDistance {
    fn distance(&self, i: usize, j: usize) -> f64 {
        let d = match self.name {
            DistanceName::Step => step_distance_with(i, j, self.window, self.convention),
            _ => exp_index_distance(i, j, self.window),
        };
        if self.scale == 0.0 {
            0.0
        } else if self.scale == 1.0 {
            d
        } else {
            d * self.scale
        }
    }

    fn band(&self) -> Option<usize> {
        (self.name == DistanceName::Step).then_some(self.window)
    }
}

/// Options shared by every evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub convention: StepConvention,
    pub premises: Premises,
}

pub fn toy_distribution(toy: &ToyModel, d: &DistanceSpec, s: &Settings) -> Result<PathDistribution> {
    if let ToyModel::M1(spec) = toy {
        spec.validate(&s.premises)?;
    }
    let e = toy.build()?;
    path_probabilities(&e, &IndexDistance::new(d, s.convention)?, uniform)
}

pub fn screen_result(spec: &realpath::screen::ScreenSpec, s: &Settings) -> Result<ScreenResult> {
    let mut spec = spec.clone();
    if s.convention == StepConvention::LiteralLogHalf {
        spec.convention = StepConvention::LiteralLogHalf;
    }
    evaluate_screen(&spec)
}

fn corridor_offset(w: &LatticeWeight) -> i64 {
    match *w {
        LatticeWeight::TwoArm { offset } => offset,
        _ => 1,
    }
}

/// Named summary values of one model.
pub type Summaries = Vec<(&'static str, f64)>;

fn shifted_last_phase(toy: &ToyModel) -> Option<ToyModel> {
    match toy {
        ToyModel::M1(_) => None,
        ToyModel::M2(s) => {
            let mut s = *s;
            s.theta1 += PI;
            Some(ToyModel::M2(s))
        }
        ToyModel::M3(s) if s.regions.len() > 1 => {
            let mut s = s.clone();
            s.regions.last_mut().expect("several regions").theta += PI;
            Some(ToyModel::M3(s))
        }
        ToyModel::M3(_) => None,
    }
}

fn block_span(toy: &ToyModel) -> (usize, usize) {
    match toy {
        ToyModel::M1(s) => (s.m, s.m + s.k),
        ToyModel::M2(s) => s.as_m3().block_span(),
        ToyModel::M3(s) => s.block_span(),
    }
}

/// Derived summaries of one sweep cell.
///
/// Visibility compares unnormalised totals with the last block's phase at
/// `theta` and `theta + pi` (toy models), the two output ports (lattice), or
/// the detection probabilities (screen). Block mass is the probability within
/// `D` of the blocks, or inside the corridors on the lattice.
pub fn summaries(cfg: &RunConfig, s: &Settings) -> Result<Summaries> {
    match &cfg.model {
        Model::Toy(toy) => {
            let d = cfg.distance.expect("toy distance");
            let dist = toy_distribution(toy, &d, s)?;
            let vis = match shifted_last_phase(toy) {
                Some(other) => {
                    let b = toy_distribution(&other, &d, s)?;
                    visibility(&[dist.unnormalized_total(), b.unnormalized_total()])
                }
                None => 0.0,
            };
            let (lo, hi) = block_span(toy);
            let w = d.window.unwrap_or(0);
            let first = lo.saturating_sub(w).max(1);
            let last = (hi + w).min(dist.len());
            let mass = dist.probs[first - 1..last].iter().sum();
            Ok(vec![("visibility", vis), ("block_mass", mass), ("norm_constant", dist.norm_constant)])
        }
        Model::Screen(spec) => {
            let r = screen_result(spec, s)?;
            let total: f64 = r.weights.iter().sum();
            Ok(vec![("visibility", visibility(&r.probs)), ("norm_constant", 1.0 / total)])
        }
        Model::Lattice(spec) => {
            let d = cfg.distance.expect("lattice distance");
            let offset = corridor_offset(&cfg.weight);
            let vis = two_arm_experiment(spec, &d, offset)?.visibility;
            let dist = run_lattice_experiment(spec, &d, &cfg.weight)?;
            let lat = enumerate_paths(spec)?;
            let mass =
                lat.sites.iter().zip(&dist.probs).filter(|(x, _)| arm_of(x, offset).is_some()).map(|(_, p)| p).sum();
            Ok(vec![("visibility", vis), ("block_mass", mass), ("norm_constant", dist.norm_constant)])
        }
    }
}
