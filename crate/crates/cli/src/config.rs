//! Run configuration documents.
//!
//! A config is one flat JSON object holding a model spec tagged by `"model"`
//! (`M1`, `M2`, `M3`, `screen` or `lattice`) next to the optional keys
//! `distance`, `D`, `weight`, `case` and `sweep`:
//!
//! ```json
//! {"model": "M1", "N": 24, "M": 9, "K": 3, "D": 3}
//! ```

use serde::Deserialize;
use serde_json::{Map, Number, Value};

use realpath::distance::DistanceSpec;
use realpath::lattice::{LatticeSpec, LatticeWeight};
use realpath::screen::ScreenSpec;
use realpath::toy::{M2Case, ToyModel};

use crate::failure::{Failure, Outcome};

/// Largest number of cells a sweep may evaluate.
pub const MAX_GRID_CELLS: u64 = 10_000;

const RESERVED: [&str; 5] = ["model", "distance", "weight", "case", "sweep"];
const DISTANCE_FIELDS: [&str; 3] = ["D", "mass", "scale"];
const WEIGHT_FIELDS: [&str; 2] = ["offset", "max_change"];

#[derive(Debug, Clone)]
pub enum Model {
    Toy(ToyModel),
    Screen(ScreenSpec),
    Lattice(LatticeSpec),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    /// `None` only for screen models, which carry their own window.
    pub distance: Option<DistanceSpec>,
    pub weight: LatticeWeight,
    pub case: Option<M2Case>,
    pub sweep: Vec<Axis>,
    /// The document this config was read from.
    pub raw: Map<String, Value>,
}

/// One sweep parameter and its values.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub values: Vec<Number>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AxisList {
    One(Axis),
    Many(Vec<Axis>),
}

fn take<T: for<'de> Deserialize<'de>>(obj: &mut Map<String, Value>, key: &str) -> Outcome<Option<T>> {
    match obj.remove(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| Failure::usage(format!("config key {key:?}: {e}"))),
    }
}

impl RunConfig {
    pub fn from_value(value: Value) -> Outcome<Self> {
        let Value::Object(raw) = value else {
            return Err(Failure::usage("config must be a JSON object"));
        };
        let mut obj = raw.clone();
        let distance: Option<DistanceSpec> = take(&mut obj, "distance")?;
        let weight: LatticeWeight = take(&mut obj, "weight")?.unwrap_or_default();
        let case: Option<M2Case> = take(&mut obj, "case")?;
        let sweep = match take::<AxisList>(&mut obj, "sweep")? {
            None => Vec::new(),
            Some(AxisList::One(a)) => vec![a],
            Some(AxisList::Many(v)) => v,
        };
        let tag = match obj.get("model") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(Failure::usage("\"model\" must be a string")),
            None => return Err(Failure::usage("config needs a \"model\" key")),
        };
        let (model, distance) = match tag.as_str() {
            "M1" | "M2" | "M3" => {
                let window: Option<usize> = take(&mut obj, "D")?;
                let toy: ToyModel = serde_json::from_value(Value::Object(obj))?;
                let distance = match (distance, window) {
                    (Some(mut d), Some(w)) => {
                        d.window = Some(w);
                        d
                    }
                    (Some(d), None) => d,
                    (None, Some(w)) => DistanceSpec::step(w),
                    (None, None) => return Err(Failure::usage("toy models need \"D\" or a \"distance\"")),
                };
                if !distance.name.is_index() {
                    return Err(Failure::data(format!("{:?} is not an index distance", distance.name)));
                }
                if weight != LatticeWeight::Uniform {
                    return Err(Failure::data("toy models take only the uniform weight"));
                }
                (Model::Toy(toy), Some(distance))
            }
            "screen" => {
                if distance.is_some() {
                    return Err(Failure::data("screen models use the step distance with their own \"D\""));
                }
                obj.remove("model");
                (Model::Screen(serde_json::from_value(Value::Object(obj))?), None)
            }
            "lattice" => {
                obj.remove("model");
                let spec: LatticeSpec = serde_json::from_value(Value::Object(obj))?;
                let Some(distance) = distance else {
                    return Err(Failure::usage("lattice models need a \"distance\""));
                };
                if distance.name.is_index() {
                    return Err(Failure::data(format!("{:?} is an index distance", distance.name)));
                }
                (Model::Lattice(spec), Some(distance))
            }
            other => return Err(Failure::usage(format!("unknown model {other:?}"))),
        };
        Ok(Self { model, distance, weight, case, sweep, raw })
    }

    /// The config with one grid point's values substituted.
    pub fn with_values(&self, values: &[(Vec<Step>, Number)]) -> Outcome<Self> {
        let mut raw = Value::Object(self.raw.clone());
        for (path, v) in values {
            *locate(&mut raw, path).expect("resolved path") = Value::Number(v.clone());
        }
        if let Value::Object(obj) = &mut raw {
            obj.remove("sweep");
        }
        Self::from_value(raw)
    }
}

/// One step of a field path: an object key or an array index.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Key(String),
    Index(usize),
}

fn locate<'a>(root: &'a mut Value, path: &[Step]) -> Option<&'a mut Value> {
    let mut cur = root;
    for step in path {
        cur = match (step, cur) {
            (Step::Key(k), Value::Object(m)) => m.entry(k.clone()).or_insert(Value::Null),
            (Step::Index(i), Value::Array(a)) => a.get_mut(*i)?,
            _ => return None,
        };
    }
    Some(cur)
}

fn lookup<'a>(root: &'a Value, path: &[Step]) -> Option<&'a Value> {
    let mut cur = root;
    for step in path {
        cur = match (step, cur) {
            (Step::Key(k), Value::Object(m)) => m.get(k)?,
            (Step::Index(i), Value::Array(a)) => a.get(*i)?,
            _ => return None,
        };
    }
    Some(cur)
}

/// Resolves a sweep name to a field of `raw`.
///
/// Dotted names (`distance.scale`, `regions.1.theta`) address a field
/// directly. A bare name picks a model field first, then a distance field,
/// then a weight field.
pub fn resolve(raw: &Map<String, Value>, name: &str) -> Outcome<Vec<Step>> {
    let root = Value::Object(raw.clone());
    let unknown = || Failure::data(format!("sweep parameter {name:?} does not name a config field"));
    if name.contains('.') {
        let path: Vec<Step> = name
            .split('.')
            .map(|s| s.parse::<usize>().map(Step::Index).unwrap_or_else(|_| Step::Key(s.to_string())))
            .collect();
        let (last, parent) = path.split_last().ok_or_else(unknown)?;
        if matches!(path.first(), Some(Step::Key(k)) if k == "sweep") {
            return Err(unknown());
        }
        let holder = lookup(&root, parent).ok_or_else(unknown)?;
        let ok = match (last, holder) {
            (Step::Key(k), Value::Object(m)) => {
                m.get(k).is_some_and(Value::is_number)
                    || (parent == [Step::Key("distance".into())] && DISTANCE_FIELDS.contains(&k.as_str()))
            }
            (Step::Index(i), Value::Array(a)) => a.get(*i).is_some_and(Value::is_number),
            _ => false,
        };
        return if ok { Ok(path) } else { Err(unknown()) };
    }
    if !RESERVED.contains(&name) && raw.get(name).is_some_and(Value::is_number) {
        return Ok(vec![Step::Key(name.to_string())]);
    }
    if DISTANCE_FIELDS.contains(&name) && raw.get("distance").is_some_and(Value::is_object) {
        return Ok(vec![Step::Key("distance".into()), Step::Key(name.to_string())]);
    }
    if WEIGHT_FIELDS.contains(&name) && raw.get("weight").and_then(|w| w.get(name)).is_some() {
        return Ok(vec![Step::Key("weight".into()), Step::Key(name.to_string())]);
    }
    Err(unknown())
}

/// Parses `NAME=v1,v2,...` or `NAME=a..b` (inclusive integer range).
pub fn parse_axis(arg: &str) -> Outcome<Axis> {
    let (name, values) = arg.split_once('=').ok_or_else(|| Failure::usage(format!("--param {arg:?} needs NAME=VALUES")))?;
    let bad = |v: &str| Failure::usage(format!("--param {name}: cannot read {v:?} as a number"));
    let values = if let Some((a, b)) = values.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| bad(a))?;
        let b: i64 = b.trim().parse().map_err(|_| bad(b))?;
        (a..=b).map(Number::from).collect()
    } else {
        values
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| {
                if let Ok(i) = v.parse::<i64>() {
                    Ok(Number::from(i))
                } else {
                    v.parse::<f64>().ok().and_then(Number::from_f64).ok_or_else(|| bad(v))
                }
            })
            .collect::<Outcome<Vec<_>>>()?
    };
    Ok(Axis { name: name.trim().to_string(), values })
}
