//! JSON system and point descriptions.
//!
//! A system document has the shape `{"kind", "label", "parameters"}`:
//!
//! ```json
//! {"kind": "sft", "label": "golden", "parameters": {"transitions": [[1,1],[1,0]]}}
//! {"kind": "circle_grid", "label": "rot", "parameters": {"grid_size": 12, "map": {"rotation": {"step": 4}}}}
//! {"kind": "circle_grid", "label": "odo", "parameters": {"grid_size": 1024, "map": {"odometer": {"depth": 10}}, "metric": "two_adic"}}
//! {"kind": "product", "label": "gxf", "parameters": {"factors": [<sft spec>, <sft spec>]}}
//! {"kind": "substitution_subshift", "label": "tm", "parameters": {"rules": [[0,1],[1,0]], "seed": 0, "language_length": 64}}
//! ```
//!
//! Errors carry the JSON path of the offending field.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::grid::{GridMap, GridMetric, GridSystem};
use super::point::SymbolicPoint;
use super::sft::{Sft, Sidedness, Symbol};
use super::substitution::{SubstitutionSubshift, DEFAULT_LANGUAGE_LENGTH};
use super::{Point, System, SystemKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    Sft,
    CircleGrid,
    Product,
    SubstitutionSubshift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub kind: SpecKind,
    pub label: String,
    pub parameters: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SftParams {
    alphabet_size: Option<usize>,
    transitions: Vec<Vec<u8>>,
    #[serde(default)]
    sidedness: Sidedness,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridParams {
    grid_size: u64,
    map: GridMap,
    metric: Option<GridMetric>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductParams {
    factors: Vec<SystemSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubstitutionParams {
    rules: Vec<Vec<Symbol>>,
    #[serde(default)]
    seed: Symbol,
    #[serde(default = "default_language_length")]
    language_length: usize,
}

fn default_language_length() -> usize {
    DEFAULT_LANGUAGE_LENGTH
}

fn params<T: DeserializeOwned>(value: &Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value.clone()).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
        Error::spec(path, e.into_inner().to_string())
    })
}

impl SystemSpec {
    /// Parses a system document, reporting the JSON path (and, for syntax or
    /// type errors, the line and column) of the first problem.
    pub fn from_json(text: &str) -> Result<SystemSpec> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::spec(path, e.into_inner().to_string())
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn sft(label: &str, transitions: &[Vec<u8>]) -> SystemSpec {
        SystemSpec {
            kind: SpecKind::Sft,
            label: label.into(),
            parameters: serde_json::json!({ "transitions": transitions }),
        }
    }
}

fn build_sft(spec: &SystemSpec, prefix: &str) -> Result<Sft> {
    let p: SftParams = params(&spec.parameters, prefix)?;
    if let Some(n) = p.alphabet_size {
        if n != p.transitions.len() {
            return Err(Error::spec(
                format!("{prefix}.alphabet_size"),
                format!("alphabet_size {n} does not match a {}-row transition matrix", p.transitions.len()),
            ));
        }
    }
    Sft::new(&p.transitions, p.sidedness).map_err(|e| match e {
        Error::InvalidSpec { path, message } => {
            Error::InvalidSpec { path: path.replacen("parameters", prefix, 1), message }
        }
        other => other,
    })
}

/// Validates a spec and builds the system it describes.
pub fn build_system(spec: &SystemSpec) -> Result<System> {
    let kind = match spec.kind {
        SpecKind::Sft => SystemKind::Sft(build_sft(spec, "parameters")?),
        SpecKind::CircleGrid => {
            let p: GridParams = params(&spec.parameters, "parameters")?;
            let metric = p.metric.unwrap_or(match p.map {
                GridMap::Odometer { .. } => GridMetric::TwoAdic,
                _ => GridMetric::Circle,
            });
            SystemKind::Grid(GridSystem::new(p.grid_size, p.map, metric)?)
        }
        SpecKind::Product => {
            let p: ProductParams = params(&spec.parameters, "parameters")?;
            if p.factors.len() != 2 {
                return Err(Error::spec("parameters.factors", "a product takes exactly two factors"));
            }
            let mut sfts = Vec::with_capacity(2);
            for (i, f) in p.factors.iter().enumerate() {
                if f.kind != SpecKind::Sft {
                    return Err(Error::spec(format!("parameters.factors[{i}].kind"), "product factors must be sft"));
                }
                sfts.push(build_sft(f, &format!("parameters.factors[{i}].parameters"))?);
            }
            SystemKind::Sft(sfts[0].product(&sfts[1])?)
        }
        SpecKind::SubstitutionSubshift => {
            let p: SubstitutionParams = params(&spec.parameters, "parameters")?;
            SystemKind::Substitution(SubstitutionSubshift::new(p.rules, p.seed, p.language_length)?)
        }
    };
    Ok(System::new(spec.label.clone(), kind))
}

/// JSON description of a point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PointSpec {
    Periodic { periodic: Vec<Symbol> },
    Symbolic { left: Vec<Symbol>, #[serde(default)] core: Vec<Symbol>, right: Vec<Symbol>, #[serde(default)] origin: i64 },
    Grid { grid: u64 },
    GridFraction { grid_fraction: [u64; 2] },
}

impl PointSpec {
    pub fn resolve(&self, system: &System) -> Result<Point> {
        let p = match (self, &system.kind) {
            (PointSpec::Periodic { periodic }, SystemKind::Sft(s)) => {
                if periodic.is_empty() {
                    return Err(Error::InvalidPoint("periodic word must be nonempty".into()));
                }
                Point::Symbolic(SymbolicPoint::new(s, periodic.clone(), vec![], periodic.clone(), 0)?)
            }
            (PointSpec::Symbolic { left, core, right, origin }, SystemKind::Sft(s)) => {
                Point::Symbolic(SymbolicPoint::new(s, left.clone(), core.clone(), right.clone(), *origin)?)
            }
            (PointSpec::Grid { grid }, SystemKind::Grid(_)) => Point::Grid(*grid),
            (PointSpec::GridFraction { grid_fraction: [n, d] }, SystemKind::Grid(g)) => {
                if *d == 0 {
                    return Err(Error::InvalidPoint("zero denominator".into()));
                }
                Point::Grid(g.point_at(*n, *d))
            }
            _ => return Err(Error::SystemMismatch),
        };
        system.check_point(&p)?;
        Ok(p)
    }

    pub fn from_point(p: &Point) -> PointSpec {
        match p {
            Point::Symbolic(x) if x.is_periodic() => PointSpec::Periodic { periodic: x.right.clone() },
            Point::Symbolic(x) => PointSpec::Symbolic {
                left: x.left.clone(),
                core: x.core.clone(),
                right: x.right.clone(),
                origin: x.origin,
            },
            Point::Grid(a) => PointSpec::Grid { grid: *a },
        }
    }
}
