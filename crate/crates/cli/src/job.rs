//! Job files.
//!
//! ```json
//! {
//!   "command": "classify",
//!   "system": "full2",
//!   "seed": 0,
//!   "params": {"eps": "1/2", "n_max": 12, "L": 5, "k": 2, "M_max": 64, "pool": {"kind": "canonical"}}
//! }
//! ```
//!
//! `system` is a zoo label, an inline system document, or `{"file": path}`
//! relative to the job file.

use std::path::{Path, PathBuf};

use gluing_orbit::shadowing::CandidatePool;
use gluing_orbit::systems::{build_system, zoo, PointSpec, SystemSpec};
use gluing_orbit::{Distance, Point, System};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A problem with the job itself, with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invalid {
    pub field: String,
    pub message: String,
}

impl Invalid {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Invalid { field: field.into(), message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Classify,
    Entropy,
    Gluing,
    Dichotomy,
    Shadow,
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PoolSpec {
    Canonical,
    All,
    Sample { size: usize },
    Points { points: Vec<PointSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub point: PointSpec,
    pub length: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub eps: Option<Distance>,
    pub eps_list: Option<Vec<Distance>>,
    pub n_max: Option<usize>,
    #[serde(rename = "L")]
    pub max_length: Option<usize>,
    #[serde(rename = "k")]
    pub max_rank: Option<usize>,
    #[serde(rename = "M_max")]
    pub m_max: Option<usize>,
    pub horizon: Option<usize>,
    pub pool: Option<PoolSpec>,
    pub bases: Option<Vec<PointSpec>>,
    pub x: Option<PointSpec>,
    pub y: Option<PointSpec>,
    pub n: Option<usize>,
    pub require_stay_away: Option<bool>,
    pub segments: Option<Vec<SegmentSpec>>,
    pub gap: Option<Vec<usize>>,
    pub periodic_n_max: Option<usize>,
    pub language_cap: Option<usize>,
    pub birkhoff_samples: Option<usize>,
    pub birkhoff_n: Option<usize>,
    /// Also compute the specification profile (`gluing` on shifts).
    pub specification: Option<bool>,
    pub slack: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub system: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
}

/// A validated job with its system built.
pub struct Job {
    pub config: JobConfig,
    pub system: System,
}

fn positive(field: &str, value: Option<usize>) -> Result<(), Invalid> {
    match value {
        Some(0) => Err(Invalid::new(format!("params.{field}"), format!("{field} must be at least 1"))),
        _ => Ok(()),
    }
}

fn positive_eps(field: &str, value: Option<Distance>) -> Result<(), Invalid> {
    match value {
        Some(e) if e.is_zero() => Err(Invalid::new(format!("params.{field}"), format!("{field} must be positive"))),
        _ => Ok(()),
    }
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<JobConfig, Invalid> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Invalid::new(if path == "." { "job".to_string() } else { path }, e.into_inner().to_string())
        })
    }

    /// Checks every cap and resolves the system. `base` is the directory
    /// that `{"file": ...}` references are relative to.
    pub fn validate(self, base: &Path) -> Result<Job, Invalid> {
        let p = &self.params;
        for (name, v) in [
            ("n_max", p.n_max),
            ("L", p.max_length),
            ("k", p.max_rank),
            ("M_max", p.m_max),
            ("horizon", p.horizon),
            ("n", p.n),
            ("periodic_n_max", p.periodic_n_max),
            ("language_cap", p.language_cap),
            ("birkhoff_samples", p.birkhoff_samples),
            ("birkhoff_n", p.birkhoff_n),
        ] {
            positive(name, v)?;
        }
        if let Some(PoolSpec::Sample { size: 0 }) = p.pool {
            return Err(Invalid::new("params.pool.size", "pool size must be at least 1"));
        }
        positive_eps("eps", p.eps)?;
        if let Some(list) = &p.eps_list {
            if list.is_empty() {
                return Err(Invalid::new("params.eps_list", "eps_list must not be empty"));
            }
            if let Some(i) = list.iter().position(|e| e.is_zero()) {
                return Err(Invalid::new(format!("params.eps_list[{i}]"), "eps must be positive"));
            }
        }
        if let Some(gap) = &p.gap {
            if let Some(i) = gap.iter().position(|&g| g == 0) {
                return Err(Invalid::new(format!("params.gap[{i}]"), "gaps must be at least 1"));
            }
        }
        if let Some(segs) = &p.segments {
            if segs.is_empty() {
                return Err(Invalid::new("params.segments", "at least one segment is required"));
            }
            if let Some(i) = segs.iter().position(|s| s.length == 0) {
                return Err(Invalid::new(format!("params.segments[{i}].length"), "segment length must be at least 1"));
            }
        }
        let system = resolve_system(&self.system, base)?;
        Ok(Job { config: self, system })
    }
}

fn resolve_system(value: &Value, base: &Path) -> Result<System, Invalid> {
    let spec_err = |e: gluing_orbit::Error| match e {
        gluing_orbit::Error::InvalidSpec { path, message } => {
            Invalid::new(if path.is_empty() || path == "." { "system".into() } else { format!("system.{path}") }, message)
        }
        other => Invalid::new("system", other.to_string()),
    };
    match value {
        Value::String(label) => {
            zoo::by_label(label).ok_or_else(|| Invalid::new("system", format!("unknown zoo system {label:?}")))
        }
        Value::Object(map) if map.len() == 1 && map.contains_key("file") => {
            let file = map["file"].as_str().ok_or_else(|| Invalid::new("system.file", "expected a path string"))?;
            let path: PathBuf = base.join(file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Invalid::new("system.file", format!("cannot read {}: {e}", path.display())))?;
            let spec = SystemSpec::from_json(&text).map_err(spec_err)?;
            build_system(&spec).map_err(spec_err)
        }
        Value::Object(_) => {
            let spec = SystemSpec::from_json(&value.to_string()).map_err(spec_err)?;
            build_system(&spec).map_err(spec_err)
        }
        _ => Err(Invalid::new("system", "expected a zoo label, a system document or {\"file\": path}")),
    }
}

impl Job {
    pub fn point(&self, field: &str, spec: Option<&PointSpec>) -> Result<Point, Invalid> {
        let spec = spec.ok_or_else(|| Invalid::new(format!("params.{field}"), format!("{field} is required")))?;
        spec.resolve(&self.system).map_err(|e| Invalid::new(format!("params.{field}"), e.to_string()))
    }

    pub fn pool(&self) -> Result<CandidatePool, Invalid> {
        let bad = |e: gluing_orbit::Error| Invalid::new("params.pool", e.to_string());
        match self.config.params.pool.as_ref().unwrap_or(&PoolSpec::Canonical) {
            PoolSpec::Canonical => CandidatePool::canonical(&self.system).map_err(bad),
            PoolSpec::All => CandidatePool::all(&self.system).map_err(bad),
            PoolSpec::Sample { size } => CandidatePool::sample(&self.system, *size, self.config.seed).map_err(bad),
            PoolSpec::Points { points } => {
                let pts = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        p.resolve(&self.system).map_err(|e| Invalid::new(format!("params.pool.points[{i}]"), e.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(CandidatePool::new("points", pts))
            }
        }
    }

    pub fn bases(&self) -> Result<Option<Vec<Point>>, Invalid> {
        let Some(bases) = &self.config.params.bases else { return Ok(None) };
        bases
            .iter()
            .enumerate()
            .map(|(i, p)| p.resolve(&self.system).map_err(|e| Invalid::new(format!("params.bases[{i}]"), e.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_caps_name_the_field() {
        let job = JobConfig::from_json(r#"{"command":"entropy","system":"full2","params":{"n_max":0}}"#).unwrap();
        let err = job.validate(Path::new(".")).err().unwrap();
        assert_eq!(err.field, "params.n_max");
    }

    #[test]
    fn unknown_fields_are_rejected_with_a_path() {
        let err = JobConfig::from_json(r#"{"command":"entropy","system":"full2","params":{"nmax":3}}"#).unwrap_err();
        assert!(err.field.starts_with("params"), "{err:?}");
        let err = JobConfig::from_json(r#"{"command":"plot","system":"full2"}"#).unwrap_err();
        assert_eq!(err.field, "command");
    }

    #[test]
    fn inline_systems_report_nested_paths() {
        let job = JobConfig::from_json(
            r#"{"command":"periodic","system":{"kind":"sft","label":"bad","parameters":{"transitions":[[1,2],[1,0]]}}}"#,
        )
        .unwrap();
        let err = job.validate(Path::new(".")).err().unwrap();
        assert!(err.field.starts_with("system.parameters"), "{err:?}");
    }
}
