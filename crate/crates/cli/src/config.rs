//! Run configuration: JSON file, merged over defaults, then `--set` overrides.

use std::path::Path;

use kerr_lattice::solver::{TimeGrid, DEFAULT_BRACKET, DEFAULT_LENGTH_TOL};
use kerr_lattice::{Model, RawParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    Correlations,
    Dynamics,
    Variational,
    Overlaps,
    Sweep,
    Validate,
    Figure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Initial {
    #[serde(rename = "PS")]
    Ps,
    #[serde(rename = "FS")]
    Fs,
}

impl From<Initial> for kerr_lattice::observables::InitialKind {
    fn from(i: Initial) -> Self {
        match i {
            Initial::Ps => Self::PartiallySymmetric,
            Initial::Fs => Self::FullySymmetric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalConfig {
    pub n_max: usize,
    pub bracket: (f64, f64),
    pub tol: f64,
    pub threshold: f64,
    pub max_drift: f64,
    /// Qubits added for the size-stability gate; `0` disables the gate.
    pub drift_extra_qubits: usize,
}

impl Default for VariationalConfig {
    fn default() -> Self {
        Self {
            n_max: 10,
            bracket: DEFAULT_BRACKET,
            tol: DEFAULT_LENGTH_TOL,
            threshold: 0.9,
            max_drift: 0.005,
            drift_extra_qubits: 20,
        }
    }
}

/// Sweep over one parameter: explicit `values`, or `count` points from
/// `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { parameter: "delta".into(), values: None, start: Some(-0.15), stop: Some(-0.005), count: Some(30) }
    }
}

impl SweepConfig {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if let Some(v) = &self.values {
            if v.is_empty() {
                return Err(CliError::Config("sweep.values is empty".into()));
            }
            return Ok(v.clone());
        }
        match (self.start, self.stop, self.count) {
            (Some(a), Some(b), Some(1)) if a == b => Ok(vec![a]),
            (Some(a), Some(b), Some(n)) if n >= 2 => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            _ => Err(CliError::Config("sweep needs `values` or `start`, `stop` and `count` ≥ 2".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: Task,
    pub params: RawParams,
    pub model: Model,
    /// Eigenpairs kept for sparse models; dense models are solved completely.
    pub eigen_count: usize,
    pub initial: Initial,
    pub times: TimeGrid,
    pub alphas: Vec<usize>,
    /// Times at which `P_corr(i, j, t)` grids are written.
    pub snapshots: Vec<f64>,
    /// 1-based eigenstate numbers for the correlations task.
    pub states: Vec<usize>,
    pub variational: VariationalConfig,
    pub sweep: SweepConfig,
    #[serde(deserialize_with = "figure_id")]
    pub figure: Option<String>,
    /// Cavity loss rates for the photon-loss estimate in the manifest.
    pub kappa: Vec<f64>,
    pub oracle_cap: usize,
    /// Always on: no stage of the pipeline draws random numbers.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            task: Task::Spectrum,
            params: RawParams::default(),
            model: Model::Spin,
            eigen_count: 10,
            initial: Initial::Fs,
            times: TimeGrid { start: 0.0, stop: 10_000.0, step: 10.0 },
            alphas: vec![1, 6, 21],
            snapshots: Vec::new(),
            states: vec![1],
            variational: VariationalConfig::default(),
            sweep: SweepConfig::default(),
            figure: None,
            kappa: vec![0.02],
            oracle_cap: kerr_lattice::hamiltonians::DEFAULT_ORACLE_CAP,
            deterministic: true,
        }
    }
}

/// Loads `path` (if any) over the defaults, applies `key=value` overrides
/// with dotted keys and validates the result.
pub fn resolve(path: Option<&Path>, overrides: &[String], task: Task) -> Result<RunConfig, CliError> {
    let mut merged = serde_json::to_value(RunConfig::default()).expect("default config serializes");
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if !file.is_object() {
            return Err(CliError::Config("config root must be a JSON object".into()));
        }
        merge(&mut merged, file);
    }
    for o in overrides {
        let (key, raw) = o.split_once('=').ok_or_else(|| CliError::Config(format!("override {o:?} is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut merged, key, value)?;
    }
    merged["task"] = serde_json::to_value(task).expect("task serializes");
    let cfg: RunConfig = serde_json::from_value(merged).map_err(|e| CliError::Config(e.to_string()))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", cfg.schema_version)));
    }
    if !cfg.deterministic {
        return Err(CliError::Config("deterministic cannot be switched off".into()));
    }
    Ok(cfg)
}

/// Figure ids are strings, but `--set figure=10` arrives as a number.
fn figure_id<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    match Option::<Value>::deserialize(d)? {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(Value::Number(n)) => Ok(Some(n.to_string())),
        Some(other) => Err(serde::de::Error::custom(format!("figure id must be a string, got {other}"))),
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (depth, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| CliError::Config(format!("{key}: {part:?} is not inside an object")))?;
        if depth + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(CliError::Config(format!("empty override key {key:?}")))
}
