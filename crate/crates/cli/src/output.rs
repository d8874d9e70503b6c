//! Output directory handling and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kerr_lattice::hamiltonians::BasisTag;
use kerr_lattice::observables::loss_estimates;
use kerr_lattice::SystemParams;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

/// Files are written under a temporary name and renamed into place once
/// complete, so a reader never sees a half-written file.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        write_atomic(&self.root.join(name), body)?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Records a file or directory that was moved into place by the caller.
    pub fn record(&mut self, name: String) {
        self.written.push(name);
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

pub fn write_atomic<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
{
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or("")));
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisInfo {
    pub kind: String,
    pub n_qubits: usize,
    pub n_cavities: usize,
    pub pair_dim: usize,
    pub dim: usize,
}

impl From<BasisTag> for BasisInfo {
    fn from(b: BasisTag) -> Self {
        Self { kind: format!("{:?}", b.kind), n_qubits: b.n_qubits, n_cavities: b.n_cavities, pair_dim: b.pair_dim(), dim: b.dim() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LossEntry {
    pub kappa: f64,
    pub p_ph: f64,
    pub gamma_c: f64,
    pub lifetime: f64,
}

pub fn loss_table(params: &SystemParams, kappas: &[f64]) -> Vec<LossEntry> {
    kappas
        .iter()
        .filter_map(|&kappa| loss_estimates(params, kappa).ok().map(|l| LossEntry { kappa, p_ph: l.p_ph, gamma_c: l.gamma_c, lifetime: l.lifetime() }))
        .collect()
}

/// What a task reports back besides the files it wrote.
#[derive(Debug, Default)]
pub struct TaskReport {
    pub basis: Option<BasisInfo>,
    pub max_residual: Option<f64>,
    pub summary: Value,
    /// Validation checks that did not pass.
    pub failed_checks: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub param_hash: String,
    pub params: Option<SystemParams>,
    pub basis: Option<BasisInfo>,
    pub max_residual: Option<f64>,
    pub loss: Vec<LossEntry>,
    pub wall_time_s: f64,
    pub outputs: &'a [String],
    pub summary: &'a Value,
    pub config: &'a RunConfig,
}
