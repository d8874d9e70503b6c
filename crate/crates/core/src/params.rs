//! Physical parameters, unit conventions and derived detunings.
//!
//! Energies are in units of the cavity hopping `J`, lengths in units of the
//! lattice constant, and `ħ = 1`. Everything downstream only depends on
//! detunings, so `omega_c` defaults to zero.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Raw, user-facing parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub n_cavities: usize,
    pub n_qubits: usize,
    pub spacing: usize,
    pub g: f64,
    pub u: f64,
    pub delta: f64,
    #[serde(default)]
    pub omega_c: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            n_cavities: 501,
            n_qubits: 60,
            spacing: 1,
            g: 1.0 / 50.0,
            u: -1.0,
            delta: -1.0 / 50.0,
            omega_c: 0.0,
        }
    }
}

/// Validated parameters together with the derived detunings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    pub n_cavities: usize,
    pub n_qubits: usize,
    pub spacing: usize,
    pub g: f64,
    pub u: f64,
    pub delta: f64,
    pub omega_c: f64,
    /// Qubit transition frequency.
    pub omega_e: f64,
    /// Single-excitation detuning `ω_c − ω_e`.
    pub big_delta: f64,
    /// Detuning from the bottom of the single-photon band, `Δ − 2`.
    pub delta_0: f64,
    /// Closed-form bottom of the bound-state band, `2ω_c − sqrt(U² + 16)`.
    pub e0b: f64,
}

/// Right-hand side of the validity bound on `|U|` for a given `g`.
pub fn validity_bound(g: f64) -> f64 {
    4.0 * ((1.0 + g / 4.0).powi(2) - 1.0).sqrt()
}

impl SystemParams {
    pub fn new(raw: RawParams) -> Result<Self> {
        let RawParams { n_cavities, n_qubits, spacing, g, u, delta, omega_c } = raw;
        for (name, v) in [("g", g), ("u", u), ("delta", delta), ("omega_c", omega_c)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if delta >= 0.0 {
            return Err(Error::Sign(format!("delta must be negative, got {delta}")));
        }
        if u >= 0.0 {
            return Err(Error::Sign(format!("u must be negative, got {u}")));
        }
        if g < 0.0 {
            return Err(Error::Sign(format!("g must be non-negative, got {g}")));
        }
        if n_cavities % 2 == 0 {
            return Err(Error::Geometry(format!(
                "the number of cavities must be odd, got {n_cavities}"
            )));
        }
        if n_qubits < 2 {
            return Err(Error::Geometry(format!(
                "at least two qubits are needed for the two-excitation sector, got {n_qubits}"
            )));
        }
        if n_qubits * spacing.max(1) >= n_cavities {
            return Err(Error::Geometry(format!(
                "{n_qubits} qubits with spacing {spacing} do not fit into {n_cavities} cavities"
            )));
        }
        let bound = validity_bound(g);
        if u.abs() <= bound {
            return Err(Error::Validity { u_abs: u.abs(), bound });
        }

        let root = (u * u + 16.0).sqrt();
        let e0b = 2.0 * omega_c - root;
        let omega_e = 0.5 * (delta + e0b);
        let big_delta = omega_c - omega_e;
        Ok(Self {
            n_cavities,
            n_qubits,
            spacing,
            g,
            u,
            delta,
            omega_c,
            omega_e,
            big_delta,
            delta_0: omega_c - 2.0 - omega_e,
            e0b,
        })
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            n_cavities: self.n_cavities,
            n_qubits: self.n_qubits,
            spacing: self.spacing,
            g: self.g,
            u: self.u,
            delta: self.delta,
            omega_c: self.omega_c,
        }
    }

    /// Returns a copy with some raw fields replaced, re-validated.
    pub fn with(&self, f: impl FnOnce(&mut RawParams)) -> Result<Self> {
        let mut raw = self.raw();
        f(&mut raw);
        Self::new(raw)
    }

    pub fn n_pairs(&self) -> usize {
        self.n_qubits * (self.n_qubits - 1) / 2
    }

    /// `2ω_e − E_0b`, recomputed from the derived fields.
    pub fn rederived_delta(&self) -> f64 {
        2.0 * self.omega_e - self.e0b
    }

    /// Stable hex digest of the raw parameters (bit patterns of the floats).
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for n in [self.n_cavities, self.n_qubits, self.spacing] {
            hasher.update((n as u64).to_le_bytes());
        }
        for v in [self.g, self.u, self.delta, self.omega_c] {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::new(RawParams::default()).expect("default parameters are valid")
    }
}
