//! Model selection: builds any level of description from one parameter set.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use faer::Mat;

use crate::couplings::EffectiveCouplings;
use crate::error::{Error, Result};
use crate::hamiltonians::{
    build_h_adia, build_h_complete_oracle, build_h_full, build_h_pair, build_h_single, build_h_spin, build_h_tilde_single, HamiltonianMatrix,
    MatrixData, DEFAULT_ORACLE_CAP,
};
use crate::params::SystemParams;
use crate::system::ArraySystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Spin,
    Single,
    TildeSingle,
    Pair,
    /// Pairs and bound states with the bound-bound coupling `G`.
    Adia0,
    /// Pairs and bound states without `G`.
    Adia1,
    Full,
    Oracle,
}

impl Model {
    pub const ALL: [Model; 8] =
        [Model::Spin, Model::Single, Model::TildeSingle, Model::Pair, Model::Adia0, Model::Adia1, Model::Full, Model::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Model::Spin => "spin",
            Model::Single => "single",
            Model::TildeSingle => "tilde-single",
            Model::Pair => "pair",
            Model::Adia0 => "adia0",
            Model::Adia1 => "adia1",
            Model::Full => "full",
            Model::Oracle => "oracle",
        }
    }

    /// Whether the model carries photonic slots.
    pub fn has_photons(self) -> bool {
        matches!(self, Model::Adia0 | Model::Adia1 | Model::Full | Model::Oracle)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::Domain(format!("unknown model {s:?}")))
    }
}

impl serde::Serialize for Model {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for Model {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameters, bath data and (lazily) effective couplings for one run.
pub struct Scenario {
    pub system: Arc<ArraySystem>,
    couplings: std::sync::OnceLock<EffectiveCouplings>,
}

impl Scenario {
    pub fn new(params: SystemParams) -> Result<Self> {
        Ok(Self::from_system(ArraySystem::new(params)?))
    }

    pub fn from_system(system: ArraySystem) -> Self {
        Self { system: Arc::new(system), couplings: std::sync::OnceLock::new() }
    }

    pub fn params(&self) -> &SystemParams {
        &self.system.params
    }

    /// Couplings including `G`, computed on first use.
    pub fn couplings(&self) -> Result<&EffectiveCouplings> {
        if let Some(c) = self.couplings.get() {
            return Ok(c);
        }
        let c = EffectiveCouplings::compute(&self.system, true)?;
        Ok(self.couplings.get_or_init(|| c))
    }

    pub fn hamiltonian(&self, model: Model) -> Result<HamiltonianMatrix> {
        let p = &self.system.params;
        Ok(match model {
            Model::Full => build_h_full(&self.system),
            Model::Oracle => build_h_complete_oracle(p, &self.system.positions, DEFAULT_ORACLE_CAP)?,
            Model::Spin => build_h_spin(p, &self.couplings()?.w, &self.couplings()?.y),
            Model::Single => build_h_single(p, &self.couplings()?.w),
            Model::TildeSingle => build_h_tilde_single(p, &self.couplings()?.w),
            Model::Pair => build_h_pair(p, &self.couplings()?.y),
            Model::Adia0 | Model::Adia1 => {
                let c = self.couplings()?;
                let single = real_part(build_h_single(p, &c.w));
                let g = if model == Model::Adia0 { c.g.as_ref() } else { None };
                build_h_adia(p, &single, &c.f, g, &self.system.bands)
            }
        })
    }
}

fn real_part(h: HamiltonianMatrix) -> Mat<f64> {
    match h.data {
        MatrixData::Real(m) => m,
        _ => unreachable!("spin Hamiltonians are real"),
    }
}
