use crate::error::{Error, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEstimates {
    /// Photonic admixture of the dressed single-excitation bound state.
    pub p_ph: f64,
    /// Effective loss rate `p_ph κ`.
    pub gamma_c: f64,
}

impl LossEstimates {
    pub fn lifetime(&self) -> f64 {
        1.0 / self.gamma_c
    }
}

/// `p_ph = g² / (4 sqrt(J)) (Δ − 2J)^{−3/2}` and `Γ_c = p_ph κ`.
pub fn loss_estimates(params: &SystemParams, kappa: f64) -> Result<LossEstimates> {
    let gap = params.delta_0;
    if !(gap > 0.0) {
        return Err(Error::Domain(format!("detuning from the band edge must be positive, got {gap}")));
    }
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("kappa must be non-negative, got {kappa}")));
    }
    let p_ph = params.g * params.g / 4.0 * gap.powf(-1.5);
    Ok(LossEstimates { p_ph, gamma_c: p_ph * kappa })
}
