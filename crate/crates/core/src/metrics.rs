//! Closed-form figures of merit and parameter transforms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::PhysicalParams;

/// Above this value of `γ T_c C` the storage control is treated as adiabatic.
pub const ADIABATIC_THRESHOLD: f64 = 10.0;

/// `C = g² / (κ_tot γ)`.
pub fn cooperativity(params: &PhysicalParams) -> f64 {
    if params.g == 0.0 {
        return 0.0;
    }
    params.g * params.g / (params.kappa_total() * params.gamma)
}

/// `η_max^sp = (κ / κ_tot) · C / (1 + C)`.
pub fn max_single_photon_efficiency(params: &PhysicalParams) -> f64 {
    let c = cooperativity(params);
    let saturation = if c.is_infinite() { 1.0 } else { c / (1.0 + c) };
    params.kappa / params.kappa_total() * saturation
}

/// `ν = η / n`.
pub fn fidelity_from_efficiency(eta: f64, photons: f64) -> Result<f64> {
    if !(photons > 0.0) {
        return Err(Error::invalid(
            "n",
            format!("fidelity needs a positive photon number, got {photons}"),
        ));
    }
    Ok(eta / photons)
}

/// Efficiency and fidelity expanded to second order in `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub eta: f64,
    pub nu: f64,
}

/// `η = n η⁽¹⁾ + n² (η⁽²⁾/2 − η⁽¹⁾)`, `ν = η⁽¹⁾ + n (η⁽²⁾/2 − η⁽¹⁾)`.
pub fn series_eta(photons: f64, eta_1: f64, eta_2: f64) -> SeriesPoint {
    let slope = eta_2 / 2.0 - eta_1;
    SeriesPoint {
        eta: photons * eta_1 + photons * photons * slope,
        nu: eta_1 + photons * slope,
    }
}

/// `η_mix = Σ p_α η^α`.
pub fn mixed_state_efficiency(weights: &[f64], etas: &[f64]) -> Result<f64> {
    if weights.len() != etas.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: etas.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(Error::invalid(
            "weights",
            format!("must be non-negative, got {w}"),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::WeightsNotNormalized { sum });
    }
    Ok(weights.iter().zip(etas).map(|(p, e)| p * e).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Adiabaticity {
    /// `γ T_c C`.
    pub value: f64,
    pub adiabatic: bool,
}

pub fn adiabaticity(params: &PhysicalParams, coherence_time: f64) -> Result<Adiabaticity> {
    if !(coherence_time > 0.0) {
        return Err(Error::invalid("T_c", "must be positive"));
    }
    let value = params.gamma * coherence_time * cooperativity(params);
    Ok(Adiabaticity {
        value,
        adiabatic: value > ADIABATIC_THRESHOLD,
    })
}

/// Maps an ensemble of `atoms` identical emitters onto a single effective
/// emitter with coupling `g√M`. Valid for single-photon inputs only.
pub fn ensemble_params(params: &PhysicalParams, atoms: u32) -> Result<PhysicalParams> {
    if atoms < 1 {
        return Err(Error::invalid("M", "need at least one atom"));
    }
    Ok(PhysicalParams {
        g: params.g * f64::from(atoms).sqrt(),
        ..*params
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FigureOfMerit {
    pub cooperativity: f64,
    pub eta_max_sp: f64,
    pub adiabaticity: Adiabaticity,
}

impl FigureOfMerit {
    pub fn evaluate(params: &PhysicalParams, coherence_time: f64) -> Result<Self> {
        params.validate()?;
        Ok(FigureOfMerit {
            cooperativity: cooperativity(params),
            eta_max_sp: max_single_photon_efficiency(params),
            adiabaticity: adiabaticity(params, coherence_time)?,
        })
    }
}
