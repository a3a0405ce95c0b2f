use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atom–cavity rates and detunings, all angular frequencies in rad/µs.
///
/// `gamma` and the cavity rates follow the amplitude-decay (half-width)
/// convention: an excited-state population decays as `exp(-2 gamma t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Vacuum Rabi frequency of the |g>–|e> transition.
    pub g: f64,
    /// Radiative decay through the input mirror.
    pub kappa: f64,
    /// Cavity losses other than the input mirror.
    pub kappa_loss: f64,
    /// Decay of |e> into the sink level.
    pub gamma: f64,
    /// `Δ = ω_c − ω_e`.
    pub cavity_detuning: f64,
    /// `δ = ω_r + ω_L − ω_c`.
    pub two_photon_detuning: f64,
}

/// Converts a frequency in MHz to an angular frequency in rad/µs.
pub fn mhz_to_rad_per_us(f: f64) -> f64 {
    TAU * f
}

impl PhysicalParams {
    pub fn new(g: f64, kappa: f64, kappa_loss: f64, gamma: f64) -> Result<Self> {
        let p = PhysicalParams {
            g,
            kappa,
            kappa_loss,
            gamma,
            cavity_detuning: 0.0,
            two_photon_detuning: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from ordinary frequencies in MHz.
    pub fn from_mhz(g: f64, kappa: f64, kappa_loss: f64, gamma: f64) -> Result<Self> {
        Self::new(
            mhz_to_rad_per_us(g),
            mhz_to_rad_per_us(kappa),
            mhz_to_rad_per_us(kappa_loss),
            mhz_to_rad_per_us(gamma),
        )
    }

    /// The reference single-atom setup: (g, κ, γ, κ_loss) = (4.9, 2.42, 3.03, 0.33) × 2π MHz.
    pub fn reference() -> Self {
        Self::from_mhz(4.9, 2.42, 0.33, 3.03).expect("reference parameters are valid")
    }

    pub fn with_detunings(mut self, cavity: f64, two_photon: f64) -> Self {
        self.cavity_detuning = cavity;
        self.two_photon_detuning = two_photon;
        self
    }

    pub fn kappa_total(&self) -> f64 {
        self.kappa + self.kappa_loss
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid(
                "kappa",
                format!("must be positive and finite, got {}", self.kappa),
            ));
        }
        let non_negative = [
            ("g", self.g),
            ("kappa_loss", self.kappa_loss),
            ("gamma", self.gamma),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be non-negative and finite, got {v}"),
                ));
            }
        }
        if !self.cavity_detuning.is_finite() || !self.two_photon_detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        Ok(())
    }
}
