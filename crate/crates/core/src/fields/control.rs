use num_complex::Complex64 as C64;

use super::params::PhysicalParams;
use super::table::{Extrapolation, Table};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ControlForm {
    /// `Ω(t) = √(peak_sq / ((e^{4t/T} + 1) T))` with `peak_sq = 2γ(1+C)`.
    OptimalSech {
        peak_sq: f64,
        duration: f64,
    },
    /// Linear interpolation; holds the endpoint values outside the table.
    Tabulated(Table),
    Constant(C64),
}

/// Classical Rabi frequency `Ω(t)` in rad/µs driving |r>–|e>.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlField {
    pub form: ControlForm,
}

impl ControlField {
    pub fn tabulated(table: Table) -> Self {
        ControlField {
            form: ControlForm::Tabulated(table),
        }
    }

    pub fn constant(value: C64) -> Self {
        ControlField {
            form: ControlForm::Constant(value),
        }
    }

    pub fn off() -> Self {
        Self::constant(C64::new(0.0, 0.0))
    }

    pub fn rabi(&self, t: f64) -> C64 {
        match &self.form {
            ControlForm::OptimalSech { peak_sq, duration } => {
                let denom = ((4.0 * t / duration).exp() + 1.0) * duration;
                C64::new((peak_sq / denom).sqrt(), 0.0)
            }
            ControlForm::Tabulated(table) => table.interpolate(t, Extrapolation::Clamp),
            ControlForm::Constant(v) => *v,
        }
    }

    pub fn is_off(&self) -> bool {
        matches!(self.form, ControlForm::Constant(v) if v == C64::new(0.0, 0.0))
    }
}

/// Control that maximizes single-photon storage of a sech pulse of characteristic
/// time `duration` in the adiabatic limit. Only valid for the sech envelope at
/// one- and two-photon resonance; other pulse shapes need a tabulated control.
pub fn optimal_control_sech(params: &PhysicalParams, duration: f64) -> Result<ControlField> {
    params.validate()?;
    if !(duration > 0.0) {
        return Err(Error::invalid("T", "must be positive"));
    }
    if params.cavity_detuning != 0.0 || params.two_photon_detuning != 0.0 {
        log::warn!("closed-form storage control assumes Δ = δ = 0; detunings are ignored");
    }
    // γ(1 + C) written so that γ = 0 stays finite.
    let gamma_eff = params.gamma + params.g * params.g / params.kappa_total();
    Ok(ControlField {
        form: ControlForm::OptimalSech {
            peak_sq: 2.0 * gamma_eff,
            duration,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sech_duration_for_coherence_time;
    use crate::metrics::cooperativity;

    #[test]
    fn value_at_origin() {
        let p = PhysicalParams::reference();
        let t = sech_duration_for_coherence_time(0.5);
        let ctrl = optimal_control_sech(&p, t).unwrap();
        let c = cooperativity(&p);
        let expected = (p.gamma * (1.0 + c) / t).sqrt();
        assert!((ctrl.rabi(0.0).re - expected).abs() < 1e-12);
        assert!((ctrl.rabi(0.0).re - 8.19).abs() < 0.01);
    }

    #[test]
    fn limits_and_monotonicity() {
        let p = PhysicalParams::reference();
        let t = 1.1027;
        let ctrl = optimal_control_sech(&p, t).unwrap();
        let plateau = (2.0 * p.gamma * (1.0 + cooperativity(&p)) / t).sqrt();
        assert!((ctrl.rabi(-50.0).re - plateau).abs() < 1e-12 * plateau);
        assert_eq!(ctrl.rabi(1e4).re, 0.0);
        let at_end = ctrl.rabi(3.0).re / plateau;
        assert!((at_end - ((4.0 * 3.0 / t).exp() + 1.0).powf(-0.5)).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let v = ctrl.rabi(-5.0 + 0.05 * i as f64).re;
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn off_control() {
        assert!(ControlField::off().is_off());
        assert_eq!(ControlField::off().rabi(0.2), C64::new(0.0, 0.0));
    }
}
