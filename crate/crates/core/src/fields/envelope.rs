use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::grid::{trapezoid, uniform, TimeGrid};
use super::table::{Extrapolation, Table};
use crate::error::{Error, Result};

/// Number of uniform samples used by [`envelope_norm`].
const NORM_POINTS: usize = 20_001;

#[derive(Clone, Debug, PartialEq)]
pub enum PulseShape {
    /// `sech(2t/T)` with characteristic time `duration` = T.
    Sech { duration: f64 },
    /// Normalized Gaussian whose intensity has standard deviation `coherence_time`.
    Gaussian { coherence_time: f64, center: f64 },
    /// Linearly interpolated samples, zero outside their range.
    Tabulated(Table),
}

/// Input field amplitude `E_in(t)` in µs^(-1/2), normalized so that
/// `∫|E_in|² dt` equals the mean photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseEnvelope {
    shape: PulseShape,
    photons: f64,
    /// Maps the unit-norm shape to the requested photon number.
    scale: f64,
}

pub fn sech_envelope(photons: f64, duration: f64) -> Result<PulseEnvelope> {
    check_positive("n", photons)?;
    check_positive("T", duration)?;
    Ok(PulseEnvelope {
        shape: PulseShape::Sech { duration },
        photons,
        scale: (photons / duration).sqrt(),
    })
}

pub fn gaussian_envelope(photons: f64, coherence_time: f64, center: f64) -> Result<PulseEnvelope> {
    check_positive("n", photons)?;
    check_positive("T_c", coherence_time)?;
    if !center.is_finite() {
        return Err(Error::invalid("t0", "must be finite"));
    }
    Ok(PulseEnvelope {
        shape: PulseShape::Gaussian {
            coherence_time,
            center,
        },
        photons,
        scale: photons.sqrt() * (2.0 * PI * coherence_time * coherence_time).powf(-0.25),
    })
}

/// Tabulated envelope rescaled so that the trapezoid quadrature of the samples equals `photons`.
pub fn tabulated_envelope(table: Table, photons: f64) -> Result<PulseEnvelope> {
    check_positive("n", photons)?;
    let raw = table.norm_squared();
    if !(raw > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(PulseEnvelope {
        shape: PulseShape::Tabulated(table),
        photons,
        scale: (photons / raw).sqrt(),
    })
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

/// Characteristic time of a sech pulse with the given coherence time: `T = 4√3 T_c / π`.
pub fn sech_duration_for_coherence_time(coherence_time: f64) -> f64 {
    4.0 * 3f64.sqrt() * coherence_time / PI
}

impl PulseEnvelope {
    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    /// Mean photon number `n` of the full (untruncated) pulse.
    pub fn photons(&self) -> f64 {
        self.photons
    }

    /// Same shape carrying `photons` on average. Zero gives the vacuum input.
    pub fn with_photons(&self, photons: f64) -> Result<PulseEnvelope> {
        if !(photons >= 0.0 && photons.is_finite()) {
            return Err(Error::invalid(
                "n",
                format!("must be non-negative, got {photons}"),
            ));
        }
        let scale = if self.photons > 0.0 {
            self.scale * (photons / self.photons).sqrt()
        } else {
            0.0
        };
        Ok(PulseEnvelope {
            shape: self.shape.clone(),
            photons,
            scale,
        })
    }

    /// Same shape with unit norm (the single-photon wave packet).
    pub fn normalized(&self) -> PulseEnvelope {
        self.with_photons(1.0).expect("unit photon number is valid")
    }

    pub fn amplitude(&self, t: f64) -> C64 {
        if self.scale == 0.0 {
            return C64::new(0.0, 0.0);
        }
        match &self.shape {
            PulseShape::Sech { duration } => {
                C64::new(self.scale / (2.0 * t / duration).cosh(), 0.0)
            }
            PulseShape::Gaussian {
                coherence_time,
                center,
            } => {
                let x = t - center;
                C64::new(
                    self.scale * (-x * x / (4.0 * coherence_time * coherence_time)).exp(),
                    0.0,
                )
            }
            PulseShape::Tabulated(table) => table.interpolate(t, Extrapolation::Zero) * self.scale,
        }
    }

    /// Interval outside which the intensity is negligible (below ~e^-70 of the peak).
    pub fn support(&self) -> (f64, f64) {
        match &self.shape {
            PulseShape::Sech { duration } => (-18.0 * duration, 18.0 * duration),
            PulseShape::Gaussian {
                coherence_time,
                center,
            } => (
                center - 12.0 * coherence_time,
                center + 12.0 * coherence_time,
            ),
            PulseShape::Tabulated(table) => table.range(),
        }
    }
}

/// Photon number carried by the envelope inside `[t1, t2]`. Infinite bounds
/// are clipped to the envelope's support.
pub fn envelope_norm(env: &PulseEnvelope, t1: f64, t2: f64) -> Result<f64> {
    if !(t1 < t2) {
        return Err(Error::invalid(
            "window",
            format!("need t1 < t2, got [{t1}, {t2}]"),
        ));
    }
    let (lo, hi) = env.support();
    let (a, b) = (t1.max(lo), t2.min(hi));
    if !(a < b) {
        return Ok(0.0);
    }
    let ts = uniform(a, b, NORM_POINTS);
    let dt = (b - a) / (NORM_POINTS - 1) as f64;
    let intensity: Vec<f64> = ts.iter().map(|&t| env.amplitude(t).norm_sqr()).collect();
    Ok(trapezoid(&intensity, dt))
}

/// `√(⟨t²⟩ − ⟨t⟩²)` with moments of `|E_in|²` normalized by the norm on the grid.
pub fn coherence_time(env: &PulseEnvelope, grid: &TimeGrid) -> Result<f64> {
    let ts = grid.sample_times();
    let dt = grid.dt();
    let w: Vec<f64> = ts.iter().map(|&t| env.amplitude(t).norm_sqr()).collect();
    let norm = trapezoid(&w, dt);
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let m1 = trapezoid(
        &ts.iter().zip(&w).map(|(t, w)| t * w).collect::<Vec<_>>(),
        dt,
    ) / norm;
    let m2 = trapezoid(
        &ts.iter()
            .zip(&w)
            .map(|(t, w)| t * t * w)
            .collect::<Vec<_>>(),
        dt,
    ) / norm;
    Ok((m2 - m1 * m1).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    const T_C: f64 = 0.5;

    #[test]
    fn sech_peak() {
        let env = sech_envelope(1.0, 1.1027).unwrap();
        assert!((env.amplitude(0.0).re - 0.952_293).abs() < 1e-5);
        assert_eq!(env.amplitude(0.0).im, 0.0);
    }

    #[test]
    fn sech_duration_matches_coherence_time() {
        assert!((sech_duration_for_coherence_time(T_C) - 1.102_658_0).abs() < 1e-6);
    }

    #[test]
    fn vacuum_limit_is_identically_zero() {
        let env = sech_envelope(1.0, 1.1).unwrap().with_photons(0.0).unwrap();
        for t in [-3.0, -0.1, 0.0, 0.7, 3.0] {
            assert_eq!(env.amplitude(t), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn constructors_reject_non_positive() {
        assert!(sech_envelope(0.0, 1.0).is_err());
        assert!(sech_envelope(1.0, -1.0).is_err());
        assert!(gaussian_envelope(-1.0, 0.5, 0.0).is_err());
        assert!(gaussian_envelope(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn sech_norm_matches_tanh_integral() {
        // ∫_a^b (n/T) sech²(2t/T) dt = (n/2)(tanh(2b/T) − tanh(2a/T))
        let t = sech_duration_for_coherence_time(T_C);
        for n in [1.0, 0.02] {
            let env = sech_envelope(n, t).unwrap();
            let (a, b) = (-6.0 * T_C, 6.0 * T_C);
            let exact = 0.5 * n * ((2.0 * b / t).tanh() - (2.0 * a / t).tanh());
            assert!((envelope_norm(&env, a, b).unwrap() - exact).abs() < 1e-10 * n);
        }
        let env = sech_envelope(1.0, t).unwrap();
        assert!((envelope_norm(&env, f64::NEG_INFINITY, 0.0).unwrap() - 0.5).abs() < 1e-10);
        assert!(
            (envelope_norm(&env, f64::NEG_INFINITY, f64::INFINITY).unwrap() - 1.0).abs() < 1e-10
        );
    }

    #[test]
    fn gaussian_norm_and_peak() {
        let env = gaussian_envelope(1.0, T_C, 0.0).unwrap();
        // Intensity is normal with σ = T_c; mass outside ±6σ is erfc(6/√2) = 1.973e-9.
        let window = envelope_norm(&env, -6.0 * T_C, 6.0 * T_C).unwrap();
        assert!((window - (1.0 - 1.973_175e-9)).abs() < 1e-11, "{window}");
        let full = envelope_norm(&env, -10.0 * T_C, 10.0 * T_C).unwrap();
        assert!((full - 1.0).abs() < 1e-9);

        let weak = gaussian_envelope(0.02, T_C, 0.0).unwrap();
        let peak = weak.amplitude(0.0).norm_sqr();
        assert!((peak - 0.02 / ((2.0 * PI).sqrt() * T_C)).abs() < 1e-15);
        assert!((peak - 0.015_96).abs() < 1e-5);
    }

    #[test]
    fn gaussian_coherence_time() {
        let env = gaussian_envelope(1.0, T_C, 0.0).unwrap();
        let grid = TimeGrid::for_coherence_time(T_C).unwrap();
        assert!((coherence_time(&env, &grid).unwrap() - T_C).abs() < 1e-6);
    }

    #[test]
    fn sech_coherence_time() {
        let wide = TimeGrid::symmetric(T_C, 40.0)
            .unwrap()
            .with_quadrature_points(40_001);
        let exact = sech_envelope(1.0, sech_duration_for_coherence_time(T_C)).unwrap();
        assert!((coherence_time(&exact, &wide).unwrap() - T_C).abs() < 1e-7);
        let rounded = sech_envelope(1.0, 1.1027).unwrap();
        assert!((coherence_time(&rounded, &wide).unwrap() - T_C).abs() < 1e-4);

        // Shift invariance and n-independence.
        let shifted = tabulated_shift(&exact, 1.0);
        let grid = TimeGrid::symmetric(T_C, 16.0)
            .unwrap()
            .with_quadrature_points(40_001);
        let base = coherence_time(&exact, &grid).unwrap();
        assert!((coherence_time(&shifted, &grid).unwrap() - base).abs() < 1e-6);
        let brighter = exact.with_photons(7.0).unwrap();
        assert!((coherence_time(&brighter, &grid).unwrap() - base).abs() < 1e-12);
    }

    fn tabulated_shift(env: &PulseEnvelope, shift: f64) -> PulseEnvelope {
        let ts = uniform(-20.0, 20.0, 80_001);
        let vals = ts.iter().map(|&t| env.amplitude(t - shift)).collect();
        tabulated_envelope(Table::new(ts, vals).unwrap(), env.photons()).unwrap()
    }

    #[test]
    fn coherence_time_of_vacuum_is_an_error() {
        let env = sech_envelope(1.0, 1.0).unwrap().with_photons(0.0).unwrap();
        let grid = TimeGrid::for_coherence_time(T_C).unwrap();
        assert!(matches!(coherence_time(&env, &grid), Err(Error::ZeroNorm)));
    }

    #[test]
    fn tabulated_normalized_to_requested_photons() {
        let ts = uniform(-1.0, 1.0, 101);
        let vals = ts.iter().map(|t| C64::new(1.0 - t * t, 0.2)).collect();
        let env = tabulated_envelope(Table::new(ts.clone(), vals).unwrap(), 0.3).unwrap();
        let PulseShape::Tabulated(table) = env.shape() else {
            unreachable!()
        };
        let quad = table.scaled(env.scale).norm_squared();
        assert!((quad - 0.3).abs() < 1e-6 * 0.3);
    }
}
