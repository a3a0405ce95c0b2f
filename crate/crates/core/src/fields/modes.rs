use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::envelope::{envelope_norm, PulseEnvelope};
use super::grid::TimeGrid;
use crate::error::{Error, Result};

/// Transmission-line modes `k_n = k_c + nπ/L`, `n = −(N−1)/2 … (N−1)/2`,
/// coupled uniformly to the cavity with `λ = √(κ c / L)`.
///
/// Lengths are stored as the time of flight `L/c` in µs, so the mode detunings
/// from the cavity are `Δ_n = nπ / (L/c)` in rad/µs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeGrid {
    count: usize,
    flight_time: f64,
    coupling: f64,
}

pub const DEFAULT_MODE_COUNT: usize = 311;
/// Line length in units of `c T_c`.
pub const DEFAULT_LINE_LENGTH: f64 = 12.0;

impl ModeGrid {
    pub fn new(count: usize, flight_time: f64, kappa: f64) -> Result<Self> {
        if count == 0 || count.is_multiple_of(2) {
            return Err(Error::invalid(
                "N",
                format!("mode count must be odd and positive, got {count}"),
            ));
        }
        if !(flight_time > 0.0) {
            return Err(Error::invalid("L", "line length must be positive"));
        }
        if !(kappa >= 0.0) {
            return Err(Error::invalid("kappa", "must be non-negative"));
        }
        Ok(ModeGrid {
            count,
            flight_time,
            coupling: (kappa / flight_time).sqrt(),
        })
    }

    /// `N = 311`, `L = 12 c T_c`.
    pub fn reference(coherence_time: f64, kappa: f64) -> Result<Self> {
        Self::new(
            DEFAULT_MODE_COUNT,
            DEFAULT_LINE_LENGTH * coherence_time,
            kappa,
        )
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `L / c` in µs.
    pub fn flight_time(&self) -> f64 {
        self.flight_time
    }

    /// Uniform cavity–line coupling λ.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// κ reproduced by the grid, `L λ² / c`.
    pub fn kappa(&self) -> f64 {
        self.flight_time * self.coupling * self.coupling
    }

    pub fn spacing(&self) -> f64 {
        PI / self.flight_time
    }

    pub fn index_offset(&self, i: usize) -> i64 {
        i as i64 - ((self.count - 1) / 2) as i64
    }

    pub fn detuning(&self, i: usize) -> f64 {
        self.index_offset(i) as f64 * self.spacing()
    }

    pub fn detunings(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.detuning(i)).collect()
    }

    /// Largest |Δ_n| represented by the grid.
    pub fn half_bandwidth(&self) -> f64 {
        ((self.count - 1) / 2) as f64 * self.spacing()
    }
}

/// Coherent amplitudes `α_k` of the line modes plus the fraction of the
/// window norm they capture.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeAmplitudes {
    pub alphas: Vec<C64>,
    pub captured_fraction: f64,
}

impl ModeAmplitudes {
    pub fn photons(&self) -> f64 {
        self.alphas.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Below this captured fraction the mode grid is considered too narrow.
pub const BANDWIDTH_WARNING_FRACTION: f64 = 1.0 - 1e-4;

/// `α_k = √(c/2L) ∫ e^{iΔ_k t} E_in(t) dt`, trapezoid quadrature over the window.
pub fn mode_amplitudes(
    env: &PulseEnvelope,
    modes: &ModeGrid,
    grid: &TimeGrid,
) -> Result<ModeAmplitudes> {
    grid.validate()?;
    let ts = grid.sample_times();
    let dt = grid.dt();
    let last = ts.len() - 1;
    let weighted: Vec<C64> = ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let w = if j == 0 || j == last { 0.5 * dt } else { dt };
            env.amplitude(t) * w
        })
        .collect();
    let prefactor = (0.5 / modes.flight_time()).sqrt();
    let alphas: Vec<C64> = modes
        .detunings()
        .into_iter()
        .map(|d| {
            let s: C64 = ts
                .iter()
                .zip(&weighted)
                .map(|(&t, &e)| e * C64::cis(d * t))
                .sum();
            s * prefactor
        })
        .collect();

    let window_norm = envelope_norm(env, grid.t1, grid.t2)?;
    let captured: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
    let captured_fraction = if window_norm > 0.0 {
        captured / window_norm
    } else {
        1.0
    };
    if window_norm > 0.0 && captured_fraction < BANDWIDTH_WARNING_FRACTION {
        log::warn!(
            "mode grid captures only {:.6} of the pulse norm; widen the band (N = {}, L/c = {} µs)",
            captured_fraction,
            modes.count(),
            modes.flight_time()
        );
    }
    Ok(ModeAmplitudes {
        alphas,
        captured_fraction,
    })
}

/// Discrete inverse of [`mode_amplitudes`]: `E_in(t) = √(c/2L) Σ_k α_k e^{−iΔ_k t}`.
pub fn envelope_from_modes(alphas: &[C64], modes: &ModeGrid, t: f64) -> Result<C64> {
    if alphas.len() != modes.count() {
        return Err(Error::DimensionMismatch {
            expected: modes.count(),
            got: alphas.len(),
        });
    }
    let s: C64 = alphas
        .iter()
        .enumerate()
        .map(|(i, a)| a * C64::cis(-modes.detuning(i) * t))
        .sum();
    Ok(s * (0.5 / modes.flight_time()).sqrt())
}
