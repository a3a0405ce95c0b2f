use serde::Serialize;

use crate::metrics::{series_eta, SeriesPoint};

/// Largest mean photon number for which the m ≤ 2 truncation is trusted.
pub const LADDER_VALIDITY_CAP: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoherentLadder {
    pub eta: f64,
    pub nu: f64,
    /// Second-order polynomial in `n` built from the same `η⁽¹⁾, η⁽²⁾`.
    pub series: SeriesPoint,
}

/// `η = e^{−n} (n η⁽¹⁾ + n²/2 η⁽²⁾)` and `ν = η / n` (`ν → η⁽¹⁾` as `n → 0`).
pub fn coherent_efficiency_ladder(photons: f64, eta_1: f64, eta_2: f64) -> CoherentLadder {
    let n = photons.max(0.0);
    let series = series_eta(n, eta_1, eta_2);
    if n == 0.0 {
        return CoherentLadder {
            eta: 0.0,
            nu: eta_1,
            series,
        };
    }
    let eta = (-n).exp() * (n * eta_1 + 0.5 * n * n * eta_2);
    CoherentLadder {
        eta,
        nu: eta / n,
        series,
    }
}

/// Probability of the no-jump trajectory, `P₀ = e^{−n}(1 + n‖ψ⁽¹⁾‖² + n²/2 ‖ψ⁽²⁾‖²)`,
/// from the final block norms.
pub fn no_jump_probability(photons: f64, norm_1: f64, norm_2: f64) -> f64 {
    let n = photons.max(0.0);
    (-n).exp() * (1.0 + n * norm_1 + 0.5 * n * n * norm_2)
}
