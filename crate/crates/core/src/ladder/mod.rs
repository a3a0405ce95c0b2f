//! No-jump pure-state dynamics under the effective Hamiltonian, resolved by
//! the number of excitations.
//!
//! The effective Hamiltonian conserves `Σ b†b + a†a + |e><e| + |r><r|`, so the
//! one- and two-photon components of the input evolve independently. The
//! single-excitation block is solved either with explicit line modes or in the
//! input–output form; the two-excitation block keeps the line modes and stores
//! the symmetric two-photon amplitudes as an upper triangle.

mod coherent;
mod double;
mod initial;
mod single;

pub use coherent::{
    coherent_efficiency_ladder, no_jump_probability, CoherentLadder, LADDER_VALIDITY_CAP,
};
pub use double::{
    integrate_two_excitation, integrate_two_excitation_with, two_excitation_memory_mib,
    TwoExcitationOptions, TwoExcitationRun, TwoExcitationState, DEFAULT_MEMORY_LIMIT_MIB,
};
pub use initial::{ladder_initial_conditions, LadderInitial, SymmetricPairs};
pub use single::{
    integrate_single_excitation_io, integrate_single_excitation_modes, SingleExcitationRun,
    SingleExcitationState,
};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::fields::{
    mode_amplitudes, ControlField, ModeGrid, PhysicalParams, PulseEnvelope, TimeGrid,
};
use crate::ode::OdeStats;

/// Norm and stored population of one excitation block at a sample time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockSample {
    pub t: f64,
    pub norm: f64,
    pub eta: f64,
    /// Norm lost through `γ` and `κ_loss` up to `t`.
    pub dissipated: f64,
}

/// Single- and two-photon storage efficiencies with the block norms at `t2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderResult {
    pub eta_1: f64,
    pub eta_2: f64,
    pub norm_1: f64,
    pub norm_2: f64,
}

impl LadderResult {
    /// Coherent-pulse efficiency for mean photon number `n` (Poisson weights, m ≤ 2).
    pub fn coherent(&self, photons: f64) -> CoherentLadder {
        coherent_efficiency_ladder(photons, self.eta_1, self.eta_2)
    }

    pub fn no_jump_probability(&self, photons: f64) -> f64 {
        no_jump_probability(photons, self.norm_1, self.norm_2)
    }
}

#[derive(Clone, Debug)]
pub struct LadderRun {
    pub result: LadderResult,
    pub single: SingleExcitationRun,
    pub double: TwoExcitationRun,
}

impl LadderRun {
    pub fn stats(&self) -> (OdeStats, OdeStats) {
        (self.single.stats, self.double.stats)
    }
}

/// Solves both blocks (in parallel) for the normalized shape of `env`.
pub fn solve_ladder(
    params: &PhysicalParams,
    env: &PulseEnvelope,
    modes: &ModeGrid,
    ctrl: &ControlField,
    grid: &TimeGrid,
    options: &TwoExcitationOptions,
) -> Result<LadderRun> {
    double::check_memory(modes.count(), options)?;
    let amps = mode_amplitudes(&env.normalized(), modes, grid)?;
    let (single, double) = rayon::join(
        || integrate_single_excitation_modes(params, modes, &amps.alphas, ctrl, grid),
        || integrate_two_excitation_with(params, modes, &amps.alphas, ctrl, grid, options),
    );
    let (single, double) = (single?, double?);
    let result = LadderResult {
        eta_1: single.eta_1,
        eta_2: double.eta_2,
        norm_1: single.state.norm_sqr(),
        norm_2: double.state.norm_sqr(),
    };
    Ok(LadderRun {
        result,
        single,
        double,
    })
}

/// Mode amplitudes referenced to `t = 0` propagated freely back to `t1`.
pub(crate) fn amplitudes_at(alphas: &[C64], modes: &ModeGrid, t1: f64) -> Vec<C64> {
    alphas
        .iter()
        .enumerate()
        .map(|(i, a)| a * C64::cis(-modes.detuning(i) * t1))
        .collect()
}
