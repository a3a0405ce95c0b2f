//! Batch front-end for the cavity-memory solvers: photon-number sweeps, solver
//! comparisons, pulse dumps and closed-form figures of merit.

// `!(x > 0.0)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod error;
pub mod metrics;
pub mod output;
pub mod pulse;
pub mod sweep;

use std::path::PathBuf;

use cavity_memory::fields::ModeGrid;
use cavity_memory::ladder::{solve_ladder, LadderResult, TwoExcitationOptions};
use cavity_memory::master::{integrate_master, MasterRunResult};

pub use config::RunConfig;
pub use error::{CliError, CliResult};

/// Largest `n` at which the two solvers are required to agree.
pub const GATE_MAX_PHOTONS: f64 = 0.1;

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; zero uses one per core.
    pub jobs: usize,
    /// Allow coherent ladder predictions above the validity cap.
    pub force: bool,
    /// Overrides the output directory of the config.
    pub out: Option<PathBuf>,
}

impl RunOptions {
    pub fn output_dir(&self, cfg: &RunConfig) -> PathBuf {
        self.out.clone().unwrap_or_else(|| cfg.output_dir.clone())
    }

    pub fn pool(&self) -> CliResult<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()?)
    }
}

/// Result of a subcommand: the files written and whether every row and gate passed.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub success: bool,
}

/// Relative solver discrepancy `|η_ladder − η_master| / η_master`.
pub fn relative_gap(eta_master: f64, eta_ladder: f64) -> f64 {
    (eta_ladder - eta_master).abs() / eta_master.abs()
}

pub(crate) fn run_master(cfg: &RunConfig, photons: f64) -> CliResult<MasterRunResult> {
    let env = cfg.envelope_for(photons)?;
    Ok(integrate_master(
        &cfg.params,
        &env,
        &cfg.control,
        &cfg.grid,
        cfg.file.m_max,
    )?)
}

pub(crate) fn run_ladder(cfg: &RunConfig, modes: &ModeGrid) -> CliResult<LadderResult> {
    let run = solve_ladder(
        &cfg.params,
        &cfg.envelope,
        modes,
        &cfg.control,
        &cfg.grid,
        &TwoExcitationOptions::default(),
    )?;
    Ok(run.result)
}

/// Refuses coherent ladder predictions above the validity cap unless forced.
pub(crate) fn check_validity(field: &str, photons: &[f64], force: bool) -> CliResult<()> {
    use cavity_memory::ladder::LADDER_VALIDITY_CAP;
    match photons.iter().find(|n| **n > LADDER_VALIDITY_CAP) {
        Some(n) if !force => Err(CliError::config(
            field,
            format!("n = {n} exceeds the two-excitation validity cap {LADDER_VALIDITY_CAP}; pass --force to run anyway"),
        )),
        _ => Ok(()),
    }
}
