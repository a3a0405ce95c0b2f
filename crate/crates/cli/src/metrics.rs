//! Closed-form figures of merit for a configuration.

use cavity_memory::metrics::FigureOfMerit;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub cooperativity: f64,
    pub eta_max_sp: f64,
    /// `γ T_c C`.
    pub gamma_tc_c: f64,
    pub adiabatic: bool,
    pub coherence_time_us: f64,
}

pub fn metrics(cfg: &RunConfig) -> CliResult<MetricsReport> {
    let fom = FigureOfMerit::evaluate(&cfg.params, cfg.coherence_time())?;
    Ok(MetricsReport {
        cooperativity: fom.cooperativity,
        eta_max_sp: fom.eta_max_sp,
        gamma_tc_c: fom.adiabaticity.value,
        adiabatic: fom.adiabaticity.adiabatic,
        coherence_time_us: cfg.coherence_time(),
    })
}
