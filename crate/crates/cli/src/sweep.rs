//! Efficiency and fidelity as a function of the mean photon number.

use cavity_memory::ladder::{LadderResult, LADDER_VALIDITY_CAP};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{fmt_float, prepare_dir, write_csv, write_json};
use crate::{
    check_validity, relative_gap, run_ladder, run_master, Outcome, RunOptions, GATE_MAX_PHOTONS,
};

pub const HEADER: [&str; 9] = [
    "n",
    "eta_master",
    "nu_master",
    "eta_ladder",
    "nu_ladder",
    "eta_series",
    "max_photons",
    "trace_defect",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MasterPoint {
    pub eta: f64,
    pub nu: f64,
    pub max_photons: f64,
    pub trace_defect: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderPoint {
    pub eta: f64,
    pub nu: f64,
    pub eta_series: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub photons: f64,
    pub master: Option<MasterPoint>,
    pub ladder: Option<LadderPoint>,
    /// Relative solver gap, when the agreement gate applies to this row.
    pub gate_gap: Option<f64>,
    pub gate_passed: Option<bool>,
    pub errors: Vec<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        !self.errors.is_empty()
    }

    pub fn status(&self) -> String {
        if self.failed() {
            return format!("failed: {}", self.errors.join("; "));
        }
        match self.gate_passed {
            Some(false) => "gate_failed".into(),
            _ if self.ladder.is_some() && self.photons > LADDER_VALIDITY_CAP => {
                "outside_validity".into()
            }
            _ => "ok".into(),
        }
    }

    fn record(&self) -> Vec<String> {
        let m = self.master.as_ref();
        let l = self.ladder.as_ref();
        vec![
            fmt_float(Some(self.photons)),
            fmt_float(m.map(|p| p.eta)),
            fmt_float(m.map(|p| p.nu)),
            fmt_float(l.map(|p| p.eta)),
            fmt_float(l.map(|p| p.nu)),
            fmt_float(l.map(|p| p.eta_series)),
            fmt_float(m.map(|p| p.max_photons)),
            fmt_float(m.map(|p| p.trace_defect)),
            self.status(),
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub ladder: Option<LadderResult>,
    pub ladder_error: Option<String>,
    pub gate_tolerance: f64,
    pub rows: Vec<SweepRow>,
    pub success: bool,
}

/// Runs every point of the sweep. Solver failures are recorded per row.
pub fn sweep(cfg: &RunConfig, opts: &RunOptions) -> CliResult<SweepReport> {
    let solver = cfg.file.solver;
    if solver.ladder() {
        check_validity("pulse.photons", cfg.photons(), opts.force)?;
    }
    let pool = opts.pool()?;
    pool.install(|| {
        let ladder = solver.ladder().then(|| run_ladder(cfg, &cfg.modes));
        let masters: Vec<_> = if solver.master() {
            cfg.photons()
                .par_iter()
                .map(|&n| Some(run_master(cfg, n)))
                .collect()
        } else {
            cfg.photons().iter().map(|_| None).collect()
        };
        let tolerance = cfg.file.compare.tolerance;
        let rows: Vec<SweepRow> = cfg
            .photons()
            .iter()
            .zip(masters)
            .map(|(&n, master)| {
                let mut errors = Vec::new();
                let master = master.and_then(|r| match r {
                    Ok(run) => Some(MasterPoint {
                        eta: run.eta,
                        nu: run.nu,
                        max_photons: run.max_photons,
                        trace_defect: run.max_trace_defect,
                    }),
                    Err(e) => {
                        errors.push(format!("master: {e}"));
                        None
                    }
                });
                let ladder = ladder.as_ref().and_then(|r| match r {
                    Ok(res) => {
                        let c = res.coherent(n);
                        Some(LadderPoint {
                            eta: c.eta,
                            nu: c.nu,
                            eta_series: c.series.eta,
                        })
                    }
                    Err(e) => {
                        errors.push(format!("ladder: {e}"));
                        None
                    }
                });
                let gate_gap = match (&master, &ladder) {
                    (Some(m), Some(l)) if n > 0.0 && n <= GATE_MAX_PHOTONS => {
                        Some(relative_gap(m.eta, l.eta))
                    }
                    _ => None,
                };
                let gate_passed = gate_gap.map(|g| g <= tolerance);
                SweepRow {
                    photons: n,
                    master,
                    ladder,
                    gate_gap,
                    gate_passed,
                    errors,
                }
            })
            .collect();
        let success = rows
            .iter()
            .all(|r| !r.failed() && r.gate_passed != Some(false));
        let (ladder, ladder_error) = match ladder {
            Some(Ok(res)) => (Some(res), None),
            Some(Err(e)) => (None, Some(e.to_string())),
            None => (None, None),
        };
        Ok(SweepReport {
            ladder,
            ladder_error,
            gate_tolerance: tolerance,
            rows,
            success,
        })
    })
}

/// Writes `sweep.csv` and `sweep_summary.json`.
pub fn run_sweep(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Outcome> {
    let report = sweep(cfg, opts)?;
    for row in report
        .rows
        .iter()
        .filter(|r| r.failed() || r.gate_passed == Some(false))
    {
        log::error!("n = {}: {}", row.photons, row.status());
    }
    let dir = opts.output_dir(cfg);
    prepare_dir(&dir)?;
    let files = vec![
        write_csv(
            &dir.join("sweep.csv"),
            &HEADER,
            report.rows.iter().map(SweepRow::record),
        )?,
        write_json(&dir.join("sweep_summary.json"), &report)?,
    ];
    Ok(Outcome {
        files,
        success: report.success,
    })
}
