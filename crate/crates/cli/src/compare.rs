//! Master equation against the two-excitation ladder at small `n`.

use cavity_memory::fields::ModeGrid;
use cavity_memory::ladder::{LadderResult, LADDER_VALIDITY_CAP};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt_float, prepare_dir, write_csv, write_json};
use crate::{
    check_validity, relative_gap, run_ladder, run_master, Outcome, RunOptions, GATE_MAX_PHOTONS,
};

pub const ROW_HEADER: [&str; 5] = ["n", "eta_master", "eta_ladder", "relative_gap", "gate"];
pub const CONVERGENCE_HEADER: [&str; 6] = [
    "modes",
    "eta_1",
    "eta_2",
    "norm_1",
    "norm_2",
    "eta_2_change",
];

pub const OUTSIDE_VALIDITY_NOTE: &str =
    "outside the two-excitation validity range: the neglected m >= 3 terms enter at O(n^3), no pass/fail";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    Pass,
    Fail,
    /// Inside the validity range but above the photon number where agreement is required.
    NotGated,
    OutsideValidity,
    Failed,
}

impl Gate {
    pub fn label(self) -> &'static str {
        match self {
            Gate::Pass => "pass",
            Gate::Fail => "fail",
            Gate::NotGated => "not_gated",
            Gate::OutsideValidity => "outside_validity",
            Gate::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub photons: f64,
    pub eta_master: Option<f64>,
    pub eta_ladder: Option<f64>,
    pub relative_gap: Option<f64>,
    pub gate: Gate,
    pub note: Option<String>,
}

/// `η⁽¹⁾, η⁽²⁾` for one mode count at fixed line length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub modes: usize,
    pub result: Option<LadderResult>,
    /// `|η⁽²⁾(N) − η⁽²⁾(previous N)|`.
    pub eta_2_change: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub tolerance: f64,
    pub gate_max_photons: f64,
    pub validity_cap: f64,
    pub modes: usize,
    pub rows: Vec<CompareRow>,
    pub convergence: Vec<ConvergenceRow>,
    pub success: bool,
}

pub fn compare(cfg: &RunConfig, opts: &RunOptions) -> CliResult<CompareReport> {
    let photons = &cfg.file.compare.photons;
    check_validity("compare.photons", photons, opts.force)?;
    let mut counts = cfg.file.compare.mode_counts.clone();
    counts.push(cfg.modes.count());
    counts.sort_unstable();
    counts.dedup();
    let flight_time = cfg.modes.flight_time();
    let grids = counts
        .iter()
        .map(|&n| {
            ModeGrid::new(n, flight_time, cfg.params.kappa)
                .map_err(|e| CliError::config("compare.mode_counts", e.to_string()))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let pool = opts.pool()?;
    let (ladders, masters) = pool.install(|| {
        rayon::join(
            || {
                grids
                    .par_iter()
                    .map(|g| run_ladder(cfg, g))
                    .collect::<Vec<_>>()
            },
            || {
                photons
                    .par_iter()
                    .map(|&n| run_master(cfg, n))
                    .collect::<Vec<_>>()
            },
        )
    });

    let mut convergence: Vec<ConvergenceRow> = Vec::with_capacity(counts.len());
    for (&modes, ladder) in counts.iter().zip(ladders) {
        let (result, error) = match ladder {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let previous = convergence.last().and_then(|c| c.result.map(|r| r.eta_2));
        let eta_2_change = previous
            .zip(result.map(|r| r.eta_2))
            .map(|(a, b)| (b - a).abs());
        convergence.push(ConvergenceRow {
            modes,
            result,
            eta_2_change,
            error,
        });
    }
    let primary = convergence
        .iter()
        .find(|c| c.modes == cfg.modes.count())
        .expect("primary mode count was added");
    let tolerance = cfg.file.compare.tolerance;

    let rows: Vec<CompareRow> = photons
        .iter()
        .zip(masters)
        .map(|(&n, master)| {
            let mut notes = Vec::new();
            let eta_master = master
                .map_err(|e| notes.push(format!("master: {e}")))
                .ok()
                .map(|r| r.eta);
            if let Some(e) = &primary.error {
                notes.push(format!("ladder: {e}"));
            }
            let eta_ladder = primary.result.map(|r| r.coherent(n).eta);
            let relative_gap = eta_master
                .zip(eta_ladder)
                .filter(|_| n > 0.0)
                .map(|(m, l)| relative_gap(m, l));
            let gate = match relative_gap {
                None => Gate::Failed,
                Some(_) if n > LADDER_VALIDITY_CAP => {
                    notes.push(OUTSIDE_VALIDITY_NOTE.into());
                    Gate::OutsideValidity
                }
                Some(_) if n > GATE_MAX_PHOTONS => Gate::NotGated,
                Some(g) if g <= tolerance => Gate::Pass,
                Some(_) => Gate::Fail,
            };
            if gate == Gate::Failed && notes.is_empty() {
                notes.push("relative gap undefined at n = 0".into());
            }
            let note = (!notes.is_empty()).then(|| notes.join("; "));
            CompareRow {
                photons: n,
                eta_master,
                eta_ladder,
                relative_gap,
                gate,
                note,
            }
        })
        .collect();

    let success = rows
        .iter()
        .all(|r| !matches!(r.gate, Gate::Fail | Gate::Failed))
        && convergence.iter().all(|c| c.error.is_none());
    Ok(CompareReport {
        tolerance,
        gate_max_photons: GATE_MAX_PHOTONS,
        validity_cap: LADDER_VALIDITY_CAP,
        modes: cfg.modes.count(),
        rows,
        convergence,
        success,
    })
}

impl CompareReport {
    /// One human-readable line per row and per mode count.
    pub fn summary(&self) -> Vec<String> {
        let rows = self.rows.iter().map(|r| {
            let gap = r
                .relative_gap
                .map_or("n/a".into(), |g| format!("{:.3}%", 100.0 * g));
            let note = r
                .note
                .as_deref()
                .map_or(String::new(), |n| format!(" ({n})"));
            format!(
                "n = {:<8} gap = {gap:<9} {}{note}",
                r.photons,
                r.gate.label().to_uppercase()
            )
        });
        let conv = self
            .convergence
            .iter()
            .map(|c| match (&c.result, &c.error) {
                (Some(r), _) => format!(
                    "N = {:<5} eta_1 = {:.6} eta_2 = {:.6}{}",
                    c.modes,
                    r.eta_1,
                    r.eta_2,
                    c.eta_2_change
                        .map_or(String::new(), |d| format!(" change {d:.2e}"))
                ),
                (None, e) => format!(
                    "N = {:<5} failed: {}",
                    c.modes,
                    e.as_deref().unwrap_or("unknown")
                ),
            });
        rows.chain(conv)
            .chain(std::iter::once(format!(
                "overall: {}",
                if self.success { "PASS" } else { "FAIL" }
            )))
            .collect()
    }
}

/// Writes `compare.csv`, `compare_convergence.csv` and `compare_report.json`.
pub fn compare_solvers(cfg: &RunConfig, opts: &RunOptions) -> CliResult<(Outcome, CompareReport)> {
    let report = compare(cfg, opts)?;
    let dir = opts.output_dir(cfg);
    prepare_dir(&dir)?;
    let rows = report.rows.iter().map(|r| {
        let mut rec: Vec<String> = [Some(r.photons), r.eta_master, r.eta_ladder, r.relative_gap]
            .into_iter()
            .map(fmt_float)
            .collect();
        rec.push(r.gate.label().into());
        rec
    });
    let conv = report.convergence.iter().map(|c| {
        let r = c.result.as_ref();
        let mut rec = vec![c.modes.to_string()];
        rec.extend(
            [
                r.map(|r| r.eta_1),
                r.map(|r| r.eta_2),
                r.map(|r| r.norm_1),
                r.map(|r| r.norm_2),
                c.eta_2_change,
            ]
            .into_iter()
            .map(fmt_float),
        );
        rec
    });
    let files = vec![
        write_csv(&dir.join("compare.csv"), &ROW_HEADER, rows)?,
        write_csv(
            &dir.join("compare_convergence.csv"),
            &CONVERGENCE_HEADER,
            conv,
        )?,
        write_json(&dir.join("compare_report.json"), &report)?,
    ];
    let success = report.success;
    Ok((Outcome { files, success }, report))
}
