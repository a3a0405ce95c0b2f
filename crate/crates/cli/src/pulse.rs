//! Samples of the input envelope and the control field across the window.

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{fmt_float, prepare_dir, write_csv};
use crate::{Outcome, RunOptions};

pub const HEADER: [&str; 5] = ["t", "e_in_re", "e_in_im", "omega_re", "omega_im"];

/// Uniform samples across `[t1, t2]`, merged with the knots of a tabulated
/// control so that the table is reproduced exactly.
pub fn sample_times(cfg: &RunConfig) -> Vec<f64> {
    let (t1, t2) = (cfg.grid.t1, cfg.grid.t2);
    let mut ts = cfg
        .grid
        .with_quadrature_points(cfg.file.output.pulse_samples)
        .sample_times();
    if let Some(table) = &cfg.control_table {
        ts.extend(
            table
                .times()
                .iter()
                .copied()
                .filter(|t| (t1..=t2).contains(t)),
        );
        ts.sort_by(f64::total_cmp);
        ts.dedup();
    }
    ts
}

/// Writes `pulse.csv` for the first photon number of the sweep list.
pub fn dump_pulse(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Outcome> {
    let env = cfg.envelope_for(cfg.photons()[0])?;
    let rows = sample_times(cfg).into_iter().map(|t| {
        let e = env.amplitude(t);
        let omega = cfg.control.rabi(t);
        [
            Some(t),
            Some(e.re),
            Some(e.im),
            Some(omega.re),
            Some(omega.im),
        ]
        .map(fmt_float)
    });
    let dir = opts.output_dir(cfg);
    prepare_dir(&dir)?;
    let file = write_csv(&dir.join("pulse.csv"), &HEADER, rows)?;
    Ok(Outcome {
        files: vec![file],
        success: true,
    })
}
