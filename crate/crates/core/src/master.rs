//! Displaced-frame master equation for the atom and the cavity mode, driven
//! by the classical amplitude `√(2κ) E_in(t)` of the coherent input.

use std::cell::RefCell;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{envelope_norm, ControlField, PhysicalParams, PulseEnvelope, TimeGrid};
use crate::ode::{Dopri5, OdeStats, OdeSystem};
use crate::operators::{
    lindblad_apply, AtomLevel, DensityState, Dissipator, HamiltonianParts, HilbertSpace,
};

pub const DEFAULT_M_MAX: usize = 14;
/// Abort when the smallest eigenvalue of ρ drops below this.
pub const POSITIVITY_FLOOR: f64 = -1e-7;
/// Successive η values closer than this count as converged in the cavity truncation.
pub const TRUNCATION_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct MasterOptions {
    pub m_max: usize,
    /// Uniform diagnostic samples across the window (trace, positivity, ⟨a†a⟩).
    pub diagnostic_samples: usize,
    pub record_trajectory: bool,
    /// Upper bound on the integrator step, as a fraction of the window.
    pub max_step_fraction: f64,
}

impl Default for MasterOptions {
    fn default() -> Self {
        MasterOptions {
            m_max: DEFAULT_M_MAX,
            diagnostic_samples: 121,
            record_trajectory: false,
            max_step_fraction: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub eta: f64,
    pub photons: f64,
    pub trace_defect: f64,
}

#[derive(Clone, Debug)]
pub struct MasterRunResult {
    pub state: DensityState,
    pub eta: f64,
    pub nu: f64,
    /// `∫_{t1}^{t2} |E_in|² dt`.
    pub window_photons: f64,
    pub max_photons: f64,
    pub max_trace_defect: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub m_max: usize,
    pub stats: OdeStats,
    pub warnings: Vec<String>,
    pub trajectory: Vec<TrajectoryPoint>,
}

struct MasterSystem<'a> {
    parts: HamiltonianParts,
    diss: Dissipator,
    env: &'a PulseEnvelope,
    ctrl: &'a ControlField,
    dim: usize,
    h: RefCell<Vec<(usize, usize, C64)>>,
}

impl OdeSystem for MasterSystem<'_> {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let mut h = self.h.borrow_mut();
        self.parts
            .assemble(self.ctrl.rabi(t), self.env.amplitude(t), &mut h);
        lindblad_apply(&h, &self.diss, y, dy);
    }
}

/// `η = Σ_m <r,m|ρ|r,m>`.
pub fn storage_efficiency(state: &DensityState) -> f64 {
    let space = space_of(state);
    state.population(&space, AtomLevel::Stored)
}

/// `Tr(ρ a†a)`.
pub fn intracavity_photons(state: &DensityState) -> f64 {
    state.mean_photons(&space_of(state))
}

fn space_of(state: &DensityState) -> HilbertSpace {
    HilbertSpace::new(state.rho.nrows() / 4 - 1).expect("density matrix of a valid space")
}

/// Integrates from `|g,0><g,0|` at `t1` to `t2` with default options.
pub fn integrate_master(
    params: &PhysicalParams,
    env: &PulseEnvelope,
    ctrl: &ControlField,
    grid: &TimeGrid,
    m_max: usize,
) -> Result<MasterRunResult> {
    let options = MasterOptions {
        m_max,
        ..MasterOptions::default()
    };
    integrate_master_with(params, env, ctrl, grid, &options)
}

pub fn integrate_master_with(
    params: &PhysicalParams,
    env: &PulseEnvelope,
    ctrl: &ControlField,
    grid: &TimeGrid,
    options: &MasterOptions,
) -> Result<MasterRunResult> {
    params.validate()?;
    grid.validate()?;
    let space = HilbertSpace::new(options.m_max)?;
    let dim = space.dim();
    let sys = MasterSystem {
        parts: HamiltonianParts::new(params, &space),
        diss: Dissipator::new(params, &space),
        env,
        ctrl,
        dim,
        h: RefCell::new(Vec::new()),
    };

    let mut y = DensityState::pure(&space, AtomLevel::Ground, 0, grid.t1).to_row_major();
    let samples = crate::fields::uniform(grid.t1, grid.t2, options.diagnostic_samples.max(2));

    let mut max_photons: f64 = 0.0;
    let mut max_trace_defect: f64 = 0.0;
    let mut max_herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut trajectory = Vec::new();
    let integrator = Dopri5::new(grid.step).with_max_step(grid.span() * options.max_step_fraction);
    let stats = integrator.integrate(&sys, grid.t1, grid.t2, &mut y, &samples, |t, data| {
        let state = DensityState::from_row_major(dim, data, t);
        let photons = state.mean_photons(&space);
        let trace_defect = (state.trace() - C64::new(1.0, 0.0)).norm();
        let lowest = state.min_eigenvalue();
        max_photons = max_photons.max(photons);
        max_trace_defect = max_trace_defect.max(trace_defect);
        max_herm = max_herm.max(state.hermiticity_defect());
        min_eig = min_eig.min(lowest);
        if lowest < POSITIVITY_FLOOR {
            return Err(Error::PositivityViolation {
                t,
                min_eigenvalue: lowest,
            });
        }
        if options.record_trajectory {
            let eta = state.population(&space, AtomLevel::Stored);
            trajectory.push(TrajectoryPoint {
                t,
                eta,
                photons,
                trace_defect,
            });
        }
        Ok(())
    })?;

    let state = DensityState::from_row_major(dim, &y, grid.t2);
    let eta = state.population(&space, AtomLevel::Stored);
    let window_photons = envelope_norm(env, grid.t1, grid.t2)?;
    let nu = if window_photons > 0.0 {
        eta / window_photons
    } else {
        f64::NAN
    };

    let mut warnings = Vec::new();
    if max_photons > options.m_max as f64 - 3.0 {
        let msg = format!(
            "mean intracavity photon number reached {max_photons:.3}, too close to the truncation m_max = {}",
            options.m_max
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    Ok(MasterRunResult {
        state,
        eta,
        nu,
        window_photons,
        max_photons,
        max_trace_defect,
        max_hermiticity_defect: max_herm,
        min_eigenvalue: min_eig,
        m_max: options.m_max,
        stats,
        warnings,
        trajectory,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationRow {
    pub m_max: usize,
    pub eta: f64,
    /// `|η(m) − η(previous m)|`, absent for the first row.
    pub change: Option<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationScan {
    pub rows: Vec<TruncationRow>,
    /// Smallest truncation whose η agrees with the previous one.
    pub converged_at: Option<usize>,
}

impl TruncationScan {
    pub fn eta_at(&self, m_max: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.m_max == m_max).map(|r| r.eta)
    }
}

/// η as a function of the cavity truncation; `m_list` must be ascending.
pub fn truncation_scan(
    params: &PhysicalParams,
    env: &PulseEnvelope,
    ctrl: &ControlField,
    grid: &TimeGrid,
    m_list: &[usize],
) -> Result<TruncationScan> {
    if m_list.is_empty() || m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "m_list",
            "must be non-empty and strictly ascending",
        ));
    }
    let mut rows: Vec<TruncationRow> = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let eta = integrate_master(params, env, ctrl, grid, m)?.eta;
        let change = rows.last().map(|r| (eta - r.eta).abs());
        let converged = change.is_some_and(|c| c < TRUNCATION_TOLERANCE);
        rows.push(TruncationRow {
            m_max: m,
            eta,
            change,
            converged,
        });
    }
    let converged_at = rows.iter().find(|r| r.converged).map(|r| r.m_max);
    Ok(TruncationScan { rows, converged_at })
}
