use num_complex::Complex64 as C64;

use super::{amplitudes_at, BlockSample};
use crate::error::{Error, Result};
use crate::fields::{ControlField, ModeGrid, PhysicalParams, PulseEnvelope, TimeGrid};
use crate::ode::{Dopri5, OdeStats, OdeSystem};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const TRAJECTORY_SAMPLES: usize = 241;

/// One-excitation amplitudes. `modes` is empty for the input–output variant.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleExcitationState {
    pub c1: C64,
    pub e1: C64,
    pub r1: C64,
    pub modes: Vec<C64>,
}

impl SingleExcitationState {
    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.e1.norm_sqr() + self.r1.norm_sqr() + self.line_norm()
    }

    pub fn line_norm(&self) -> f64 {
        self.modes.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn eta(&self) -> f64 {
        self.r1.norm_sqr()
    }
}

#[derive(Clone, Debug)]
pub struct SingleExcitationRun {
    pub state: SingleExcitationState,
    pub eta_1: f64,
    /// `∫ (2γ|e1|² + 2κ_loss|c1|²) dt` over the window.
    pub dissipated: f64,
    pub trajectory: Vec<BlockSample>,
    pub stats: OdeStats,
}

struct IoSystem<'a> {
    params: &'a PhysicalParams,
    env: &'a PulseEnvelope,
    ctrl: &'a ControlField,
    drive: f64,
}

// Layout: [c1, e1, r1, accumulated dissipation].
impl OdeSystem for IoSystem<'_> {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let p = self.params;
        let omega = self.ctrl.rabi(t);
        let (c, e, r) = (y[0], y[1], y[2]);
        dy[0] = -I * p.g * e - I * self.drive * self.env.amplitude(t) - p.kappa_total() * c;
        dy[1] = (I * p.cavity_detuning - p.gamma) * e - I * p.g * c - I * omega * r;
        dy[2] = -I * p.two_photon_detuning * r - I * omega.conj() * e;
        dy[3] = C64::new(
            2.0 * p.gamma * e.norm_sqr() + 2.0 * p.kappa_loss * c.norm_sqr(),
            0.0,
        );
    }
}

/// Single-photon storage with the line eliminated through input–output
/// relations. The envelope is rescaled to unit norm.
pub fn integrate_single_excitation_io(
    params: &PhysicalParams,
    env: &PulseEnvelope,
    ctrl: &ControlField,
    grid: &TimeGrid,
) -> Result<SingleExcitationRun> {
    params.validate()?;
    grid.validate()?;
    let env = env.normalized();
    let sys = IoSystem {
        params,
        env: &env,
        ctrl,
        drive: (2.0 * params.kappa).sqrt(),
    };
    let mut y = vec![ZERO; 4];
    let samples = crate::fields::uniform(grid.t1, grid.t2, TRAJECTORY_SAMPLES);
    let mut trajectory = Vec::with_capacity(samples.len());
    let stats =
        Dopri5::new(grid.step).integrate(&sys, grid.t1, grid.t2, &mut y, &samples, |t, s| {
            trajectory.push(BlockSample {
                t,
                norm: s[..3].iter().map(|v| v.norm_sqr()).sum(),
                eta: s[2].norm_sqr(),
                dissipated: s[3].re,
            });
            Ok(())
        })?;
    let state = SingleExcitationState {
        c1: y[0],
        e1: y[1],
        r1: y[2],
        modes: Vec::new(),
    };
    Ok(SingleExcitationRun {
        eta_1: state.eta(),
        dissipated: y[3].re,
        state,
        trajectory,
        stats,
    })
}

struct ModeSystem<'a> {
    params: &'a PhysicalParams,
    ctrl: &'a ControlField,
    detunings: Vec<f64>,
    lambda: f64,
}

// Layout: [c1, e1, r1, E_0 .. E_{N-1}, accumulated dissipation].
impl OdeSystem for ModeSystem<'_> {
    fn dim(&self) -> usize {
        self.detunings.len() + 4
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let p = self.params;
        let n = self.detunings.len();
        let omega = self.ctrl.rabi(t);
        let (c, e, r) = (y[0], y[1], y[2]);
        let line = &y[3..3 + n];
        let sum: C64 = line.iter().sum();
        dy[0] = -I * p.g * e - I * self.lambda * sum - p.kappa_loss * c;
        dy[1] = (I * p.cavity_detuning - p.gamma) * e - I * p.g * c - I * omega * r;
        dy[2] = -I * p.two_photon_detuning * r - I * omega.conj() * e;
        let feed = -I * self.lambda * c;
        for ((d, a), w) in dy[3..3 + n].iter_mut().zip(line).zip(&self.detunings) {
            *d = -I * w * a + feed;
        }
        dy[3 + n] = C64::new(
            2.0 * p.gamma * e.norm_sqr() + 2.0 * p.kappa_loss * c.norm_sqr(),
            0.0,
        );
    }
}

/// Single-photon storage with the line resolved into `N` discrete modes.
/// `alphas` are the coherent mode amplitudes referenced to `t = 0`; they are
/// normalized to a single photon and propagated to `t1`.
pub fn integrate_single_excitation_modes(
    params: &PhysicalParams,
    modes: &ModeGrid,
    alphas: &[C64],
    ctrl: &ControlField,
    grid: &TimeGrid,
) -> Result<SingleExcitationRun> {
    params.validate()?;
    grid.validate()?;
    if alphas.len() != modes.count() {
        return Err(Error::DimensionMismatch {
            expected: modes.count(),
            got: alphas.len(),
        });
    }
    let photons: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
    if !(photons > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let n = modes.count();
    let sys = ModeSystem {
        params,
        ctrl,
        detunings: modes.detunings(),
        lambda: modes.coupling(),
    };
    let mut y = vec![ZERO; n + 4];
    let scale = photons.sqrt().recip();
    for (slot, a) in y[3..3 + n]
        .iter_mut()
        .zip(amplitudes_at(alphas, modes, grid.t1))
    {
        *slot = a * scale;
    }
    let samples = crate::fields::uniform(grid.t1, grid.t2, TRAJECTORY_SAMPLES);
    let mut trajectory = Vec::with_capacity(samples.len());
    let stats =
        Dopri5::new(grid.step).integrate(&sys, grid.t1, grid.t2, &mut y, &samples, |t, s| {
            trajectory.push(BlockSample {
                t,
                norm: s[..3 + n].iter().map(|v| v.norm_sqr()).sum(),
                eta: s[2].norm_sqr(),
                dissipated: s[3 + n].re,
            });
            Ok(())
        })?;
    let state = SingleExcitationState {
        c1: y[0],
        e1: y[1],
        r1: y[2],
        modes: y[3..3 + n].to_vec(),
    };
    Ok(SingleExcitationRun {
        eta_1: state.eta(),
        dissipated: y[3 + n].re,
        state,
        trajectory,
        stats,
    })
}
