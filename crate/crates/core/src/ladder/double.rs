use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::initial::{ladder_initial_conditions, packed_index, SymmetricPairs};
use super::{amplitudes_at, BlockSample};
use crate::error::{Error, Result};
use crate::fields::{ControlField, ModeGrid, PhysicalParams, TimeGrid};
use crate::ode::{Dopri5, OdeStats, OdeSystem};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const SQRT2: f64 = std::f64::consts::SQRT_2;

pub const DEFAULT_MEMORY_LIMIT_MIB: f64 = 2048.0;
/// State-sized buffers held at once by the integrator, including the state itself.
const WORKING_COPIES: f64 = 12.0;
/// Below this many modes the pair update runs on one thread.
const PARALLEL_MIN_MODES: usize = 64;

#[derive(Clone, Debug)]
pub struct TwoExcitationOptions {
    pub memory_limit_mib: f64,
    pub parallel: bool,
    pub trajectory_samples: usize,
}

impl Default for TwoExcitationOptions {
    fn default() -> Self {
        TwoExcitationOptions {
            memory_limit_mib: DEFAULT_MEMORY_LIMIT_MIB,
            parallel: true,
            trajectory_samples: 121,
        }
    }
}

/// Two-excitation amplitudes. `pairs` holds `A_{k,k'} = E_{k,k'} + E_{k',k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoExcitationState {
    pub c2: C64,
    pub e2: C64,
    pub r2: C64,
    pub cavity_line: Vec<C64>,
    pub excited_line: Vec<C64>,
    pub stored_line: Vec<C64>,
    pub pairs: SymmetricPairs,
}

impl TwoExcitationState {
    pub fn norm_sqr(&self) -> f64 {
        let line = |v: &[C64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>();
        self.c2.norm_sqr()
            + self.e2.norm_sqr()
            + self.r2.norm_sqr()
            + line(&self.cavity_line)
            + line(&self.excited_line)
            + line(&self.stored_line)
            + pair_norm(self.pairs.size(), self.pairs.data())
    }

    /// Population of `|r>` within the block.
    pub fn eta(&self) -> f64 {
        self.r2.norm_sqr() + self.stored_line.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    /// `E_{k,k'} = A_{k,k'} / 2`.
    pub fn pair_amplitude(&self, k: usize, kp: usize) -> C64 {
        self.pairs.get(k, kp) * 0.5
    }
}

#[derive(Clone, Debug)]
pub struct TwoExcitationRun {
    pub state: TwoExcitationState,
    pub eta_2: f64,
    pub dissipated: f64,
    pub trajectory: Vec<BlockSample>,
    pub stats: OdeStats,
}

/// Rough peak memory of the two-excitation integration for `n` modes.
pub fn two_excitation_memory_mib(n: usize) -> f64 {
    (layout_len(n) as f64) * 16.0 * WORKING_COPIES / (1024.0 * 1024.0)
}

/// Fails with the largest admissible odd mode count when `n` modes exceed the memory limit.
pub(crate) fn check_memory(n: usize, options: &TwoExcitationOptions) -> Result<()> {
    let needed = two_excitation_memory_mib(n);
    if needed > options.memory_limit_mib {
        return Err(Error::MemoryLimit {
            needed_mib: needed,
            limit_mib: options.memory_limit_mib,
            suggested_modes: suggest_modes(options.memory_limit_mib),
        });
    }
    Ok(())
}

fn layout_len(n: usize) -> usize {
    3 + 3 * n + SymmetricPairs::len_for(n) + 1
}

fn pair_norm(n: usize, pairs: &[C64]) -> f64 {
    let mut s = 0.0;
    for a in 0..n {
        let row = &pairs[packed_index(n, a, a)..packed_index(n, a, n - 1) + 1];
        s += 0.5 * row[0].norm_sqr() + row[1..].iter().map(|v| v.norm_sqr()).sum::<f64>();
    }
    s
}

struct Layout {
    n: usize,
}

impl Layout {
    fn cavity(&self) -> std::ops::Range<usize> {
        3..3 + self.n
    }
    fn excited(&self) -> std::ops::Range<usize> {
        3 + self.n..3 + 2 * self.n
    }
    fn stored(&self) -> std::ops::Range<usize> {
        3 + 2 * self.n..3 + 3 * self.n
    }
    fn pairs(&self) -> std::ops::Range<usize> {
        3 + 3 * self.n..3 + 3 * self.n + SymmetricPairs::len_for(self.n)
    }
    fn flux(&self) -> usize {
        layout_len(self.n) - 1
    }
}

struct TwoSystem<'a> {
    params: &'a PhysicalParams,
    ctrl: &'a ControlField,
    detunings: Vec<f64>,
    lambda: f64,
    layout: Layout,
    parallel: bool,
}

impl TwoSystem<'_> {
    fn pair_rows(&self, pairs: &[C64], ec: &[C64], out: &mut [C64]) {
        let n = self.layout.n;
        let lambda = self.lambda;
        let w = &self.detunings;
        let row = |a: usize, dst: &mut [C64]| {
            let start = packed_index(n, a, a);
            let src = &pairs[start..start + (n - a)];
            for (j, (d, v)) in dst.iter_mut().zip(src).enumerate() {
                let b = a + j;
                *d = -I * (w[a] + w[b]) * v - I * lambda * (ec[a] + ec[b]);
            }
        };
        let mut rows: Vec<(usize, &mut [C64])> = Vec::with_capacity(n);
        let mut rest = out;
        for a in 0..n {
            let (head, tail) = rest.split_at_mut(n - a);
            rows.push((a, head));
            rest = tail;
        }
        if self.parallel && n >= PARALLEL_MIN_MODES {
            rows.into_par_iter().for_each(|(a, dst)| row(a, dst));
        } else {
            rows.into_iter().for_each(|(a, dst)| row(a, dst));
        }
    }
}

impl OdeSystem for TwoSystem<'_> {
    fn dim(&self) -> usize {
        layout_len(self.layout.n)
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let p = self.params;
        let l = &self.layout;
        let n = l.n;
        let lambda = self.lambda;
        let omega = self.ctrl.rabi(t);
        let (c2, e2, r2) = (y[0], y[1], y[2]);
        let (ec, ee, er) = (&y[l.cavity()], &y[l.excited()], &y[l.stored()]);
        let pairs = &y[l.pairs()];

        // Full symmetric row sums of A.
        let mut rsum = vec![ZERO; n];
        for a in 0..n {
            let start = packed_index(n, a, a);
            let row = &pairs[start..start + (n - a)];
            rsum[a] += row.iter().sum::<C64>();
            for (j, v) in row.iter().enumerate().skip(1) {
                rsum[a + j] += v;
            }
        }
        let sc: C64 = ec.iter().sum();
        let se: C64 = ee.iter().sum();
        let sr: C64 = er.iter().sum();
        let kl = p.kappa_loss;

        dy[0] = -I * SQRT2 * p.g * e2 - I * SQRT2 * lambda * sc - 2.0 * kl * c2;
        dy[1] = (I * p.cavity_detuning - p.gamma - kl) * e2
            - I * SQRT2 * p.g * c2
            - I * omega * r2
            - I * lambda * se;
        dy[2] = (-I * p.two_photon_detuning - kl) * r2 - I * omega.conj() * e2 - I * lambda * sr;

        for k in 0..n {
            let w = self.detunings[k];
            dy[l.cavity().start + k] = -(I * w + kl) * ec[k]
                - I * p.g * ee[k]
                - I * lambda * rsum[k]
                - I * SQRT2 * lambda * c2;
            dy[l.excited().start + k] = (I * p.cavity_detuning - I * w - p.gamma) * ee[k]
                - I * p.g * ec[k]
                - I * omega * er[k]
                - I * lambda * e2;
            dy[l.stored().start + k] = -I * (p.two_photon_detuning + w) * er[k]
                - I * omega.conj() * ee[k]
                - I * lambda * r2;
        }

        let pr = l.pairs();
        self.pair_rows(pairs, ec, &mut dy[pr]);

        let line = |v: &[C64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>();
        let excited = e2.norm_sqr() + line(ee);
        let cavity = 2.0 * c2.norm_sqr() + line(ec) + e2.norm_sqr() + r2.norm_sqr();
        dy[l.flux()] = C64::new(2.0 * p.gamma * excited + 2.0 * kl * cavity, 0.0);
    }
}

/// Two-photon storage with default options.
pub fn integrate_two_excitation(
    params: &PhysicalParams,
    modes: &ModeGrid,
    alphas: &[C64],
    ctrl: &ControlField,
    grid: &TimeGrid,
) -> Result<TwoExcitationRun> {
    integrate_two_excitation_with(
        params,
        modes,
        alphas,
        ctrl,
        grid,
        &TwoExcitationOptions::default(),
    )
}

/// Evolves the normalized two-photon component of the coherent input with
/// mode amplitudes `alphas` (referenced to `t = 0`).
pub fn integrate_two_excitation_with(
    params: &PhysicalParams,
    modes: &ModeGrid,
    alphas: &[C64],
    ctrl: &ControlField,
    grid: &TimeGrid,
    options: &TwoExcitationOptions,
) -> Result<TwoExcitationRun> {
    params.validate()?;
    grid.validate()?;
    let n = modes.count();
    if alphas.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: alphas.len(),
        });
    }
    check_memory(n, options)?;

    let shifted = amplitudes_at(alphas, modes, grid.t1);
    let photons: f64 = shifted.iter().map(|a| a.norm_sqr()).sum();
    if !(photons > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let init = ladder_initial_conditions(&shifted, photons)?;

    let layout = Layout { n };
    let mut y = vec![ZERO; layout_len(n)];
    for (slot, v) in y[layout.pairs()].iter_mut().zip(init.pairs.data()) {
        *slot = v * 2.0;
    }
    let sys = TwoSystem {
        params,
        ctrl,
        detunings: modes.detunings(),
        lambda: modes.coupling(),
        parallel: options.parallel,
        layout: Layout { n },
    };

    let samples = crate::fields::uniform(grid.t1, grid.t2, options.trajectory_samples.max(2));
    let mut trajectory = Vec::with_capacity(samples.len());
    let stats =
        Dopri5::new(grid.step).integrate(&sys, grid.t1, grid.t2, &mut y, &samples, |t, s| {
            let state = unpack(&layout, s)?;
            trajectory.push(BlockSample {
                t,
                norm: state.norm_sqr(),
                eta: state.eta(),
                dissipated: s[layout.flux()].re,
            });
            Ok(())
        })?;
    let state = unpack(&layout, &y)?;
    Ok(TwoExcitationRun {
        eta_2: state.eta(),
        dissipated: y[layout.flux()].re,
        state,
        trajectory,
        stats,
    })
}

fn unpack(l: &Layout, y: &[C64]) -> Result<TwoExcitationState> {
    Ok(TwoExcitationState {
        c2: y[0],
        e2: y[1],
        r2: y[2],
        cavity_line: y[l.cavity()].to_vec(),
        excited_line: y[l.excited()].to_vec(),
        stored_line: y[l.stored()].to_vec(),
        pairs: SymmetricPairs::from_data(l.n, y[l.pairs()].to_vec())?,
    })
}

/// Largest odd mode count whose estimate fits in `limit_mib`.
fn suggest_modes(limit_mib: f64) -> usize {
    let mut n = 1;
    while two_excitation_memory_mib(n + 2) <= limit_mib {
        n += 2;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memory_guard_suggests_smaller_grid() {
        let p = PhysicalParams::reference();
        let modes = ModeGrid::new(311, 6.0, p.kappa).unwrap();
        let grid = TimeGrid::for_coherence_time(0.5).unwrap();
        let alphas = vec![C64::new(0.01, 0.0); 311];
        let opts = TwoExcitationOptions {
            memory_limit_mib: 1.0,
            ..Default::default()
        };
        match integrate_two_excitation_with(&p, &modes, &alphas, &ControlField::off(), &grid, &opts)
        {
            Err(Error::MemoryLimit {
                suggested_modes, ..
            }) => {
                assert!(suggested_modes % 2 == 1 && suggested_modes < 311);
                assert!(two_excitation_memory_mib(suggested_modes) <= 1.0);
            }
            other => panic!("expected memory error, got {other:?}"),
        }
    }

    #[test]
    fn pair_norm_counts_diagonal_once() {
        // A = √2 E_k E_k' for E = (1/√2, 1/√2).
        let a = SQRT2 * 0.5;
        let pairs = vec![C64::new(a, 0.0); 3];
        assert!((pair_norm(2, &pairs) - 1.0).abs() < 1e-15);
    }
}
