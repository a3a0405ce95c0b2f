use cavity_memory::fields::{
    mode_amplitudes, optimal_control_sech, sech_duration_for_coherence_time, sech_envelope,
    ControlField, ModeGrid, PhysicalParams, TimeGrid,
};
use cavity_memory::ladder::{
    coherent_efficiency_ladder, integrate_single_excitation_io, integrate_single_excitation_modes,
    integrate_two_excitation, integrate_two_excitation_with, ladder_initial_conditions,
    no_jump_probability, solve_ladder, TwoExcitationOptions,
};
use cavity_memory::master::integrate_master;
use cavity_memory::ode::{Dopri5, OdeSystem, StepControl};
use cavity_memory::operators::{AtomLevel, EffectiveHamiltonian, JointSpace, JointState};
use cavity_memory::C64;

const TC: f64 = 0.5;

struct Setup {
    params: PhysicalParams,
    grid: TimeGrid,
    ctrl: ControlField,
    duration: f64,
}

fn reference() -> Setup {
    let params = PhysicalParams::reference();
    let duration = sech_duration_for_coherence_time(TC);
    Setup {
        grid: TimeGrid::for_coherence_time(TC).unwrap(),
        ctrl: optimal_control_sech(&params, duration).unwrap(),
        params,
        duration,
    }
}

fn reference_alphas(s: &Setup, modes: &ModeGrid) -> Vec<C64> {
    let env = sech_envelope(1.0, s.duration).unwrap();
    mode_amplitudes(&env, modes, &s.grid).unwrap().alphas
}

struct JointSystem<'a> {
    h: &'a EffectiveHamiltonian,
    ctrl: &'a ControlField,
    dim: usize,
}

impl OdeSystem for JointSystem<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.h.schrodinger_rhs(self.ctrl.rabi(t), y, dy);
    }
}

/// Block-resolved (η, norm) from brute-force evolution in the full joint Fock
/// space with the generic effective Hamiltonian.
fn joint_space_reference(s: &Setup, modes: &ModeGrid, alphas: &[C64]) -> [(f64, f64); 2] {
    let space = JointSpace::new(modes.count(), 2).unwrap();
    let h = EffectiveHamiltonian::new(&s.params, &space, modes).unwrap();
    let shifted: Vec<C64> = alphas
        .iter()
        .enumerate()
        .map(|(i, a)| a * C64::cis(-modes.detuning(i) * s.grid.t1))
        .collect();
    let photons: f64 = shifted.iter().map(|a| a.norm_sqr()).sum();
    let init = ladder_initial_conditions(&shifted, photons).unwrap();

    let mut out = [(0.0, 0.0); 2];
    for block in 1..=2 {
        let mut psi = vec![C64::new(0.0, 0.0); space.dim()];
        let n = modes.count();
        if block == 1 {
            for k in 0..n {
                let st = JointState {
                    atom: AtomLevel::Ground,
                    cavity: 0,
                    photons: vec![k],
                };
                psi[space.index_of(&st).unwrap()] = init.single[k];
            }
        } else {
            for k in 0..n {
                for kp in k..n {
                    let st = JointState {
                        atom: AtomLevel::Ground,
                        cavity: 0,
                        photons: vec![k, kp],
                    };
                    // |1_k 1_k> = √2 |2_k>.
                    let w = if k == kp { 2f64.sqrt() } else { 2.0 };
                    psi[space.index_of(&st).unwrap()] = init.pairs.get(k, kp) * w;
                }
            }
        }
        let sys = JointSystem {
            h: &h,
            ctrl: &s.ctrl,
            dim: space.dim(),
        };
        Dopri5::new(StepControl::Adaptive {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        })
        .integrate(&sys, s.grid.t1, s.grid.t2, &mut psi, &[], |_, _| Ok(()))
        .unwrap();
        let mut eta = 0.0;
        let mut norm = 0.0;
        for (st, a) in space.basis().iter().zip(&psi) {
            if st.excitations() == block {
                norm += a.norm_sqr();
                if st.atom == AtomLevel::Stored {
                    eta += a.norm_sqr();
                }
            }
        }
        out[block - 1] = (eta, norm);
    }
    out
}

#[test]
fn blocks_match_brute_force_joint_space() {
    let mut s = reference();
    s.params = s.params.with_detunings(2.0, -1.5);
    s.grid = s.grid.with_step(StepControl::Adaptive {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
    });
    let modes = ModeGrid::new(7, 12.0 * TC, s.params.kappa).unwrap();
    let alphas: Vec<C64> = (0..7)
        .map(|k| C64::new(0.1 + 0.05 * k as f64, 0.03 * (k as f64 - 3.0)))
        .collect();

    let [(eta1, norm1), (eta2, norm2)] = joint_space_reference(&s, &modes, &alphas);
    let single =
        integrate_single_excitation_modes(&s.params, &modes, &alphas, &s.ctrl, &s.grid).unwrap();
    let double = integrate_two_excitation(&s.params, &modes, &alphas, &s.ctrl, &s.grid).unwrap();

    assert!(
        eta1 > 1e-3 && eta2 > 1e-3,
        "reference run stores nothing: {eta1} {eta2}"
    );
    assert!(
        (single.eta_1 - eta1).abs() < 1e-8,
        "{} vs {eta1}",
        single.eta_1
    );
    assert!((single.state.norm_sqr() - norm1).abs() < 1e-8);
    assert!(
        (double.eta_2 - eta2).abs() < 1e-8,
        "{} vs {eta2}",
        double.eta_2
    );
    assert!((double.state.norm_sqr() - norm2).abs() < 1e-8);
}

#[test]
fn modes_and_input_output_agree() {
    let s = reference();
    let modes = ModeGrid::reference(TC, s.params.kappa).unwrap();
    let env = sech_envelope(1.0, s.duration).unwrap();
    let io = integrate_single_excitation_io(&s.params, &env, &s.ctrl, &s.grid).unwrap();
    let with_modes = integrate_single_excitation_modes(
        &s.params,
        &modes,
        &reference_alphas(&s, &modes),
        &s.ctrl,
        &s.grid,
    )
    .unwrap();
    assert!((io.eta_1 - 0.653).abs() < 0.02, "η1 = {}", io.eta_1);
    assert!(
        (io.eta_1 - with_modes.eta_1).abs() < 5e-3,
        "{} vs {}",
        io.eta_1,
        with_modes.eta_1
    );
}

#[test]
fn mode_gap_shrinks_under_refinement() {
    let s = reference();
    let env = sech_envelope(1.0, s.duration).unwrap();
    let io = integrate_single_excitation_io(&s.params, &env, &s.ctrl, &s.grid)
        .unwrap()
        .eta_1;
    let gaps: Vec<f64> = [79usize, 155, 311]
        .into_iter()
        .map(|n| {
            let modes = ModeGrid::new(n, 12.0 * TC, s.params.kappa).unwrap();
            let alphas = reference_alphas(&s, &modes);
            (integrate_single_excitation_modes(&s.params, &modes, &alphas, &s.ctrl, &s.grid)
                .unwrap()
                .eta_1
                - io)
                .abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[2] < 5e-3);
}

#[test]
fn uncoupled_line_keeps_its_norm() {
    let s = reference();
    let modes = ModeGrid::new(31, 12.0 * TC, 0.0).unwrap();
    let alphas = reference_alphas(&s, &ModeGrid::new(31, 12.0 * TC, s.params.kappa).unwrap());
    let run =
        integrate_single_excitation_modes(&s.params, &modes, &alphas, &s.ctrl, &s.grid).unwrap();
    assert!((run.state.line_norm() - 1.0).abs() < 1e-9);
    assert_eq!(run.eta_1, 0.0);
}

#[test]
fn norm_loss_equals_dissipated_flux() {
    let s = reference();
    let modes = ModeGrid::new(101, 12.0 * TC, s.params.kappa).unwrap();
    let alphas = reference_alphas(&s, &modes);
    let single =
        integrate_single_excitation_modes(&s.params, &modes, &alphas, &s.ctrl, &s.grid).unwrap();
    let double = integrate_two_excitation(&s.params, &modes, &alphas, &s.ctrl, &s.grid).unwrap();
    for (name, traj) in [("m=1", &single.trajectory), ("m=2", &double.trajectory)] {
        let start = traj[0].norm;
        assert!((start - 1.0).abs() < 1e-9, "{name}: initial norm {start}");
        for w in traj.windows(2) {
            assert!(
                w[1].norm <= w[0].norm + 1e-12,
                "{name}: norm grew at t = {}",
                w[1].t
            );
        }
        for p in traj {
            assert!(
                (start - p.norm - p.dissipated).abs() < 1e-6,
                "{name}: balance at t = {}",
                p.t
            );
        }
    }
}

#[test]
fn no_control_stores_nothing() {
    let s = reference();
    let off = ControlField::off();
    let env = sech_envelope(1.0, s.duration).unwrap();
    let modes = ModeGrid::new(51, 12.0 * TC, s.params.kappa).unwrap();
    let alphas = reference_alphas(&s, &modes);
    assert_eq!(
        integrate_single_excitation_io(&s.params, &env, &off, &s.grid)
            .unwrap()
            .eta_1,
        0.0
    );
    assert_eq!(
        integrate_two_excitation(&s.params, &modes, &alphas, &off, &s.grid)
            .unwrap()
            .eta_2,
        0.0
    );
}

#[test]
fn bare_cavity_never_excites_the_atom() {
    let s = reference();
    let params =
        PhysicalParams::new(0.0, s.params.kappa, s.params.kappa_loss, s.params.gamma).unwrap();
    let env = sech_envelope(1.0, s.duration).unwrap();
    let run = integrate_single_excitation_io(&params, &env, &ControlField::off(), &s.grid).unwrap();
    let peak = run.trajectory.iter().map(|p| p.norm).fold(0.0, f64::max);
    assert_eq!(run.state.e1, C64::new(0.0, 0.0));
    assert_eq!(run.state.r1, C64::new(0.0, 0.0));
    assert!(peak > 0.05, "cavity never filled: {peak}");
    assert!(run.state.c1.norm_sqr() < 1e-3 * peak);
}

#[test]
fn two_photon_block_converges_in_mode_count() {
    let s = reference();
    let eta2 = |n: usize| {
        let modes = ModeGrid::new(n, 12.0 * TC, s.params.kappa).unwrap();
        integrate_two_excitation(
            &s.params,
            &modes,
            &reference_alphas(&s, &modes),
            &s.ctrl,
            &s.grid,
        )
        .unwrap()
        .eta_2
    };
    let (coarse, fine) = (eta2(155), eta2(311));
    assert!(
        (coarse - fine).abs() < 1e-3,
        "η2(155) = {coarse}, η2(311) = {fine}"
    );
}

#[test]
fn pair_amplitudes_stay_symmetric() {
    let s = reference();
    let modes = ModeGrid::new(21, 12.0 * TC, s.params.kappa).unwrap();
    let run = integrate_two_excitation(
        &s.params,
        &modes,
        &reference_alphas(&s, &modes),
        &s.ctrl,
        &s.grid,
    )
    .unwrap();
    for k in 0..21 {
        for kp in 0..21 {
            assert_eq!(
                run.state.pair_amplitude(k, kp),
                run.state.pair_amplitude(kp, k)
            );
        }
    }
    assert_eq!(run.state.pairs.data().len(), 21 * 22 / 2);
}

#[test]
fn lossless_system_always_takes_the_no_jump_path() {
    let s = reference();
    let params = PhysicalParams::new(s.params.g, s.params.kappa, 0.0, 0.0).unwrap();
    let ctrl = optimal_control_sech(&params, s.duration).unwrap();
    let modes = ModeGrid::new(155, 12.0 * TC, params.kappa).unwrap();
    let env = sech_envelope(1.0, s.duration).unwrap();
    let run = solve_ladder(
        &params,
        &env,
        &modes,
        &ctrl,
        &s.grid,
        &TwoExcitationOptions::default(),
    )
    .unwrap();
    assert!(
        (run.result.norm_1 - 1.0).abs() < 1e-6,
        "{}",
        run.result.norm_1
    );
    assert!(
        (run.result.norm_2 - 1.0).abs() < 1e-6,
        "{}",
        run.result.norm_2
    );
    // Beyond n ≈ 0.1 the missing m ≥ 3 weight alone exceeds the tolerance.
    for n in [0.01, 0.1] {
        let p0 = run.result.no_jump_probability(n);
        assert!((p0 - 1.0).abs() < 1e-3, "P0({n}) = {p0}");
    }
}

#[test]
fn vacuum_never_jumps() {
    assert_eq!(no_jump_probability(0.0, 0.2, 0.1), 1.0);
}

#[test]
fn conditional_efficiency_reassembles() {
    let s = reference();
    let modes = ModeGrid::new(155, 12.0 * TC, s.params.kappa).unwrap();
    let env = sech_envelope(1.0, s.duration).unwrap();
    let run = solve_ladder(
        &s.params,
        &env,
        &modes,
        &s.ctrl,
        &s.grid,
        &TwoExcitationOptions::default(),
    )
    .unwrap();
    let n: f64 = 0.01;
    let r = run.result;
    let p0 = r.no_jump_probability(n);
    // Conditional population of |r> in the renormalized no-jump state.
    let conditional = (-n).exp() * (n * r.eta_1 + 0.5 * n * n * r.eta_2) / p0;
    assert!((p0 * conditional - r.coherent(n).eta).abs() < 1e-10);
    assert!(p0 < 1.0 && p0 > (-n).exp());
}

#[test]
fn coherent_ladder_matches_master_at_small_n() {
    let s = reference();
    let modes = ModeGrid::reference(TC, s.params.kappa).unwrap();
    let env = sech_envelope(1.0, s.duration).unwrap();
    let run = solve_ladder(
        &s.params,
        &env,
        &modes,
        &s.ctrl,
        &s.grid,
        &TwoExcitationOptions::default(),
    )
    .unwrap();
    let n = 0.01;
    let master = integrate_master(
        &s.params,
        &env.with_photons(n).unwrap(),
        &s.ctrl,
        &s.grid,
        8,
    )
    .unwrap();
    let ladder = run.result.coherent(n);
    assert!(
        (ladder.eta - master.eta).abs() / master.eta < 0.01,
        "{} vs {}",
        ladder.eta,
        master.eta
    );
    assert_eq!(
        coherent_efficiency_ladder(n, r1(&run), run.result.eta_2),
        ladder
    );
}

fn r1(run: &cavity_memory::ladder::LadderRun) -> f64 {
    run.single.state.r1.norm_sqr()
}

#[test]
fn memory_guard_reports_smaller_grid() {
    let s = reference();
    let modes = ModeGrid::new(1001, 12.0 * TC, s.params.kappa).unwrap();
    let alphas = vec![C64::new(1e-3, 0.0); 1001];
    let opts = TwoExcitationOptions {
        memory_limit_mib: 64.0,
        ..Default::default()
    };
    let err = integrate_two_excitation_with(&s.params, &modes, &alphas, &s.ctrl, &s.grid, &opts)
        .unwrap_err();
    assert!(err.to_string().contains("modes"), "{err}");
}
