use cavity_memory::fields::{
    optimal_control_sech, sech_duration_for_coherence_time, sech_envelope, ModeGrid, PhysicalParams,
};
use cavity_memory::operators::{
    build_effective_hamiltonian, build_hamiltonian, excitation_commutator_norm, hermiticity_defect,
    lindblad_rhs, AtomLevel, DensityState, HilbertSpace, JointSpace,
};
use cavity_memory::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;

const M_MAX: usize = 3;

fn params_strategy() -> impl Strategy<Value = PhysicalParams> {
    (
        0.1f64..40.0,
        0.1f64..20.0,
        0.0f64..5.0,
        0.1f64..20.0,
        -5.0f64..5.0,
        -5.0f64..5.0,
    )
        .prop_map(|(g, k, kl, gamma, delta_c, delta_r)| {
            PhysicalParams::new(g, k, kl, gamma)
                .unwrap()
                .with_detunings(delta_c, delta_r)
        })
}

fn matrix_strategy(dim: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        DMatrix::from_iterator(dim, dim, v.into_iter().map(|(re, im)| C64::new(re, im)))
    })
}

/// Random density matrix `M M† / Tr(M M†)`.
fn density_strategy(dim: usize) -> impl Strategy<Value = DMatrix<C64>> {
    matrix_strategy(dim).prop_map(|m| {
        let rho = &m * m.adjoint();
        let tr = rho.trace();
        rho / tr
    })
}

fn hamiltonian_at(p: &PhysicalParams, space: &HilbertSpace, photons: f64, t: f64) -> DMatrix<C64> {
    let duration = sech_duration_for_coherence_time(0.5);
    let env = sech_envelope(1.0, duration)
        .unwrap()
        .with_photons(photons)
        .unwrap();
    let ctrl = optimal_control_sech(p, duration).unwrap();
    build_hamiltonian(p, space, &env, &ctrl, t)
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lindbladian_is_trace_free(p in params_strategy(), rho in density_strategy(4 * (M_MAX + 1)),
                                 n in 0.0f64..5.0, t in -3.0f64..3.0) {
        let space = HilbertSpace::new(M_MAX).unwrap();
        let h = hamiltonian_at(&p, &space, n, t);
        let state = DensityState { rho, t };
        let out = lindblad_rhs(&p, &space, &h, &state).unwrap();
        let scale = max_abs(&state.rho) * (1.0 + max_abs(&h) + p.kappa_total() + p.gamma);
        prop_assert!(out.trace().norm() < 1e-12 * scale, "trace {}", out.trace());
    }

    #[test]
    fn lindbladian_commutes_with_adjoint(p in params_strategy(), m in matrix_strategy(4 * (M_MAX + 1)),
                                         n in 0.0f64..5.0, t in -3.0f64..3.0) {
        let space = HilbertSpace::new(M_MAX).unwrap();
        let h = hamiltonian_at(&p, &space, n, t);
        let direct = lindblad_rhs(&p, &space, &h, &DensityState { rho: m.clone(), t }).unwrap();
        let of_adjoint = lindblad_rhs(&p, &space, &h, &DensityState { rho: m.adjoint(), t }).unwrap();
        let defect = max_abs(&(of_adjoint - direct.adjoint()));
        prop_assert!(defect < 1e-12 * (1.0 + max_abs(&h) + p.kappa_total()) * max_abs(&m) * 10.0, "{}", defect);
    }

    #[test]
    fn hamiltonian_is_hermitian(p in params_strategy(), n in 0.0f64..20.0, t in -3.0f64..3.0) {
        let space = HilbertSpace::new(6).unwrap();
        prop_assert_eq!(hermiticity_defect(&hamiltonian_at(&p, &space, n, t)), 0.0);
    }

    #[test]
    fn sink_population_never_decreases(p in params_strategy(), rho in density_strategy(4 * (M_MAX + 1)),
                                       n in 0.0f64..5.0, t in -3.0f64..3.0) {
        let space = HilbertSpace::new(M_MAX).unwrap();
        let h = hamiltonian_at(&p, &space, n, t);
        let out = lindblad_rhs(&p, &space, &h, &DensityState { rho, t }).unwrap();
        let rate: f64 = (0..=M_MAX).map(|m| {
            let i = space.index(AtomLevel::Sink, m);
            out[(i, i)].re
        }).sum();
        prop_assert!(rate >= -1e-12, "{}", rate);
    }

    #[test]
    fn undriven_hamiltonian_conserves_excitations(p in params_strategy(), t in -3.0f64..3.0) {
        let space = HilbertSpace::new(5).unwrap();
        let h = hamiltonian_at(&p, &space, 0.0, t);
        let number: Vec<f64> = (0..space.dim()).map(|i| {
            let (level, m) = space.decompose(i);
            m as f64 + u8::from(matches!(level, AtomLevel::Excited | AtomLevel::Stored)) as f64
        }).collect();
        for r in 0..space.dim() {
            for c in 0..space.dim() {
                prop_assert!((h[(r, c)] * (number[c] - number[r])).norm() == 0.0);
            }
        }
    }

    #[test]
    fn effective_hamiltonian_conserves_excitations(p in params_strategy(), modes in 1usize..5, t in -3.0f64..3.0) {
        let count = 2 * modes + 1;
        let space = JointSpace::new(count, 2).unwrap();
        let grid = ModeGrid::new(count, 6.0, p.kappa).unwrap();
        let ctrl = optimal_control_sech(&p, 1.1).unwrap();
        let h = build_effective_hamiltonian(&p, &space, &ctrl, &grid, t).unwrap();
        prop_assert!(excitation_commutator_norm(&h, &space.excitation_number()) < 1e-12);
    }
}

#[test]
fn effective_spectrum_is_dissipative() {
    let p = PhysicalParams::reference();
    let space = JointSpace::new(5, 2).unwrap();
    let modes = ModeGrid::new(5, 6.0, p.kappa).unwrap();
    let ctrl = optimal_control_sech(&p, sech_duration_for_coherence_time(0.5)).unwrap();
    for t in [-2.0, 0.0, 1.5] {
        let h = build_effective_hamiltonian(&p, &space, &ctrl, &modes, t)
            .unwrap()
            .to_dense();
        let eig = h
            .clone()
            .schur()
            .eigenvalues()
            .expect("complex Schur form is triangular");
        let worst = eig.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        assert!(worst <= 1e-10, "Im λ = {worst} at t = {t}");
        // The anti-Hermitian part is −γ|e><e| − κ_loss a†a.
        let anti = (&h - h.adjoint()) * C64::new(0.0, -0.5);
        assert!(anti.symmetric_eigenvalues().iter().all(|&v| v <= 1e-12));
    }
}

#[test]
fn weak_vacuum_stays_dark_under_control() {
    let p = PhysicalParams::reference();
    let space = HilbertSpace::new(M_MAX).unwrap();
    let h = hamiltonian_at(&p, &space, 0.0, 0.0);
    let out = lindblad_rhs(
        &p,
        &space,
        &h,
        &DensityState::pure(&space, AtomLevel::Ground, 0, 0.0),
    )
    .unwrap();
    assert_eq!(max_abs(&out), 0.0);
}
