//! Atom ⊗ cavity operators for the master equation and the joint
//! atom ⊗ cavity ⊗ line effective Hamiltonian.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fields::{ControlField, ModeGrid, PhysicalParams, PulseEnvelope};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Atomic levels of the Λ system plus the sink `ξ_e` fed by spontaneous decay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomLevel {
    Ground = 0,
    Excited = 1,
    Stored = 2,
    Sink = 3,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 4] = [
        AtomLevel::Ground,
        AtomLevel::Excited,
        AtomLevel::Stored,
        AtomLevel::Sink,
    ];
}

/// Atom ⊗ cavity Fock space truncated at `m_max` photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HilbertSpace {
    m_max: usize,
}

impl HilbertSpace {
    pub fn new(m_max: usize) -> Result<Self> {
        if m_max < 1 {
            return Err(Error::invalid(
                "m_max",
                "cavity truncation must be at least 1",
            ));
        }
        Ok(HilbertSpace { m_max })
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn fock_dim(&self) -> usize {
        self.m_max + 1
    }

    pub fn dim(&self) -> usize {
        4 * self.fock_dim()
    }

    pub fn index(&self, level: AtomLevel, fock: usize) -> usize {
        debug_assert!(fock <= self.m_max);
        level as usize * self.fock_dim() + fock
    }

    pub fn decompose(&self, index: usize) -> (AtomLevel, usize) {
        (
            AtomLevel::ALL[index / self.fock_dim()],
            index % self.fock_dim(),
        )
    }
}

/// Sparse matrix as a list of `(row, col, value)` entries without duplicates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMatrix {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    fn from_map(dim: usize, map: HashMap<(usize, usize), C64>) -> Self {
        let mut entries: Vec<_> = map
            .into_iter()
            .filter(|(_, v)| *v != ZERO)
            .map(|((r, c), v)| (r, c, v))
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        SparseMatrix { dim, entries }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != ZERO {
                    entries.push((r, c, m[(r, c)]));
                }
            }
        }
        SparseMatrix {
            dim: m.nrows(),
            entries,
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .map(|&(r, c, v)| (c, r, v.conj()))
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        SparseMatrix {
            dim: self.dim,
            entries,
        }
    }
}

/// Time-independent pieces of the displaced-frame Hamiltonian
/// `H'(t) = H_0 + Ω(t) |e><r| + Ω*(t) |r><e| + √(2κ) (E_in(t) a† + E_in*(t) a)`.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    static_part: Vec<(usize, usize, C64)>,
    /// `|e><r|`, multiplied by Ω(t); its adjoint carries Ω*(t).
    control: Vec<(usize, usize, f64)>,
    /// `√(2κ) a†`, multiplied by E_in(t); its adjoint carries E_in*(t).
    drive: Vec<(usize, usize, f64)>,
    dim: usize,
}

impl HamiltonianParts {
    pub fn new(params: &PhysicalParams, space: &HilbertSpace) -> Self {
        use AtomLevel::*;
        let mut static_part = Vec::new();
        let mut control = Vec::new();
        let mut drive = Vec::new();
        let sqrt_2k = (2.0 * params.kappa).sqrt();
        for m in 0..=space.m_max() {
            if params.two_photon_detuning != 0.0 {
                let i = space.index(Stored, m);
                static_part.push((i, i, C64::new(params.two_photon_detuning, 0.0)));
            }
            if params.cavity_detuning != 0.0 {
                let i = space.index(Excited, m);
                static_part.push((i, i, C64::new(-params.cavity_detuning, 0.0)));
            }
            // g |e,m><g,m+1| √(m+1) + h.c.
            if m < space.m_max() {
                let amp = params.g * ((m + 1) as f64).sqrt();
                let (e, g) = (space.index(Excited, m), space.index(Ground, m + 1));
                static_part.push((e, g, C64::new(amp, 0.0)));
                static_part.push((g, e, C64::new(amp, 0.0)));
            }
            control.push((space.index(Excited, m), space.index(Stored, m), 1.0));
            if m < space.m_max() {
                let amp = sqrt_2k * ((m + 1) as f64).sqrt();
                for level in AtomLevel::ALL {
                    drive.push((space.index(level, m + 1), space.index(level, m), amp));
                }
            }
        }
        HamiltonianParts {
            static_part,
            control,
            drive,
            dim: space.dim(),
        }
    }

    /// Writes the nonzero entries of `H'(t)` into `out`.
    pub fn assemble(&self, rabi: C64, field: C64, out: &mut Vec<(usize, usize, C64)>) {
        out.clear();
        out.extend_from_slice(&self.static_part);
        if rabi != ZERO {
            for &(r, c, v) in &self.control {
                out.push((r, c, rabi * v));
                out.push((c, r, rabi.conj() * v));
            }
        }
        if field != ZERO {
            for &(r, c, v) in &self.drive {
                out.push((r, c, field * v));
                out.push((c, r, field.conj() * v));
            }
        }
    }

    pub fn at(&self, env: &PulseEnvelope, ctrl: &ControlField, t: f64) -> SparseMatrix {
        let mut entries = Vec::new();
        self.assemble(ctrl.rabi(t), env.amplitude(t), &mut entries);
        SparseMatrix {
            dim: self.dim,
            entries,
        }
    }
}

/// Dense displaced-frame Hamiltonian `H'(t)` on the truncated space.
pub fn build_hamiltonian(
    params: &PhysicalParams,
    space: &HilbertSpace,
    env: &PulseEnvelope,
    ctrl: &ControlField,
    t: f64,
) -> DMatrix<C64> {
    HamiltonianParts::new(params, space)
        .at(env, ctrl, t)
        .to_dense()
}

/// Dissipative part of the master equation: decay of |e> into the sink at
/// `γ` and cavity damping at `κ_tot`.
#[derive(Clone, Debug)]
pub struct Dissipator {
    dim: usize,
    /// `γ [i ∈ e] + κ_tot n_i`: rate entering `−(d_i + d_j) ρ_ij`.
    decay: Vec<f64>,
    /// `(target_row, source_row, weight)` triples of the feeding terms
    /// `2γ |ξ><e| ρ |e><ξ|` and `2κ_tot a ρ a†`, applied on both sides.
    feed: Vec<(usize, usize, f64)>,
}

impl Dissipator {
    pub fn new(params: &PhysicalParams, space: &HilbertSpace) -> Self {
        use AtomLevel::*;
        let dim = space.dim();
        let kt = params.kappa_total();
        let decay = (0..dim)
            .map(|i| {
                let (level, m) = space.decompose(i);
                let atom = if level == Excited { params.gamma } else { 0.0 };
                atom + kt * m as f64
            })
            .collect();
        let mut feed = Vec::new();
        for m in 0..=space.m_max() {
            feed.push((
                space.index(Sink, m),
                space.index(Excited, m),
                (2.0 * params.gamma).sqrt(),
            ));
            if m < space.m_max() {
                let amp = (2.0 * kt * (m + 1) as f64).sqrt();
                for level in AtomLevel::ALL {
                    feed.push((space.index(level, m), space.index(level, m + 1), amp));
                }
            }
        }
        Dissipator { dim, decay, feed }
    }

    /// Adds `L_dis ρ` to `out` (both row-major `dim × dim`).
    pub fn apply_add(&self, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for i in 0..d {
            let row = &rho[i * d..(i + 1) * d];
            let orow = &mut out[i * d..(i + 1) * d];
            let di = self.decay[i];
            for j in 0..d {
                orow[j] -= row[j] * (di + self.decay[j]);
            }
        }
        // Jump operators each have one nonzero per column: L = Σ w |t><s|.
        // Σ_L L ρ L† = Σ over pairs of entries belonging to the same operator.
        // Sink feeding (one operator) and cavity loss (one operator) are kept
        // apart because their cross terms must not mix.
        for &(t1, s1, w1) in &self.feed {
            for &(t2, s2, w2) in &self.feed {
                if same_jump(self, t1, s1, t2, s2) {
                    out[t1 * d + t2] += rho[s1 * d + s2] * (w1 * w2);
                }
            }
        }
    }
}

/// Both feed entries belong to the same jump operator: either both move
/// |e,m> → |ξ,m> or both lower the cavity photon number.
fn same_jump(diss: &Dissipator, t1: usize, s1: usize, t2: usize, s2: usize) -> bool {
    let fock = diss.dim / 4;
    let sink_feed = |t: usize, s: usize| {
        t / fock == AtomLevel::Sink as usize && s / fock == AtomLevel::Excited as usize
    };
    sink_feed(t1, s1) == sink_feed(t2, s2)
}

/// `dρ/dt = −i[H, ρ] + L_γ ρ + L_κtot ρ` for a sparse `H` on row-major `ρ`.
pub fn lindblad_apply(h: &[(usize, usize, C64)], diss: &Dissipator, rho: &[C64], out: &mut [C64]) {
    let d = diss.dim;
    out.iter_mut().for_each(|v| *v = ZERO);
    for &(i, j, v) in h {
        // −i H ρ : row i gathers row j of ρ.
        let a = -I * v;
        let (src, dst) = (j * d, i * d);
        for c in 0..d {
            out[dst + c] += a * rho[src + c];
        }
        // +i ρ H : column j gathers column i of ρ.
        let b = I * v;
        for r in 0..d {
            out[r * d + j] += b * rho[r * d + i];
        }
    }
    diss.apply_add(rho, out);
}

/// Atom ⊗ cavity density matrix at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    pub rho: DMatrix<C64>,
    pub t: f64,
}

impl DensityState {
    pub fn pure(space: &HilbertSpace, level: AtomLevel, fock: usize, t: f64) -> Self {
        let mut rho = DMatrix::zeros(space.dim(), space.dim());
        let i = space.index(level, fock);
        rho[(i, i)] = C64::new(1.0, 0.0);
        DensityState { rho, t }
    }

    pub fn from_row_major(dim: usize, data: &[C64], t: f64) -> Self {
        DensityState {
            rho: DMatrix::from_row_slice(dim, dim, data),
            t,
        }
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let d = self.rho.nrows();
        let mut v = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                v.push(self.rho[(r, c)]);
            }
        }
        v
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Largest `|ρ − ρ†|` element.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.rho)
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn population(&self, space: &HilbertSpace, level: AtomLevel) -> f64 {
        (0..=space.m_max())
            .map(|m| self.rho[(space.index(level, m), space.index(level, m))].re)
            .sum()
    }

    pub fn mean_photons(&self, space: &HilbertSpace) -> f64 {
        (0..space.dim())
            .map(|i| space.decompose(i).1 as f64 * self.rho[(i, i)].re)
            .sum()
    }
}

pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Right-hand side of the displaced-frame master equation for a dense `H`.
pub fn lindblad_rhs(
    params: &PhysicalParams,
    space: &HilbertSpace,
    h: &DMatrix<C64>,
    rho: &DensityState,
) -> Result<DMatrix<C64>> {
    let d = space.dim();
    for got in [h.nrows(), h.ncols(), rho.rho.nrows(), rho.rho.ncols()] {
        if got != d {
            return Err(Error::DimensionMismatch { expected: d, got });
        }
    }
    let diss = Dissipator::new(params, space);
    let sparse = SparseMatrix::from_dense(h);
    let data = rho.to_row_major();
    let mut out = vec![ZERO; d * d];
    lindblad_apply(&sparse.entries, &diss, &data, &mut out);
    Ok(DMatrix::from_row_slice(d, d, &out))
}

// ---------------------------------------------------------------------------
// Joint atom ⊗ cavity ⊗ line space with at most two excitations.

/// Refuse joint spaces larger than this.
pub const MAX_JOINT_DIM: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointState {
    pub atom: AtomLevel,
    pub cavity: usize,
    /// Occupied line modes as a sorted multiset of mode indices.
    pub photons: Vec<usize>,
}

impl JointState {
    pub fn excitations(&self) -> usize {
        let atom = matches!(self.atom, AtomLevel::Excited | AtomLevel::Stored) as usize;
        atom + self.cavity + self.photons.len()
    }

    fn count(&self, k: usize) -> usize {
        self.photons.iter().filter(|&&p| p == k).count()
    }

    fn lower_mode(&self, k: usize) -> Option<(JointState, f64)> {
        let n = self.count(k);
        if n == 0 {
            return None;
        }
        let mut s = self.clone();
        let pos = s.photons.iter().position(|&p| p == k).unwrap();
        s.photons.remove(pos);
        Some((s, (n as f64).sqrt()))
    }

    fn raise_mode(&self, k: usize) -> (JointState, f64) {
        let n = self.count(k);
        let mut s = self.clone();
        let pos = s.photons.partition_point(|&p| p <= k);
        s.photons.insert(pos, k);
        (s, ((n + 1) as f64).sqrt())
    }
}

/// Basis of all states with at most `max_excitations` quanta shared between
/// the atom (|e>, |r> count one), the cavity and `N` line modes. The sink
/// level is omitted since no Hamiltonian term reaches it.
#[derive(Clone, Debug)]
pub struct JointSpace {
    modes: usize,
    basis: Vec<JointState>,
    lookup: HashMap<JointState, usize>,
}

impl JointSpace {
    pub fn new(modes: usize, max_excitations: usize) -> Result<Self> {
        let dim = joint_dim(modes, max_excitations);
        if dim > MAX_JOINT_DIM {
            return Err(Error::SpaceTooLarge {
                dim,
                limit: MAX_JOINT_DIM,
            });
        }
        let mut basis = Vec::with_capacity(dim);
        for atom in [AtomLevel::Ground, AtomLevel::Excited, AtomLevel::Stored] {
            let atom_exc = (atom != AtomLevel::Ground) as usize;
            for total in atom_exc..=max_excitations {
                let field = total - atom_exc;
                for cavity in 0..=field {
                    for photons in multisets(modes, field - cavity) {
                        basis.push(JointState {
                            atom,
                            cavity,
                            photons,
                        });
                    }
                }
            }
        }
        debug_assert_eq!(basis.len(), dim);
        let lookup = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        Ok(JointSpace {
            modes,
            basis,
            lookup,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn basis(&self) -> &[JointState] {
        &self.basis
    }

    pub fn index_of(&self, s: &JointState) -> Option<usize> {
        self.lookup.get(s).copied()
    }

    /// Diagonal of `Σ b_k† b_k + a† a + |e><e| + |r><r|`.
    pub fn excitation_number(&self) -> Vec<f64> {
        self.basis.iter().map(|s| s.excitations() as f64).collect()
    }
}

fn joint_dim(modes: usize, max_exc: usize) -> usize {
    // Bosonic states of (modes + 1) oscillators with exactly j quanta.
    let bosons = |j: usize| binomial(modes + j, j);
    let field_upto = |m: usize| (0..=m).map(bosons).sum::<usize>();
    field_upto(max_exc)
        + if max_exc >= 1 {
            2 * field_upto(max_exc - 1)
        } else {
            0
        }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn multisets(modes: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(
        modes: usize,
        size: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for k in start..modes {
            cur.push(k);
            rec(modes, size, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(modes, size, 0, &mut Vec::new(), &mut out);
    out
}

/// `H_eff(t) = S + Ω(t) X + Ω*(t) X†` on a [`JointSpace`].
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub static_part: SparseMatrix,
    /// `|e><r|`.
    pub raise: SparseMatrix,
    pub lower: SparseMatrix,
}

impl EffectiveHamiltonian {
    pub fn new(params: &PhysicalParams, space: &JointSpace, modes: &ModeGrid) -> Result<Self> {
        use AtomLevel::*;
        if modes.count() != space.modes() {
            return Err(Error::DimensionMismatch {
                expected: space.modes(),
                got: modes.count(),
            });
        }
        let dim = space.dim();
        let lambda = modes.coupling();
        let detunings = modes.detunings();
        let mut s: HashMap<(usize, usize), C64> = HashMap::new();
        let mut x: HashMap<(usize, usize), C64> = HashMap::new();
        let add = |map: &mut HashMap<(usize, usize), C64>, to: &JointState, from: usize, v: C64| {
            let row = space
                .index_of(to)
                .expect("H_eff term left the excitation-bounded space");
            *map.entry((row, from)).or_insert(ZERO) += v;
        };

        for (col, st) in space.basis().iter().enumerate() {
            // Diagonal: line detunings, atomic detunings and non-Hermitian decay.
            let mut diag: C64 = st
                .photons
                .iter()
                .map(|&k| C64::new(detunings[k], 0.0))
                .sum();
            diag += C64::new(0.0, -params.kappa_loss * st.cavity as f64);
            match st.atom {
                Excited => diag += C64::new(-params.cavity_detuning, -params.gamma),
                Stored => diag += C64::new(params.two_photon_detuning, 0.0),
                _ => {}
            }
            add(&mut s, st, col, diag);

            // λ (a† b_k + b_k† a)
            for k in 0..space.modes() {
                if let Some((mut t, amp)) = st.lower_mode(k) {
                    t.cavity += 1;
                    let amp = amp * (t.cavity as f64).sqrt();
                    add(&mut s, &t, col, C64::new(lambda * amp, 0.0));
                }
                if st.cavity > 0 {
                    let (mut t, amp) = st.raise_mode(k);
                    let amp = amp * (st.cavity as f64).sqrt();
                    t.cavity -= 1;
                    add(&mut s, &t, col, C64::new(lambda * amp, 0.0));
                }
            }

            // g (|e><g| a + |g><e| a†)
            if st.atom == Ground && st.cavity > 0 {
                let t = JointState {
                    atom: Excited,
                    cavity: st.cavity - 1,
                    photons: st.photons.clone(),
                };
                add(
                    &mut s,
                    &t,
                    col,
                    C64::new(params.g * (st.cavity as f64).sqrt(), 0.0),
                );
            }
            if st.atom == Excited {
                let t = JointState {
                    atom: Ground,
                    cavity: st.cavity + 1,
                    photons: st.photons.clone(),
                };
                add(
                    &mut s,
                    &t,
                    col,
                    C64::new(params.g * ((st.cavity + 1) as f64).sqrt(), 0.0),
                );
            }

            // |e><r|
            if st.atom == Stored {
                let t = JointState {
                    atom: Excited,
                    ..st.clone()
                };
                add(&mut x, &t, col, C64::new(1.0, 0.0));
            }
        }
        let raise = SparseMatrix::from_map(dim, x);
        let lower = raise.adjoint();
        Ok(EffectiveHamiltonian {
            static_part: SparseMatrix::from_map(dim, s),
            raise,
            lower,
        })
    }

    pub fn at(&self, rabi: C64) -> SparseMatrix {
        let mut map: HashMap<(usize, usize), C64> = HashMap::new();
        for &(r, c, v) in &self.static_part.entries {
            *map.entry((r, c)).or_insert(ZERO) += v;
        }
        for &(r, c, v) in &self.raise.entries {
            *map.entry((r, c)).or_insert(ZERO) += v * rabi;
        }
        for &(r, c, v) in &self.lower.entries {
            *map.entry((r, c)).or_insert(ZERO) += v * rabi.conj();
        }
        SparseMatrix::from_map(self.static_part.dim, map)
    }

    /// `out = −i H_eff(t) ψ`.
    pub fn schrodinger_rhs(&self, rabi: C64, psi: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = ZERO);
        for &(r, c, v) in &self.static_part.entries {
            out[r] += -I * v * psi[c];
        }
        if rabi != ZERO {
            for &(r, c, v) in &self.raise.entries {
                out[r] += -I * v * rabi * psi[c];
            }
            for &(r, c, v) in &self.lower.entries {
                out[r] += -I * v * rabi.conj() * psi[c];
            }
        }
    }
}

/// `H_eff(t) = H_tot(t) − iγ|e><e| − iκ_loss a†a` on the ≤2-excitation joint space.
pub fn build_effective_hamiltonian(
    params: &PhysicalParams,
    space: &JointSpace,
    ctrl: &ControlField,
    modes: &ModeGrid,
    t: f64,
) -> Result<SparseMatrix> {
    Ok(EffectiveHamiltonian::new(params, space, modes)?.at(ctrl.rabi(t)))
}

/// Largest element of `[H, N_exc]` for a diagonal excitation-number operator.
pub fn excitation_commutator_norm(h: &SparseMatrix, number: &[f64]) -> f64 {
    h.entries
        .iter()
        .map(|&(r, c, v)| (v * (number[c] - number[r])).norm())
        .fold(0.0, f64::max)
}
