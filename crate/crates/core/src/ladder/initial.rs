use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Symmetric `N × N` matrix stored as its row-major upper triangle
/// (`N(N+1)/2` entries).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricPairs {
    n: usize,
    data: Vec<C64>,
}

impl SymmetricPairs {
    pub fn zeros(n: usize) -> Self {
        SymmetricPairs {
            n,
            data: vec![C64::new(0.0, 0.0); Self::len_for(n)],
        }
    }

    pub fn from_data(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != Self::len_for(n) {
            return Err(Error::DimensionMismatch {
                expected: Self::len_for(n),
                got: data.len(),
            });
        }
        Ok(SymmetricPairs { n, data })
    }

    pub fn len_for(n: usize) -> usize {
        n * (n + 1) / 2
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn index(&self, k: usize, kp: usize) -> usize {
        let (a, b) = if k <= kp { (k, kp) } else { (kp, k) };
        packed_index(self.n, a, b)
    }

    pub fn get(&self, k: usize, kp: usize) -> C64 {
        self.data[self.index(k, kp)]
    }

    pub fn set(&mut self, k: usize, kp: usize, v: C64) {
        let i = self.index(k, kp);
        self.data[i] = v;
    }
}

/// Offset of `(a, b)` with `a ≤ b` in a row-major packed upper triangle.
pub(crate) fn packed_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a <= b && b < n);
    a * n - a * (a + 1) / 2 + b
}

/// Unit-normalized one- and two-photon components of a coherent state.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderInitial {
    /// `E_k = α_k / √n`.
    pub single: Vec<C64>,
    /// `E_{k,k'} = E_k E_{k'} / √2` for `k ≤ k'`.
    pub pairs: SymmetricPairs,
}

impl LadderInitial {
    pub fn single_norm(&self) -> f64 {
        self.single.iter().map(|e| e.norm_sqr()).sum()
    }

    /// `<ψ⁽²⁾|ψ⁽²⁾> = 2 Σ_{k,k'} |E_{k,k'}|²` over the full square.
    pub fn pair_norm(&self) -> f64 {
        let n = self.pairs.size();
        let mut s = 0.0;
        for k in 0..n {
            for kp in k..n {
                let w = if k == kp { 2.0 } else { 4.0 };
                s += w * self.pairs.get(k, kp).norm_sqr();
            }
        }
        s
    }
}

pub fn ladder_initial_conditions(alphas: &[C64], photons: f64) -> Result<LadderInitial> {
    if !(photons > 0.0) {
        return Err(Error::invalid(
            "n",
            "single- and two-photon components are undefined for n = 0",
        ));
    }
    let captured: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
    if (captured - photons).abs() > 1e-3 * photons {
        log::warn!("Σ|α_k|² = {captured} differs from n = {photons}");
    }
    let scale = photons.sqrt().recip();
    let single: Vec<C64> = alphas.iter().map(|a| a * scale).collect();
    let n = single.len();
    let mut pairs = SymmetricPairs::zeros(n);
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..n {
        for kp in k..n {
            pairs.set(k, kp, single[k] * single[kp] * r2);
        }
    }
    Ok(LadderInitial { single, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_layout() {
        let n = 4;
        let mut seen = vec![false; SymmetricPairs::len_for(n)];
        for a in 0..n {
            for b in a..n {
                let i = packed_index(n, a, b);
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
        assert_eq!(packed_index(n, 1, 1), 4);
    }

    #[test]
    fn single_mode_coherent_state() {
        let n: f64 = 0.3;
        let init = ladder_initial_conditions(&[C64::new(n.sqrt(), 0.0)], n).unwrap();
        assert!((init.single[0] - 1.0).norm() < 1e-15);
        assert!((init.pairs.get(0, 0) - std::f64::consts::FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((init.pair_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_equal_modes() {
        let n: f64 = 0.02;
        let a = C64::new((n / 2.0).sqrt(), 0.0);
        let init = ladder_initial_conditions(&[a, a], n).unwrap();
        for e in &init.single {
            assert!((e.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        let expected = 1.0 / (2.0 * 2f64.sqrt());
        assert!((init.pairs.get(0, 1).re - expected).abs() < 1e-15);
        assert_eq!(init.pairs.get(0, 1), init.pairs.get(1, 0));
        assert!((init.single_norm() - 1.0).abs() < 1e-14);
        assert!((init.pair_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vacuum_is_rejected() {
        assert!(ladder_initial_conditions(&[C64::new(0.0, 0.0)], 0.0).is_err());
    }
}
