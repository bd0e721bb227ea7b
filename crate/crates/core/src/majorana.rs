//! Majorana operators on `N/2` qubits via Jordan–Wigner.
//!
//! Convention: `χ_{2k-1} = Z_1 ⋯ Z_{k-1} X_k` and `χ_{2k} = Z_1 ⋯ Z_{k-1} Y_k`,
//! normalized so that `{χ_a, χ_b} = 2δ_ab`.

use core::fmt;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, Phase};

/// Largest supported Majorana count (two per mask bit).
pub const MAX_MAJORANAS: u32 = 2 * crate::pauli::MAX_QUBITS;

/// A 1-based Majorana label `a ∈ [1, N]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MajoranaIndex(u32);

impl MajoranaIndex {
    pub fn new(a: u32, n: u32) -> Result<Self> {
        check_n(n)?;
        if a == 0 || a > n {
            return Err(Error::MajoranaIndex { index: a, n });
        }
        Ok(MajoranaIndex(a))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

pub(crate) fn check_n(n: u32) -> Result<()> {
    if n == 0 || n % 2 != 0 || n > MAX_MAJORANAS {
        return Err(Error::OddOrInvalidN(n));
    }
    Ok(())
}

/// Jordan–Wigner image of `χ_a` for `N` Majoranas.
pub fn majorana(a: u32, n: u32) -> Result<PauliString> {
    let a = MajoranaIndex::new(a, n)?.get();
    let n_qubits = n / 2;
    let k = a.div_ceil(2);
    let tail = (1u64 << (k - 1)) - 1;
    let site = 1u64 << (k - 1);
    let z = if a % 2 == 1 { tail } else { tail | site };
    PauliString::from_masks(n_qubits, site, z, Phase::ONE)
}

/// Strictly increasing 1-based index quadruple `a < b < c < d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quartet([u32; 4]);

impl Quartet {
    pub fn new(a: u32, b: u32, c: u32, d: u32) -> Result<Self> {
        if !(1 <= a && a < b && b < c && c < d) {
            return Err(Error::NotIncreasing([a, b, c, d]));
        }
        Ok(Quartet([a, b, c, d]))
    }

    /// Validates against a Majorana count as well.
    pub fn within(self, n: u32) -> Result<Self> {
        check_n(n)?;
        if self.0[3] > n {
            return Err(Error::MajoranaIndex { index: self.0[3], n });
        }
        Ok(self)
    }

    pub fn indices(&self) -> [u32; 4] {
        self.0
    }

    /// Colexicographic rank in `[0, C(N,4))`; independent of `N`.
    pub fn rank(&self) -> u64 {
        let [a, b, c, d] = self.0.map(|v| (v - 1) as u64);
        binomial(d, 4) + binomial(c, 3) + binomial(b, 2) + a
    }

    /// Inverse of [`Quartet::rank`].
    pub fn unrank(mut rank: u64) -> Quartet {
        let mut out = [0u32; 4];
        for slot in (0..4).rev() {
            let r = slot as u64 + 1;
            // largest v with C(v, r) <= rank
            let mut v = r - 1;
            while binomial(v + 1, r) <= rank {
                v += 1;
            }
            rank -= binomial(v, r);
            out[slot] = v as u32 + 1;
        }
        Quartet(out)
    }
}

impl fmt::Display for Quartet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a},{b},{c},{d})")
    }
}

/// Exact `C(n, k)` for the small `k` used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Reduced Pauli string for `i² · χ_a χ_b χ_c χ_d`; always Hermitian.
pub fn monomial4(q: Quartet, n: u32) -> Result<PauliString> {
    let q = q.within(n)?;
    let [a, b, c, d] = q.indices();
    let mut acc = majorana(a, n)?;
    for idx in [b, c, d] {
        acc = acc.product(&majorana(idx, n)?)?;
    }
    let out = acc.with_phase(acc.phase().mul(Phase::MINUS_ONE));
    debug_assert!(out.is_hermitian());
    Ok(out)
}

/// One summand `C·J_abcd · (i² χ_a χ_b χ_c χ_d)` of the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianTerm {
    pub indices: Quartet,
    /// Raw coupling `J_abcd`.
    pub coupling: f64,
    /// `C · J_abcd`, the number multiplying `operator`.
    pub coefficient: f64,
    pub operator: PauliString,
}

impl HamiltonianTerm {
    pub fn new(indices: Quartet, coupling: f64, normalization: f64, n: u32) -> Result<Self> {
        Ok(HamiltonianTerm {
            indices,
            coupling,
            coefficient: normalization * coupling,
            operator: monomial4(indices, n)?,
        })
    }

    pub fn n_qubits(&self) -> u32 {
        self.operator.n_qubits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::{c64, Mat};

    fn kron(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
        let (ra, ca) = (a.nrows(), a.ncols());
        let (rb, cb) = (b.nrows(), b.ncols());
        Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
    }

    fn pauli_2x2(which: char) -> Mat<c64> {
        let (o, z, i) = (c64::new(1.0, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 1.0));
        let e = match which {
            'I' => [[o, z], [z, o]],
            'X' => [[z, o], [o, z]],
            'Y' => [[z, -i], [i, z]],
            _ => [[o, z], [z, -o]],
        };
        Mat::from_fn(2, 2, |r, c| e[r][c])
    }

    /// Explicit Jordan–Wigner matrix by Kronecker products; qubit 1 is the
    /// least significant factor (rightmost).
    fn jw_by_kron(a: u32, n: u32) -> Mat<c64> {
        let k = (a + 1) / 2;
        let mut m = Mat::<c64>::identity(1, 1);
        for q in 1..=n / 2 {
            let f = if q < k {
                'Z'
            } else if q == k {
                if a % 2 == 1 { 'X' } else { 'Y' }
            } else {
                'I'
            };
            m = kron(&pauli_2x2(f), &m);
        }
        m
    }

    fn max_abs_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let e = a[(i, j)] - b[(i, j)];
                d = d.max(libm::hypot(e.re, e.im));
            }
        }
        d
    }

    #[test]
    fn first_majorana_is_bare_x() {
        let chi = majorana(1, 4).unwrap();
        assert_eq!(chi, PauliString::x(2, 1).unwrap());
        assert_eq!(chi.phase(), Phase::ONE);
    }

    #[test]
    fn index_errors() {
        assert!(matches!(majorana(0, 4), Err(Error::MajoranaIndex { .. })));
        assert!(matches!(majorana(5, 4), Err(Error::MajoranaIndex { .. })));
        assert!(matches!(majorana(1, 5), Err(Error::OddOrInvalidN(5))));
        assert!(Quartet::new(1, 1, 2, 3).is_err());
        assert!(Quartet::new(4, 3, 2, 1).is_err());
        assert!(Quartet::new(0, 1, 2, 3).is_err());
        assert!(monomial4(Quartet::new(1, 2, 3, 9).unwrap(), 8).is_err());
    }

    #[test]
    fn clifford_algebra_symbolic() {
        for n in (2..=12).step_by(2) {
            for a in 1..=n {
                let ca = majorana(a, n).unwrap();
                let sq = ca.product(&ca).unwrap();
                assert!(sq.is_identity() && sq.phase() == Phase::ONE);
                for b in 1..=n {
                    if a != b {
                        assert!(!ca.commutes_with(&majorana(b, n).unwrap()).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn clifford_algebra_dense() {
        for n in (2..=12).step_by(2) {
            let dim = 1usize << (n / 2);
            let mats: alloc::vec::Vec<Mat<c64>> =
                (1..=n).map(|a| majorana(a, n).unwrap().to_dense().unwrap()).collect();
            for a in 0..n as usize {
                for b in 0..n as usize {
                    let anti = &mats[a] * &mats[b] + &mats[b] * &mats[a];
                    let expect = if a == b {
                        Mat::<c64>::identity(dim, dim) * faer::Scale(c64::new(2.0, 0.0))
                    } else {
                        Mat::<c64>::zeros(dim, dim)
                    };
                    assert_eq!(max_abs_diff(&anti, &expect), 0.0);
                }
            }
        }
    }

    #[test]
    fn jw_matches_kronecker_construction() {
        for n in [2u32, 4, 8] {
            for a in 1..=n {
                let sym = majorana(a, n).unwrap().to_dense().unwrap();
                assert_eq!(max_abs_diff(&sym, &jw_by_kron(a, n)), 0.0, "a={a} n={n}");
            }
        }
    }

    #[test]
    fn monomial_1234_at_n4_is_plus_z1z2() {
        let m = monomial4(Quartet::new(1, 2, 3, 4).unwrap(), 4).unwrap();
        assert_eq!(m, PauliString::from_masks(2, 0, 0b11, Phase::ONE).unwrap());
        // explicit 4x4 check: χ1χ2χ3χ4 = -Z1Z2, times i² = -1
        let mut prod = jw_by_kron(1, 4);
        for a in 2..=4 {
            prod = &prod * &jw_by_kron(a, 4);
        }
        let expect = prod * faer::Scale(c64::new(-1.0, 0.0));
        assert_eq!(max_abs_diff(&m.to_dense().unwrap(), &expect), 0.0);
    }

    #[test]
    fn monomial_matches_dense_oracle_at_n8() {
        let n = 8;
        for q in [[1, 2, 3, 4], [1, 3, 6, 8], [2, 5, 7, 8], [1, 2, 7, 8]] {
            let quartet = Quartet::new(q[0], q[1], q[2], q[3]).unwrap();
            let sym = monomial4(quartet, n).unwrap().to_dense().unwrap();
            let mut prod = jw_by_kron(q[0], n);
            for &a in &q[1..] {
                prod = &prod * &jw_by_kron(a, n);
            }
            let expect = prod * faer::Scale(c64::new(-1.0, 0.0));
            assert_eq!(max_abs_diff(&sym, &expect), 0.0, "{quartet}");
        }
    }

    #[test]
    fn random_monomials_are_hermitian_involutions_commuting_with_parity() {
        use rand::{seq::index::sample, SeedableRng};
        let n = 16;
        let parity = PauliString::parity(n / 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut idx: alloc::vec::Vec<u32> = sample(&mut rng, n as usize, 4).into_iter().map(|v| v as u32 + 1).collect();
            idx.sort_unstable();
            let m = monomial4(Quartet::new(idx[0], idx[1], idx[2], idx[3]).unwrap(), n).unwrap();
            assert!(m.is_hermitian());
            let sq = m.product(&m).unwrap();
            assert!(sq.is_identity() && sq.phase() == Phase::ONE);
            assert!(m.commutes_with(&parity).unwrap());
        }
    }

    #[test]
    fn rank_roundtrip_and_binomials() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(16, 4), 1820);
        assert_eq!(binomial(32, 4), 35960);
        let mut seen = 0u64;
        for d in 4..=10 {
            for c in 3..d {
                for b in 2..c {
                    for a in 1..b {
                        let q = Quartet::new(a, b, c, d).unwrap();
                        assert!(q.rank() < binomial(10, 4));
                        assert_eq!(Quartet::unrank(q.rank()), q);
                        seen += 1;
                    }
                }
            }
        }
        assert_eq!(seen, 210);
    }
}
