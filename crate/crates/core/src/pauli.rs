//! Symplectic Pauli strings.
//!
//! A [`PauliString`] on `n` qubits is stored as two bit masks plus a phase
//! exponent: the operator is `i^phase · σ_1 ⊗ … ⊗ σ_n` where qubit `k`
//! (1-based) carries `I`, `X`, `Z` or `Y` according to bit `k-1` of the
//! `(x, z)` masks. The phase is relative to the literal tensor product of
//! Hermitian single-qubit Paulis, so `X·Y = i·Z` has phase 1.
//!
//! Basis state `|b⟩` maps qubit `k` to bit `k-1` of `b`. Every string is a
//! generalized permutation matrix; [`PauliString::row_entry`] exposes the
//! single nonzero of each row without building the matrix.

use core::fmt;

use faer::{c64, Mat};

use crate::error::{Error, Result};

/// Largest qubit count representable by the 64-bit masks.
pub const MAX_QUBITS: u32 = 64;

/// Default cap on [`PauliString::to_dense`]: 16 qubits, i.e. `N ≤ 32` Majoranas.
pub const DEFAULT_DENSE_QUBIT_CAP: u32 = 16;

/// A power of `i`, stored modulo 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub const fn new(exponent: u32) -> Self {
        Phase((exponent & 3) as u8)
    }

    pub const fn exponent(self) -> u8 {
        self.0
    }

    pub const fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    /// `+1.0` / `-1.0` for real phases.
    pub const fn sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub const fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) & 3)
    }

    pub const fn conj(self) -> Phase {
        Phase((4 - self.0) & 3)
    }

    pub fn to_complex(self) -> c64 {
        match self.0 {
            0 => c64::new(1.0, 0.0),
            1 => c64::new(0.0, 1.0),
            2 => c64::new(-1.0, 0.0),
            _ => c64::new(0.0, -1.0),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: u32,
    x: u64,
    z: u64,
    phase: Phase,
}

#[inline]
fn mask_for(n_qubits: u32) -> u64 {
    if n_qubits >= 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    }
}

#[inline]
fn popcount(v: u64) -> u32 {
    v.count_ones()
}

impl PauliString {
    pub fn identity(n_qubits: u32) -> Result<Self> {
        Self::from_masks(n_qubits, 0, 0, Phase::ONE)
    }

    /// Builds a string from raw masks. Bits at or above `n_qubits` must be clear.
    pub fn from_masks(n_qubits: u32, x: u64, z: u64, phase: Phase) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let m = mask_for(n_qubits);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::MaskOutOfRange { n_qubits });
        }
        Ok(PauliString { n_qubits, x, z, phase })
    }

    fn single(n_qubits: u32, qubit: u32, x: bool, z: bool) -> Result<Self> {
        if qubit == 0 || qubit > n_qubits {
            return Err(Error::QubitIndex { qubit, n_qubits });
        }
        let bit = 1u64 << (qubit - 1);
        Self::from_masks(
            n_qubits,
            if x { bit } else { 0 },
            if z { bit } else { 0 },
            Phase::ONE,
        )
    }

    /// `X` on the 1-based `qubit`.
    pub fn x(n_qubits: u32, qubit: u32) -> Result<Self> {
        Self::single(n_qubits, qubit, true, false)
    }

    pub fn y(n_qubits: u32, qubit: u32) -> Result<Self> {
        Self::single(n_qubits, qubit, true, true)
    }

    pub fn z(n_qubits: u32, qubit: u32) -> Result<Self> {
        Self::single(n_qubits, qubit, false, true)
    }

    /// The fermion-parity string `Z_1 Z_2 ⋯ Z_n`.
    pub fn parity(n_qubits: u32) -> Result<Self> {
        Self::from_masks(n_qubits, 0, mask_for(n_qubits), Phase::ONE)
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(self, phase: Phase) -> Self {
        PauliString { phase, ..self }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> u32 {
        popcount(self.x | self.z)
    }

    /// A phase of ±1 makes the string Hermitian; ±i makes it anti-Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    fn y_count(&self) -> u32 {
        popcount(self.x & self.z)
    }

    fn check_same_size(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(())
    }

    /// Exact product `self · other`.
    pub fn product(&self, other: &PauliString) -> Result<PauliString> {
        self.check_same_size(other)?;
        // σ(x,z) = i^{|x∧z|} X^x Z^z and Z^z X^x' = (-1)^{|z∧x'|} X^x' Z^z.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let y_out = popcount(x & z);
        let exponent = self.phase.0 as u32
            + other.phase.0 as u32
            + self.y_count()
            + other.y_count()
            + 2 * popcount(self.z & other.x)
            + 4 * 64
            - y_out;
        Ok(PauliString {
            n_qubits: self.n_qubits,
            x,
            z,
            phase: Phase::new(exponent),
        })
    }

    /// Inverse, so that `p · p.inverse()` is `+I`.
    pub fn inverse(&self) -> PauliString {
        PauliString {
            phase: self.phase.conj(),
            ..*self
        }
    }

    /// Adjoint; equals `self` exactly when the phase is real.
    pub fn adjoint(&self) -> PauliString {
        self.inverse()
    }

    /// `true` if the two strings commute, `false` if they anticommute.
    pub fn commutes_with(&self, other: &PauliString) -> Result<bool> {
        self.check_same_size(other)?;
        Ok((popcount(self.x & other.z) + popcount(other.x & self.z)) % 2 == 0)
    }

    /// The unique nonzero entry of row `row`: `(column, value)`.
    #[inline]
    pub fn row_entry(&self, row: usize) -> (usize, Phase) {
        let col = row as u64 ^ self.x;
        // X^x Z^z |c⟩ = (-1)^{|z∧c|} |c ⊕ x⟩
        let exponent = self.phase.0 as u32 + self.y_count() + 2 * popcount(self.z & col);
        (col as usize, Phase::new(exponent))
    }

    /// Row-wise element stream `(row, col, value)` over the full matrix.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Phase)> + '_ {
        let dim = 1usize << self.n_qubits;
        (0..dim).map(move |r| {
            let (c, v) = self.row_entry(r);
            (r, c, v)
        })
    }

    pub fn dimension(&self) -> Result<usize> {
        if self.n_qubits >= usize::BITS {
            return Err(Error::DenseCap {
                n_qubits: self.n_qubits,
                cap: usize::BITS - 1,
            });
        }
        Ok(1usize << self.n_qubits)
    }

    /// Dense matrix with the default qubit cap.
    pub fn to_dense(&self) -> Result<Mat<c64>> {
        self.to_dense_capped(DEFAULT_DENSE_QUBIT_CAP)
    }

    pub fn to_dense_capped(&self, max_qubits: u32) -> Result<Mat<c64>> {
        if self.n_qubits > max_qubits {
            return Err(Error::DenseCap {
                n_qubits: self.n_qubits,
                cap: max_qubits,
            });
        }
        let dim = self.dimension()?;
        let mut m = Mat::<c64>::zeros(dim, dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v.to_complex();
        }
        Ok(m)
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Renders as e.g. `+i·XIZY`, qubit 1 leftmost.
impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.0 {
            0 => "+",
            1 => "+i·",
            2 => "-",
            _ => "-i·",
        };
        f.write_str(prefix)?;
        for k in 0..self.n_qubits {
            let bit = 1u64 << k;
            let c = match (self.x & bit != 0, self.z & bit != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            fmt::Write::write_char(f, c)?;
        }
        Ok(())
    }
}
