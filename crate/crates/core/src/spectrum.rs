//! Dense Hamiltonian matrices, exact eigenvalues and degeneracy analysis.
//!
//! The q = 4 Hamiltonian commutes with the parity string `Z_1 ⋯ Z_{N/2}`, so
//! it is block diagonal over even and odd Hamming-weight basis states. Within
//! a sector, state `b` has index `b >> 1`: the upper bits determine bit 0.

use alloc::vec::Vec;

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};
use crate::majorana::HamiltonianTerm;
use crate::model::{assemble, CouplingScheme, CouplingSet};

/// Default cap on the dimension of any assembled matrix (`2^14`).
pub const DEFAULT_DIM_CAP: usize = 1 << 14;

/// Relative factor in [`default_tolerance`].
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-10;

/// Absolute tolerance accepted by the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParitySector {
    Even,
    Odd,
}

impl ParitySector {
    pub const BOTH: [ParitySector; 2] = [ParitySector::Even, ParitySector::Odd];

    pub fn dimension(self, n_qubits: u32) -> usize {
        1usize << (n_qubits - 1)
    }

    fn bit(self) -> u64 {
        match self {
            ParitySector::Even => 0,
            ParitySector::Odd => 1,
        }
    }

    /// Computational basis state for the sector-local index `s`.
    pub fn state(self, s: usize) -> usize {
        let upper = s as u64;
        ((upper << 1) | ((upper.count_ones() as u64 & 1) ^ self.bit())) as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ParitySector::Even => "even",
            ParitySector::Odd => "odd",
        }
    }
}

fn common_qubits(terms: &[HamiltonianTerm]) -> Result<u32> {
    let first = terms.first().ok_or(Error::EmptyHamiltonian)?.n_qubits();
    for t in terms {
        if t.n_qubits() != first {
            return Err(Error::MixedN(first, t.n_qubits()));
        }
    }
    Ok(first)
}

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        return Err(Error::MatrixCap {
            dim,
            cap,
            bytes: (dim as u128) * (dim as u128) * 16,
        });
    }
    Ok(())
}

/// Dense matrix of `Σ C·J·P` with the default dimension cap.
pub fn build_matrix(terms: &[HamiltonianTerm], sector: Option<ParitySector>) -> Result<Mat<c64>> {
    build_matrix_capped(terms, sector, DEFAULT_DIM_CAP)
}

pub fn build_matrix_capped(terms: &[HamiltonianTerm], sector: Option<ParitySector>, dim_cap: usize) -> Result<Mat<c64>> {
    let n_qubits = common_qubits(terms)?;
    if n_qubits >= usize::BITS - 1 {
        return Err(Error::MatrixCap { dim: usize::MAX, cap: dim_cap, bytes: u128::MAX });
    }
    let dim = match sector {
        Some(s) => s.dimension(n_qubits),
        None => 1usize << n_qubits,
    };
    check_cap(dim, dim_cap)?;
    let mut m = Mat::<c64>::zeros(dim, dim);
    for term in terms {
        let op = &term.operator;
        if sector.is_some() && op.x_mask().count_ones() % 2 != 0 {
            return Err(Error::ParityViolation(term.indices));
        }
        for row in 0..dim {
            let state = match sector {
                Some(s) => s.state(row),
                None => row,
            };
            let (col_state, phase) = op.row_entry(state);
            let col = if sector.is_some() { col_state >> 1 } else { col_state };
            let v = phase.to_complex() * term.coefficient;
            m[(row, col)] += v;
        }
    }
    Ok(m)
}

/// Largest `|M_ij - conj(M_ji)|`.
pub fn hermitian_deviation(m: &Mat<c64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in j..n {
            let d = m[(i, j)] - m[(j, i)].conj();
            worst = worst.max(libm::hypot(d.re, d.im));
        }
    }
    worst
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues(m: &Mat<c64>) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL || dev.is_nan() {
        return Err(Error::NotHermitian(dev));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut eigs = m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::SolverFailure)?;
    if eigs.iter().any(|e| !e.is_finite()) {
        return Err(Error::SolverFailure);
    }
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// A distinct eigenvalue and its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub value: f64,
    pub multiplicity: usize,
}

/// `1e-10 · max(1, max|ε|)`.
pub fn default_tolerance(eigs: &[f64]) -> f64 {
    let scale = eigs.iter().fold(1.0f64, |acc, e| acc.max(e.abs()));
    DEFAULT_RELATIVE_TOL * scale
}

/// Greedy clustering of a sorted spectrum: a value joins the current cluster
/// when it lies within `tol` of the cluster's running mean.
pub fn detect_degeneracies(eigs: &[f64], tol: f64) -> Vec<Level> {
    let mut out: Vec<Level> = Vec::new();
    let mut sum = 0.0;
    for &e in eigs {
        if let Some(last) = out.last_mut() {
            let mean = sum / last.multiplicity as f64;
            if (e - mean).abs() <= tol {
                sum += e;
                last.multiplicity += 1;
                last.value = sum / last.multiplicity as f64;
                continue;
            }
        }
        sum = e;
        out.push(Level { value: e, multiplicity: 1 });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DegeneracyClass {
    LeastDegenerate,
    ExtraDegenerate,
}

/// Multiplicity every level carries within a parity sector when no
/// accidental symmetry is present: 2 for `N ≡ 4 mod 8`, else 1.
pub fn least_multiplicity(n: u32) -> usize {
    if n % 8 == 4 {
        2
    } else {
        1
    }
}

pub fn classify_degeneracy(n: u32, sector_levels: &[&[Level]]) -> Result<DegeneracyClass> {
    if n % 2 != 0 {
        return Err(Error::OddOrInvalidN(n));
    }
    let want = least_multiplicity(n);
    let least = sector_levels.iter().all(|levels| levels.iter().all(|l| l.multiplicity == want));
    Ok(if least { DegeneracyClass::LeastDegenerate } else { DegeneracyClass::ExtraDegenerate })
}

/// Element-wise agreement of two sorted spectra.
pub fn spectra_coincide(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumMeta {
    pub n: u32,
    pub k: u64,
    pub scheme: CouplingScheme,
    pub seed: u64,
    pub degeneracy_tol: f64,
}

/// Sorted eigenvalues of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRecord {
    pub meta: SpectrumMeta,
    /// Full spectrum, ascending, with degenerate copies.
    pub eigenvalues: Vec<f64>,
    /// `(even, odd)` sector spectra when diagonalized sector-wise.
    pub sector_eigenvalues: Option<(Vec<f64>, Vec<f64>)>,
    /// Clustering of `eigenvalues` at `meta.degeneracy_tol`.
    pub multiplicities: Vec<Level>,
}

impl SpectrumRecord {
    /// Builds a record from sector spectra. `tol = None` picks [`default_tolerance`].
    pub fn from_sectors(mut meta: SpectrumMeta, even: Vec<f64>, odd: Vec<f64>, tol: Option<f64>) -> Self {
        let eigenvalues = merge_sorted(&even, &odd);
        meta.degeneracy_tol = tol.unwrap_or_else(|| default_tolerance(&eigenvalues));
        let multiplicities = detect_degeneracies(&eigenvalues, meta.degeneracy_tol);
        SpectrumRecord { meta, eigenvalues, sector_eigenvalues: Some((even, odd)), multiplicities }
    }

    pub fn from_full(mut meta: SpectrumMeta, eigenvalues: Vec<f64>, tol: Option<f64>) -> Self {
        meta.degeneracy_tol = tol.unwrap_or_else(|| default_tolerance(&eigenvalues));
        let multiplicities = detect_degeneracies(&eigenvalues, meta.degeneracy_tol);
        SpectrumRecord { meta, eigenvalues, sector_eigenvalues: None, multiplicities }
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ ε² / D`; unity for a normalized Hamiltonian.
    pub fn second_moment(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e * e).sum::<f64>() / self.dimension() as f64
    }

    /// Per-sector clusterings at the record's tolerance.
    pub fn sector_levels(&self) -> Option<[Vec<Level>; 2]> {
        self.sector_eigenvalues.as_ref().map(|(e, o)| {
            [detect_degeneracies(e, self.meta.degeneracy_tol), detect_degeneracies(o, self.meta.degeneracy_tol)]
        })
    }

    /// Classification from the sector clusterings (full spectrum if unsplit).
    pub fn classify(&self) -> Result<DegeneracyClass> {
        match self.sector_levels() {
            Some([e, o]) => classify_degeneracy(self.meta.n, &[&e, &o]),
            None => {
                // Without the split, N ≢ 4 mod 8 spectra are compared against the
                // cross-sector doubling where it applies.
                let want = match self.meta.n % 8 {
                    0 => 1,
                    _ => 2,
                };
                Ok(if self.multiplicities.iter().all(|l| l.multiplicity == want) {
                    DegeneracyClass::LeastDegenerate
                } else {
                    DegeneracyClass::ExtraDegenerate
                })
            }
        }
    }

    /// `Σ d_i² / D²`, the long-time plateau of the β = 0 form factor.
    pub fn plateau_height(&self) -> f64 {
        let d = self.dimension() as f64;
        self.multiplicities.iter().map(|l| (l.multiplicity * l.multiplicity) as f64).sum::<f64>() / (d * d)
    }
}

/// How a realization is diagonalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Diagonalization {
    /// Both parity sectors separately.
    #[default]
    Sectors,
    /// The whole `2^{N/2}` matrix; kept for cross-checks.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub mode: Diagonalization,
    pub dim_cap: usize,
    /// Absolute degeneracy tolerance; `None` uses [`default_tolerance`].
    pub degeneracy_tol: Option<f64>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { mode: Diagonalization::Sectors, dim_cap: DEFAULT_DIM_CAP, degeneracy_tol: None }
    }
}

/// Sample-independent step: coupling set in, spectrum record out.
pub fn diagonalize(cs: &CouplingSet, opts: &SpectrumOptions) -> Result<SpectrumRecord> {
    let terms = assemble(cs)?;
    let meta = SpectrumMeta { n: cs.n(), k: cs.k(), scheme: cs.scheme(), seed: cs.seed(), degeneracy_tol: 0.0 };
    match opts.mode {
        Diagonalization::Sectors => {
            let even = eigenvalues(&build_matrix_capped(&terms, Some(ParitySector::Even), opts.dim_cap)?)?;
            let odd = eigenvalues(&build_matrix_capped(&terms, Some(ParitySector::Odd), opts.dim_cap)?)?;
            Ok(SpectrumRecord::from_sectors(meta, even, odd, opts.degeneracy_tol))
        }
        Diagonalization::Full => {
            let eigs = eigenvalues(&build_matrix_capped(&terms, None, opts.dim_cap)?)?;
            Ok(SpectrumRecord::from_full(meta, eigs, opts.degeneracy_tol))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorana::{HamiltonianTerm, Quartet};
    use crate::model::{sample_binary, CouplingSet};
    use alloc::vec;

    fn single_term(n: u32, coef: f64) -> Vec<HamiltonianTerm> {
        vec![HamiltonianTerm::new(Quartet::new(1, 2, 3, 4).unwrap(), coef, 1.0, n).unwrap()]
    }

    #[test]
    fn sector_state_indexing() {
        for s in 0..64 {
            assert_eq!(ParitySector::Even.state(s).count_ones() % 2, 0);
            assert_eq!(ParitySector::Odd.state(s).count_ones() % 2, 1);
            assert_eq!(ParitySector::Even.state(s) >> 1, s);
        }
        // increasing order inside a sector
        for s in 1..64 {
            assert!(ParitySector::Odd.state(s) > ParitySector::Odd.state(s - 1));
        }
    }

    #[test]
    fn single_zz_term_is_diagonal() {
        // i²χ1χ2χ3χ4 = +Z1Z2 on 4 qubits: ±1 eight times each.
        let m = build_matrix(&single_term(8, 1.0), None).unwrap();
        let mut plus = 0;
        let mut minus = 0;
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert_eq!(m[(i, j)], c64::new(0.0, 0.0));
                }
            }
            let expect = if (i & 1) ^ ((i >> 1) & 1) == 0 { 1.0 } else { -1.0 };
            assert_eq!(m[(i, i)], c64::new(expect, 0.0));
            if expect > 0.0 { plus += 1 } else { minus += 1 }
        }
        assert_eq!((plus, minus), (8, 8));
    }

    #[test]
    fn scaled_involution_eigenvalues() {
        let eigs = eigenvalues(&build_matrix(&single_term(12, 0.5), None).unwrap()).unwrap();
        assert_eq!(eigs.len(), 64);
        assert!(eigs[..32].iter().all(|e| (e + 0.5).abs() < 1e-14));
        assert!(eigs[32..].iter().all(|e| (e - 0.5).abs() < 1e-14));
        let levels = detect_degeneracies(&eigs, default_tolerance(&eigs));
        assert_eq!(levels.len(), 2);
        assert_eq!((levels[0].multiplicity, levels[1].multiplicity), (32, 32));
        assert!((levels[0].value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn diag_eigenvalues() {
        let mut m = Mat::<c64>::zeros(3, 3);
        m[(0, 0)] = c64::new(3.0, 0.0);
        m[(1, 1)] = c64::new(1.0, 0.0);
        m[(2, 2)] = c64::new(2.0, 0.0);
        let e = eigenvalues(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14 && (e[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_oversized() {
        let mut m = Mat::<c64>::zeros(2, 2);
        m[(0, 1)] = c64::new(1.0, 0.0);
        assert!(matches!(eigenvalues(&m), Err(Error::NotHermitian(_))));
        let terms = single_term(8, 1.0);
        assert!(matches!(build_matrix_capped(&terms, None, 8), Err(Error::MatrixCap { dim: 16, .. })));
        assert!(build_matrix_capped(&terms, Some(ParitySector::Even), 8).is_ok());
        let mut mixed = single_term(8, 1.0);
        mixed.extend(single_term(10, 1.0));
        assert!(matches!(build_matrix(&mixed, None), Err(Error::MixedN(4, 5))));
        assert!(matches!(build_matrix(&[], None), Err(Error::EmptyHamiltonian)));
    }

    #[test]
    fn assembled_matrices_are_exactly_hermitian() {
        for seed in 0..5 {
            let cs = sample_binary(12, 30, seed).unwrap();
            let terms = assemble(&cs).unwrap();
            for sector in [None, Some(ParitySector::Even), Some(ParitySector::Odd)] {
                assert_eq!(hermitian_deviation(&build_matrix(&terms, sector).unwrap()), 0.0);
            }
        }
    }

    #[test]
    fn sector_union_matches_full_spectrum() {
        let cs = sample_binary(10, 20, 17).unwrap();
        let full = diagonalize(&cs, &SpectrumOptions { mode: Diagonalization::Full, ..Default::default() }).unwrap();
        let split = diagonalize(&cs, &SpectrumOptions::default()).unwrap();
        assert_eq!(full.eigenvalues.len(), 32);
        for (a, b) in full.eigenvalues.iter().zip(&split.eigenvalues) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn degeneracy_clustering() {
        let levels = detect_degeneracies(&[1.0, 1.0, 2.0], 1e-10);
        assert_eq!(levels, vec![Level { value: 1.0, multiplicity: 2 }, Level { value: 2.0, multiplicity: 1 }]);
        assert!(detect_degeneracies(&[], 1e-10).is_empty());
    }

    #[test]
    fn classification_rules() {
        let ones = vec![Level { value: 0.0, multiplicity: 1 }, Level { value: 1.0, multiplicity: 1 }];
        let twos = vec![Level { value: 0.0, multiplicity: 2 }, Level { value: 1.0, multiplicity: 2 }];
        let mixed = vec![Level { value: 0.0, multiplicity: 1 }, Level { value: 1.0, multiplicity: 2 }];
        assert_eq!(classify_degeneracy(16, &[&ones, &ones]).unwrap(), DegeneracyClass::LeastDegenerate);
        assert_eq!(classify_degeneracy(20, &[&twos, &twos]).unwrap(), DegeneracyClass::LeastDegenerate);
        assert_eq!(classify_degeneracy(16, &[&ones, &mixed]).unwrap(), DegeneracyClass::ExtraDegenerate);
        assert_eq!(classify_degeneracy(20, &[&ones, &ones]).unwrap(), DegeneracyClass::ExtraDegenerate);
        assert!(classify_degeneracy(15, &[&ones]).is_err());
    }

    #[test]
    fn global_flip_negates_spectrum() {
        let cs = sample_binary(12, 24, 2).unwrap();
        let a = diagonalize(&cs, &SpectrumOptions::default()).unwrap();
        let b = diagonalize(&cs.negated(), &SpectrumOptions::default()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(b.eigenvalues.iter().rev()) {
            assert!((x + y).abs() < 1e-12);
        }
    }

    #[test]
    fn from_parts_fixture_style_set() {
        let q = Quartet::new(1, 2, 3, 4).unwrap();
        let r = Quartet::new(5, 6, 7, 8).unwrap();
        let cs = CouplingSet::from_parts(8, CouplingScheme::BinarySparse, 0, vec![(q, 1.0), (r, -1.0)], None).unwrap();
        let rec = diagonalize(&cs, &SpectrumOptions::default()).unwrap();
        assert!((rec.second_moment() - 1.0).abs() < 1e-12);
    }
}
