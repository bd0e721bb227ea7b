//! Sparse SYK Hamiltonians on `N` Majorana fermions and their spectral
//! statistics.
//!
//! The crate is `no_std` (with `alloc`). It covers the operator algebra
//! ([`pauli`], [`majorana`]), coupling ensembles ([`model`]), exact
//! diagonalization per parity sector ([`spectrum`]) and the chaos
//! diagnostics in [`statistics`]. File formats, persistence and the CLI live
//! in the companion `syk` crate.
#![no_std]

extern crate alloc;

pub mod error;
pub mod majorana;
pub mod model;
pub mod pauli;
pub mod spectrum;
pub mod statistics;

pub use error::{Error, Result};
pub use majorana::{majorana, monomial4, HamiltonianTerm, MajoranaIndex, Quartet};
pub use model::{
    assemble, n_total, realization_seed, sample, sample_binary, sample_gaussian, sample_unary, CouplingScheme, CouplingSet,
    Normalization,
};
pub use pauli::{PauliString, Phase};
pub use spectrum::{
    build_matrix, classify_degeneracy, detect_degeneracies, diagonalize, eigenvalues, DegeneracyClass, Diagonalization,
    Level, ParitySector, SpectrumMeta, SpectrumOptions, SpectrumRecord,
};
