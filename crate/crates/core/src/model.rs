//! Coupling ensembles for the q = 4 sparse SYK family.
//!
//! All sparse samplers use a fixed number `K` of nonzero couplings whose
//! support is drawn uniformly without replacement from the `C(N,4)` index
//! quartets. Randomness comes from ChaCha8 seeded through
//! [`rand::SeedableRng::seed_from_u64`], so a `(N, K, scheme, seed)` tuple
//! names one realization on every platform.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::majorana::{binomial, check_n, majorana, HamiltonianTerm, Quartet};
use crate::pauli::{PauliString, Phase};

/// Smallest `N` accepted for a coupling set.
pub const MIN_MAJORANAS: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CouplingScheme {
    BinarySparse,
    UnarySparse,
    GaussianSparse,
    GaussianDense,
}

impl CouplingScheme {
    pub const ALL: [CouplingScheme; 4] = [
        CouplingScheme::BinarySparse,
        CouplingScheme::UnarySparse,
        CouplingScheme::GaussianSparse,
        CouplingScheme::GaussianDense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CouplingScheme::BinarySparse => "binary",
            CouplingScheme::UnarySparse => "unary",
            CouplingScheme::GaussianSparse => "gaussian",
            CouplingScheme::GaussianDense => "gaussian-dense",
        }
    }
}

impl fmt::Display for CouplingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" | "binary-sparse" => Ok(CouplingScheme::BinarySparse),
            "unary" | "unary-sparse" => Ok(CouplingScheme::UnarySparse),
            "gaussian" | "gaussian-sparse" => Ok(CouplingScheme::GaussianSparse),
            "gaussian-dense" | "dense" => Ok(CouplingScheme::GaussianDense),
            _ => Err(Error::InvalidParameter("unknown coupling scheme")),
        }
    }
}

/// How the constant `C` is fixed for Gaussian couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Normalization {
    /// `C = 1/sqrt(Σ J²)`: unit eigenvalue variance in every realization.
    #[default]
    PerRealization,
    /// `C = 1/sqrt(K)`: unit variance on average.
    Expected,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::PerRealization => "per-realization",
            Normalization::Expected => "expected",
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-realization" | "per_realization" => Ok(Normalization::PerRealization),
            "expected" => Ok(Normalization::Expected),
            _ => Err(Error::InvalidParameter("unknown normalization mode")),
        }
    }
}

/// `C(N, 4)`, the number of index quartets.
pub fn n_total(n: u32) -> Result<u64> {
    if n < 4 {
        return Err(Error::TooFewMajoranas(n));
    }
    Ok(binomial(n as u64, 4))
}

/// The generator behind every sampler.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of realization `index` in an ensemble rooted at `base`.
///
/// SplitMix64 finalizer applied to `base + (index + 1)·γ` with odd `γ`; both
/// steps are bijections on `u64`, so distinct indices never share a seed.
pub fn realization_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Nonzero couplings `J_abcd` of one realization plus its normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSet {
    n: u32,
    scheme: CouplingScheme,
    seed: u64,
    normalization: f64,
    couplings: Vec<(Quartet, f64)>,
}

impl CouplingSet {
    /// Validates and sorts externally supplied couplings. With
    /// `normalization = None`, `C` is `1/sqrt(Σ J²)`.
    pub fn from_parts(
        n: u32,
        scheme: CouplingScheme,
        seed: u64,
        mut couplings: Vec<(Quartet, f64)>,
        normalization: Option<f64>,
    ) -> Result<Self> {
        check_n(n)?;
        if n < MIN_MAJORANAS {
            return Err(Error::TooFewMajoranas(n));
        }
        let total = n_total(n)?;
        couplings.sort_by(|a, b| a.0.cmp(&b.0));
        for w in couplings.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateCoupling(w[0].0));
            }
        }
        for (q, j) in &couplings {
            q.within(n)?;
            if *j == 0.0 || !j.is_finite() {
                return Err(Error::InvalidCouplings("stored couplings must be finite and nonzero"));
            }
        }
        let k = couplings.len() as u64;
        if k == 0 {
            return Err(Error::KOutOfRange { k, min: 1, max: total });
        }
        match scheme {
            CouplingScheme::BinarySparse => {
                if k % 2 != 0 {
                    return Err(Error::OddBinaryK(k));
                }
                let plus = couplings.iter().filter(|(_, j)| *j == 1.0).count() as u64;
                let minus = couplings.iter().filter(|(_, j)| *j == -1.0).count() as u64;
                if plus + minus != k {
                    return Err(Error::InvalidCouplings("binary couplings must be ±1"));
                }
                if plus != minus {
                    return Err(Error::InvalidCouplings("binary couplings need equal +1 and -1 counts"));
                }
            }
            CouplingScheme::UnarySparse => {
                if couplings.iter().any(|(_, j)| *j != 1.0) {
                    return Err(Error::InvalidCouplings("unary couplings must all be +1"));
                }
            }
            CouplingScheme::GaussianDense => {
                if k != total {
                    return Err(Error::InvalidCouplings("dense set must hold every quartet"));
                }
            }
            CouplingScheme::GaussianSparse => {}
        }
        let normalization = match normalization {
            Some(c) if c > 0.0 && c.is_finite() => c,
            Some(_) => return Err(Error::InvalidCouplings("normalization must be positive")),
            None => 1.0 / libm::sqrt(couplings.iter().map(|(_, j)| j * j).sum::<f64>()),
        };
        Ok(CouplingSet { n, scheme, seed, normalization, couplings })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn scheme(&self) -> CouplingScheme {
        self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of nonzero couplings.
    pub fn k(&self) -> u64 {
        self.couplings.len() as u64
    }

    pub fn n_total(&self) -> u64 {
        binomial(self.n as u64, 4)
    }

    /// Sparsity `p = K / N_total`.
    pub fn p(&self) -> f64 {
        self.k() as f64 / self.n_total() as f64
    }

    /// The constant `C_{N,p}`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn couplings(&self) -> &[(Quartet, f64)] {
        &self.couplings
    }

    pub fn get(&self, q: &Quartet) -> Option<f64> {
        self.couplings
            .binary_search_by(|(k, _)| k.cmp(q))
            .ok()
            .map(|i| self.couplings[i].1)
    }

    /// `(count of J > 0, count of J < 0)`.
    pub fn sign_counts(&self) -> (usize, usize) {
        let plus = self.couplings.iter().filter(|(_, j)| *j > 0.0).count();
        (plus, self.couplings.len() - plus)
    }

    /// Same support with every coupling negated, i.e. `H → -H`.
    pub fn negated(&self) -> CouplingSet {
        CouplingSet {
            couplings: self.couplings.iter().map(|&(q, j)| (q, -j)).collect(),
            ..self.clone()
        }
    }
}

fn check_size(n: u32) -> Result<u64> {
    check_n(n)?;
    if n < MIN_MAJORANAS {
        return Err(Error::TooFewMajoranas(n));
    }
    n_total(n)
}

fn check_k(k: u64, min: u64, max: u64) -> Result<()> {
    if k < min || k > max {
        return Err(Error::KOutOfRange { k, min, max });
    }
    Ok(())
}

fn draw_support(rng: &mut ChaCha8Rng, total: u64, k: u64) -> Vec<Quartet> {
    let mut picks: Vec<Quartet> = index::sample(rng, total as usize, k as usize)
        .into_iter()
        .map(|r| Quartet::unrank(r as u64))
        .collect();
    picks.shuffle(rng);
    picks
}

/// Binary sparse couplings: `K/2` quartets set to `+1`, `K/2` others to `-1`,
/// `C = 1/sqrt(K)`.
pub fn sample_binary(n: u32, k: u64, seed: u64) -> Result<CouplingSet> {
    let total = check_size(n)?;
    if k % 2 != 0 {
        return Err(Error::OddBinaryK(k));
    }
    check_k(k, 4, total)?;
    let mut rng = rng_for(seed);
    let support = draw_support(&mut rng, total, k);
    let half = (k / 2) as usize;
    let couplings = support
        .into_iter()
        .enumerate()
        .map(|(i, q)| (q, if i < half { 1.0 } else { -1.0 }))
        .collect();
    CouplingSet::from_parts(n, CouplingScheme::BinarySparse, seed, couplings, Some(1.0 / libm::sqrt(k as f64)))
}

/// Unary sparse couplings: `K` quartets set to `+1`, `C = 1/sqrt(K)`.
pub fn sample_unary(n: u32, k: u64, seed: u64) -> Result<CouplingSet> {
    let total = check_size(n)?;
    check_k(k, 1, total)?;
    let mut rng = rng_for(seed);
    let couplings = draw_support(&mut rng, total, k).into_iter().map(|q| (q, 1.0)).collect();
    CouplingSet::from_parts(n, CouplingScheme::UnarySparse, seed, couplings, Some(1.0 / libm::sqrt(k as f64)))
}

/// Gaussian couplings on `K` random quartets (`dense` forces `K = N_total`).
pub fn sample_gaussian(n: u32, k: u64, seed: u64, dense: bool, normalization: Normalization) -> Result<CouplingSet> {
    let total = check_size(n)?;
    let k = if dense { total } else { k };
    check_k(k, 1, total)?;
    let mut rng = rng_for(seed);
    let mut support = draw_support(&mut rng, total, k);
    support.sort_unstable();
    let couplings: Vec<(Quartet, f64)> = support
        .into_iter()
        .map(|q| {
            let mut j: f64 = rng.sample(StandardNormal);
            // an exact zero has probability zero; redraw rather than store it
            while j == 0.0 {
                j = rng.sample(StandardNormal);
            }
            (q, j)
        })
        .collect();
    let c = match normalization {
        Normalization::PerRealization => None,
        Normalization::Expected => Some(1.0 / libm::sqrt(k as f64)),
    };
    let scheme = if dense { CouplingScheme::GaussianDense } else { CouplingScheme::GaussianSparse };
    CouplingSet::from_parts(n, scheme, seed, couplings, c)
}

/// Dispatches on the scheme. `k` is ignored for [`CouplingScheme::GaussianDense`].
pub fn sample(scheme: CouplingScheme, n: u32, k: u64, seed: u64, normalization: Normalization) -> Result<CouplingSet> {
    match scheme {
        CouplingScheme::BinarySparse => sample_binary(n, k, seed),
        CouplingScheme::UnarySparse => sample_unary(n, k, seed),
        CouplingScheme::GaussianSparse => sample_gaussian(n, k, seed, false, normalization),
        CouplingScheme::GaussianDense => sample_gaussian(n, k, seed, true, normalization),
    }
}

/// One term per nonzero coupling, in sorted quartet order.
pub fn assemble(cs: &CouplingSet) -> Result<Vec<HamiltonianTerm>> {
    let n = cs.n();
    let chis: Vec<PauliString> = (1..=n).map(|a| majorana(a, n)).collect::<Result<_>>()?;
    cs.couplings()
        .iter()
        .map(|&(q, j)| {
            let [a, b, c, d] = q.indices();
            let chi = |i: u32| &chis[(i - 1) as usize];
            let prod = chi(a).product(chi(b))?.product(chi(c))?.product(chi(d))?;
            let operator = prod.with_phase(prod.phase().mul(Phase::MINUS_ONE));
            Ok(HamiltonianTerm {
                indices: q,
                coupling: j,
                coefficient: cs.normalization() * j,
                operator,
            })
        })
        .collect()
}
