use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::spectrum::{detect_degeneracies, SpectrumRecord};

/// `⟨r⟩` of an uncorrelated (Poisson) spectrum, `2 ln 2 - 1`.
pub const POISSON_MEAN_R: f64 = 2.0 * core::f64::consts::LN_2 - 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct GapRatioStats {
    /// `r_i = min(s_i, s_{i+1}) / max(s_i, s_{i+1})`, each in `(0, 1]`.
    pub ratios: Vec<f64>,
    pub mean: f64,
}

/// Neighboring gap ratios of a strictly increasing list of distinct levels.
pub fn gap_ratios(distinct: &[f64]) -> Result<GapRatioStats> {
    if distinct.len() < 3 {
        return Err(Error::TooFewLevels { needed: 3, got: distinct.len() });
    }
    if distinct.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Unsorted);
    }
    let ratios: Vec<f64> = distinct
        .windows(3)
        .map(|w| {
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            a.min(b) / a.max(b)
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(GapRatioStats { ratios, mean })
}

/// Distinct values of a sorted spectrum, clustered at `tol`.
pub fn distinct_levels(eigs: &[f64], tol: f64) -> Vec<f64> {
    detect_degeneracies(eigs, tol).into_iter().map(|l| l.value).collect()
}

/// Gap ratios computed per parity sector on deduplicated levels.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorGapRatios {
    pub even: GapRatioStats,
    pub odd: GapRatioStats,
}

impl SectorGapRatios {
    /// Mean over the ratios of both sectors together.
    pub fn pooled_mean(&self) -> f64 {
        let n = (self.even.ratios.len() + self.odd.ratios.len()) as f64;
        (self.even.ratios.iter().sum::<f64>() + self.odd.ratios.iter().sum::<f64>()) / n
    }

    pub fn pooled_count(&self) -> usize {
        self.even.ratios.len() + self.odd.ratios.len()
    }
}

/// Per-sector gap ratios of a sector-split record.
pub fn record_gap_ratios(record: &SpectrumRecord) -> Result<SectorGapRatios> {
    let (even, odd) = record
        .sector_eigenvalues
        .as_ref()
        .ok_or(Error::InvalidParameter("record was not diagonalized sector-wise"))?;
    let tol = record.meta.degeneracy_tol;
    Ok(SectorGapRatios {
        even: gap_ratios(&distinct_levels(even, tol))?,
        odd: gap_ratios(&distinct_levels(odd, tol))?,
    })
}
