use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::statistics::unfold::UnfoldedSpectrum;

/// Window start positions advance by half a mean spacing.
pub const WINDOW_STRIDE: f64 = 0.5;

/// How [`number_variance_ensemble`] combines realizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VarianceMode {
    /// Σ²(K) per realization, then averaged.
    #[default]
    PerRealization,
    /// Counts from all realizations pooled before taking the variance.
    Pooled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumberVariance {
    pub windows: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub mode: VarianceMode,
    pub n_realizations: usize,
}

fn window_counts(u: &UnfoldedSpectrum, window: f64) -> Result<Vec<f64>> {
    if !(window > 0.0) {
        return Err(Error::InvalidParameter("window length must be positive"));
    }
    let span = u.span();
    if window > span {
        return Err(Error::WindowTooLong { window, span });
    }
    let v = &u.values;
    let start = v[0];
    let positions = libm::floor((span - window) / WINDOW_STRIDE) as usize + 1;
    let mut counts = Vec::with_capacity(positions);
    let (mut lo, mut hi) = (0usize, 0usize);
    for i in 0..positions {
        let e = start + i as f64 * WINDOW_STRIDE;
        while lo < v.len() && v[lo] < e {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < v.len() && v[hi] < e + window {
            hi += 1;
        }
        counts.push((hi - lo) as f64);
    }
    Ok(counts)
}

fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// `Σ²(K) = ⟨n²⟩ - ⟨n⟩²` over windows `[E, E+K)` of one unfolded spectrum.
pub fn number_variance(u: &UnfoldedSpectrum, windows: &[f64]) -> Result<Vec<f64>> {
    windows.iter().map(|&k| window_counts(u, k).map(|c| variance(&c))).collect()
}

pub fn number_variance_ensemble(spectra: &[UnfoldedSpectrum], windows: &[f64], mode: VarianceMode) -> Result<NumberVariance> {
    if spectra.is_empty() {
        return Err(Error::TooFewLevels { needed: 1, got: 0 });
    }
    let mut values = Vec::with_capacity(windows.len());
    let mut stderr = Vec::with_capacity(windows.len());
    for &k in windows {
        match mode {
            VarianceMode::PerRealization => {
                let per: Vec<f64> = spectra.iter().map(|u| window_counts(u, k).map(|c| variance(&c))).collect::<Result<_>>()?;
                let n = per.len() as f64;
                let mean = per.iter().sum::<f64>() / n;
                values.push(mean);
                stderr.push(if per.len() > 1 {
                    libm::sqrt(per.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) / n)
                } else {
                    0.0
                });
            }
            VarianceMode::Pooled => {
                let mut all = Vec::new();
                for u in spectra {
                    all.extend(window_counts(u, k)?);
                }
                values.push(variance(&all));
                stderr.push(0.0);
            }
        }
    }
    Ok(NumberVariance { windows: windows.to_vec(), values, stderr, mode, n_realizations: spectra.len() })
}
