//! Polynomial unfolding of a spectrum and density histograms.

use alloc::vec::Vec;

use faer::prelude::SolveLstsq;
use faer::Mat;

use crate::error::{Error, Result};

pub const DEFAULT_FIT_ORDER: usize = 10;
pub const DEFAULT_TRIM: f64 = 0.05;

/// Unfolded levels: the fitted level-counting function at each retained eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct UnfoldedSpectrum {
    pub values: Vec<f64>,
    pub mean_spacing: f64,
    pub fit_order: usize,
    pub trim_fraction: f64,
}

impl UnfoldedSpectrum {
    /// Wraps levels that already have unit mean density.
    pub fn from_unit_density(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewLevels { needed: 2, got: values.len() });
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Unsorted);
        }
        let mean_spacing = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
        Ok(UnfoldedSpectrum { values, mean_spacing, fit_order: 0, trim_fraction: 0.0 })
    }

    /// Nearest-neighbor spacings `s_i`.
    pub fn spacings(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn span(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }
}

/// Minimum spectrum length accepted by [`unfold`].
pub fn min_levels(fit_order: usize, trim: f64) -> usize {
    libm::ceil((fit_order + 2) as f64 / (1.0 - 2.0 * trim)) as usize
}

/// Drops the lowest and highest `trim` fractions, least-squares fits a
/// degree-`fit_order` polynomial to the staircase `ε_j ↦ j + ½`, and
/// returns the fit evaluated at the retained levels.
pub fn unfold(eigs: &[f64], fit_order: usize, trim: f64) -> Result<UnfoldedSpectrum> {
    if !(0.0..0.5).contains(&trim) {
        return Err(Error::InvalidParameter("trim fraction must lie in [0, 0.5)"));
    }
    let n = eigs.len();
    let needed = min_levels(fit_order, trim);
    if n < needed {
        return Err(Error::TooFewLevels { needed, got: n });
    }
    if eigs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Unsorted);
    }
    let cut = libm::floor(trim * n as f64) as usize;
    let kept = &eigs[cut..n - cut];
    if kept.len() < fit_order + 2 {
        return Err(Error::TooFewLevels { needed: fit_order + 2, got: kept.len() });
    }
    let (lo, hi) = (kept[0], kept[kept.len() - 1]);
    if !(hi > lo) {
        return Err(Error::InvalidParameter("retained window has zero width"));
    }
    let center = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    let scaled: Vec<f64> = kept.iter().map(|e| (e - center) / half).collect();

    let cols = fit_order + 1;
    let design = Mat::<f64>::from_fn(scaled.len(), cols, |i, j| libm::pow(scaled[i], j as f64));
    let rhs = Mat::<f64>::from_fn(scaled.len(), 1, |i, _| (cut + i) as f64 + 0.5);
    let sol = design.qr().solve_lstsq(&rhs);
    let coeffs: Vec<f64> = (0..cols).map(|j| sol[(j, 0)]).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::FitFailure);
    }

    let eval = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let deriv = |x: f64| {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * x + j as f64 * c)
    };
    // derivative must stay positive on the retained levels and a fine grid between the ends
    let grid = (0..=4 * scaled.len()).map(|i| -1.0 + 2.0 * i as f64 / (4 * scaled.len()) as f64);
    if scaled.iter().copied().chain(grid).any(|x| !(deriv(x) > 0.0)) {
        return Err(Error::NonMonotoneFit);
    }
    let values: Vec<f64> = scaled.iter().map(|&x| eval(x)).collect();
    let mean_spacing = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
    Ok(UnfoldedSpectrum { values, mean_spacing, fit_order, trim_fraction: trim })
}

/// Density-normalized histogram on bins `[i·w, (i+1)·w)` starting at `origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub origin: f64,
    pub bin_width: f64,
    pub density: Vec<f64>,
    pub count: usize,
}

impl Histogram {
    /// Bins every sample; the range extends to cover the largest one.
    pub fn density(samples: &[f64], origin: f64, bin_width: f64) -> Result<Histogram> {
        if samples.is_empty() {
            return Err(Error::TooFewLevels { needed: 1, got: 0 });
        }
        if !(bin_width > 0.0) {
            return Err(Error::InvalidParameter("bin width must be positive"));
        }
        let index = |v: f64| libm::floor((v - origin) / bin_width);
        if samples.iter().any(|&v| !v.is_finite() || index(v) < 0.0) {
            return Err(Error::InvalidParameter("sample below histogram origin"));
        }
        let bins = samples.iter().map(|&v| index(v) as usize).max().unwrap_or(0) + 1;
        let mut counts = alloc::vec![0usize; bins];
        for &v in samples {
            counts[index(v) as usize] += 1;
        }
        let norm = samples.len() as f64 * bin_width;
        Ok(Histogram {
            origin,
            bin_width,
            density: counts.iter().map(|&c| c as f64 / norm).collect(),
            count: samples.len(),
        })
    }

    /// `(left, right, density)` per bin.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.density.iter().enumerate().map(move |(i, &d)| {
            let left = self.origin + i as f64 * self.bin_width;
            (left, left + self.bin_width, d)
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width
    }

    /// Largest `|density - ∫_bin f / w|` with the bin average of `f` from Simpson's rule.
    pub fn sup_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.bins()
            .map(|(l, r, d)| (d - bin_average(&f, l, r)).abs())
            .fold(0.0, f64::max)
    }
}

/// Average of `f` over `[l, r]` by composite Simpson with 32 panels.
pub fn bin_average(f: &impl Fn(f64) -> f64, l: f64, r: f64) -> f64 {
    let m = 32;
    let h = (r - l) / m as f64;
    let mut acc = f(l) + f(r);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(l + i as f64 * h);
    }
    acc * h / 3.0 / (r - l)
}

/// Density histogram of unfolded spacings `P(s)`.
pub fn spacing_histogram(u: &UnfoldedSpectrum, bin_width: f64) -> Result<Histogram> {
    Histogram::density(&u.spacings(), 0.0, bin_width)
}

/// GUE Wigner surmise `(32/π²) s² exp(-4s²/π)`.
pub fn wigner_surmise_gue(s: f64) -> f64 {
    let pi = core::f64::consts::PI;
    32.0 / (pi * pi) * s * s * libm::exp(-4.0 * s * s / pi)
}

/// GOE Wigner surmise `(π/2) s exp(-πs²/4)`.
pub fn wigner_surmise_goe(s: f64) -> f64 {
    let pi = core::f64::consts::PI;
    pi / 2.0 * s * libm::exp(-pi * s * s / 4.0)
}

/// Poisson spacing law `exp(-s)`.
pub fn poisson_spacing(s: f64) -> f64 {
    libm::exp(-s)
}
