//! Spectral form factors.
//!
//! `Y(α,t,β) = Σ_j exp(-α ε_j² - (β + it) ε_j)`; the plain form factor `g`
//! is the `α = 0` case, `g(t,β) = |Z(t,β)|² / Z(0,β)²`. Spectra are passed
//! with degenerate copies included.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Log-spaced time grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { t_min: 0.1, t_max: 1e6, points: 400 }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min) || self.points < 2 {
            return Err(Error::InvalidParameter("time grid needs 0 < t_min < t_max and at least 2 points"));
        }
        let (a, b) = (libm::log(self.t_min), libm::log(self.t_max));
        let step = (b - a) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| libm::exp(a + step * i as f64)).collect())
    }
}

/// Denominator of `h`: `Y(α,0,β)²` or `Z(0,β)² = Y(0,0,β)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HDenominator {
    #[default]
    SameAlpha,
    AlphaZero,
}

/// Raw per-realization pieces: `|Y(α,t,β)|²` on the grid and the denominator,
/// both divided by `exp(2·log_scale)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormFactorSample {
    pub abs_sq: Vec<f64>,
    pub norm_sq: f64,
    pub log_scale: f64,
}

impl FormFactorSample {
    pub fn ratio(&self) -> Vec<f64> {
        self.abs_sq.iter().map(|v| v / self.norm_sq).collect()
    }
}

fn check_inputs(eigs: &[f64], alpha: f64, beta: f64) -> Result<()> {
    if eigs.is_empty() {
        return Err(Error::TooFewLevels { needed: 1, got: 0 });
    }
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter("beta must be non-negative"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter("alpha must be non-negative"));
    }
    Ok(())
}

/// Evaluates `|Y(α,t,β)|²` and the chosen denominator.
pub fn form_factor_sample(eigs: &[f64], alpha: f64, beta: f64, times: &[f64], denom: HDenominator) -> Result<FormFactorSample> {
    check_inputs(eigs, alpha, beta)?;
    // factor out the largest exponent; it cancels in every ratio
    let expo = |e: f64, a: f64| -a * e * e - beta * e;
    let shift = eigs.iter().map(|&e| expo(e, alpha)).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = eigs.iter().map(|&e| libm::exp(expo(e, alpha) - shift)).collect();
    let norm = match denom {
        HDenominator::SameAlpha => weights.iter().sum::<f64>(),
        HDenominator::AlphaZero => eigs.iter().map(|&e| libm::exp(expo(e, 0.0) - shift)).sum::<f64>(),
    };
    let abs_sq = times
        .iter()
        .map(|&t| {
            let (mut re, mut im) = (0.0, 0.0);
            for (&e, &w) in eigs.iter().zip(&weights) {
                let (s, c) = libm::sincos(t * e);
                re += w * c;
                im -= w * s;
            }
            re * re + im * im
        })
        .collect();
    Ok(FormFactorSample { abs_sq, norm_sq: norm * norm, log_scale: shift })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SffCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub beta: f64,
    pub alpha: Option<f64>,
    pub n_realizations: usize,
}

/// `g(t,β)` of one spectrum.
pub fn sff_g(eigs: &[f64], times: &[f64], beta: f64) -> Result<SffCurve> {
    let s = form_factor_sample(eigs, 0.0, beta, times, HDenominator::SameAlpha)?;
    Ok(SffCurve {
        times: times.to_vec(),
        values: s.ratio(),
        stderr: alloc::vec![0.0; times.len()],
        beta,
        alpha: None,
        n_realizations: 1,
    })
}

/// `h(α,t,β)` of one spectrum.
pub fn sff_h(eigs: &[f64], alpha: f64, times: &[f64], beta: f64, denom: HDenominator) -> Result<SffCurve> {
    let s = form_factor_sample(eigs, alpha, beta, times, denom)?;
    Ok(SffCurve {
        times: times.to_vec(),
        values: s.ratio(),
        stderr: alloc::vec![0.0; times.len()],
        beta,
        alpha: Some(alpha),
        n_realizations: 1,
    })
}

/// How realizations are combined into one curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SffAveraging {
    /// Mean of the per-realization ratio.
    #[default]
    PerRealization,
    /// `⟨|Y(t)|²⟩ / ⟨Y(0)⟩²`.
    RatioOfAverages,
}

fn mean_and_stderr(column: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = column.clone().sum::<f64>() / nf;
    let se = if n > 1 {
        libm::sqrt(column.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0) / nf)
    } else {
        0.0
    };
    (mean, se)
}

/// Ensemble curve from per-realization samples, reduced in the given order.
///
/// The ratio-of-averages mode divides by the squared mean of `sqrt(norm_sq)`;
/// its stderr column is the per-realization-ratio stderr.
pub fn ensemble_curve(
    samples: &[FormFactorSample],
    times: &[f64],
    beta: f64,
    alpha: Option<f64>,
    mode: SffAveraging,
) -> Result<SffCurve> {
    if samples.is_empty() {
        return Err(Error::TooFewLevels { needed: 1, got: 0 });
    }
    let n = samples.len();
    let ratios: Vec<Vec<f64>> = samples.iter().map(|s| s.ratio()).collect();
    let mut values = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    // common scale so unequal per-sample shifts do not bias the averages
    let top = samples.iter().map(|s| s.log_scale).fold(f64::NEG_INFINITY, f64::max);
    let rescale: Vec<f64> = samples.iter().map(|s| libm::exp(s.log_scale - top)).collect();
    let mean_norm = samples.iter().zip(&rescale).map(|(s, r)| libm::sqrt(s.norm_sq) * r).sum::<f64>() / n as f64;
    for i in 0..times.len() {
        let (m, se) = mean_and_stderr(ratios.iter().map(|r| r[i]), n);
        let v = match mode {
            SffAveraging::PerRealization => m,
            SffAveraging::RatioOfAverages => {
                samples.iter().zip(&rescale).map(|(s, r)| s.abs_sq[i] * r * r).sum::<f64>() / n as f64 / (mean_norm * mean_norm)
            }
        };
        values.push(v);
        stderr.push(se);
    }
    Ok(SffCurve { times: times.to_vec(), values, stderr, beta, alpha, n_realizations: n })
}

/// Uniform-in-`t` average of `g(t,β)` over `[t_lo, t_hi]` on `points` nodes.
pub fn plateau_average(eigs: &[f64], beta: f64, t_lo: f64, t_hi: f64, points: usize) -> Result<f64> {
    if !(t_hi > t_lo) || points < 2 {
        return Err(Error::InvalidParameter("plateau window needs t_hi > t_lo and 2+ points"));
    }
    let times: Vec<f64> = (0..points).map(|i| t_lo + (t_hi - t_lo) * i as f64 / (points - 1) as f64).collect();
    let g = sff_g(eigs, &times, beta)?;
    Ok(g.values.iter().sum::<f64>() / points as f64)
}

/// Points on each side of the centered moving average in [`ramp_onset`].
pub const SMOOTHING_HALF_WIDTH: usize = 2;

/// Dip time of a curve: the global minimum of its 5-point moving average
/// (truncated at the ends) locates the dip, and the raw minimum inside that
/// averaging window is returned.
pub fn ramp_onset(curve: &SffCurve) -> Result<f64> {
    let v = &curve.values;
    let n = v.len();
    if n < 3 || curve.times.len() != n {
        return Err(Error::TooFewLevels { needed: 3, got: n });
    }
    let w = SMOOTHING_HALF_WIDTH;
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(w), (i + w).min(n - 1));
            v[a..=b].iter().sum::<f64>() / (b - a + 1) as f64
        })
        .collect();
    let argmin = |xs: &[f64], offset: usize| {
        xs.iter()
            .enumerate()
            .fold((offset, f64::INFINITY), |best, (i, &x)| if x < best.1 { (offset + i, x) } else { best })
            .0
    };
    let center = argmin(&smooth, 0);
    if center == 0 || center == n - 1 {
        return Err(Error::NoDip);
    }
    let (a, b) = (center.saturating_sub(w), (center + w).min(n - 1));
    let raw = argmin(&v[a..=b], a);
    Ok(curve.times[raw])
}
