//! Spectral diagnostics: gap ratios, unfolding, number variance and form factors.

pub mod gap_ratio;
pub mod number_variance;
pub mod rmt;
pub mod sff;
pub mod unfold;

pub use gap_ratio::{distinct_levels, gap_ratios, record_gap_ratios, GapRatioStats, SectorGapRatios, POISSON_MEAN_R};
pub use number_variance::{number_variance, number_variance_ensemble, NumberVariance, VarianceMode};
pub use rmt::{expected_ensemble, reference, rmt_reference, sample_mean_r, Reference, RmtEnsemble};
pub use sff::{
    ensemble_curve, form_factor_sample, plateau_average, ramp_onset, sff_g, sff_h, FormFactorSample, HDenominator,
    SffAveraging, SffCurve, TimeGrid,
};
pub use unfold::{
    poisson_spacing, spacing_histogram, unfold, wigner_surmise_goe, wigner_surmise_gue, Histogram, UnfoldedSpectrum,
    DEFAULT_FIT_ORDER, DEFAULT_TRIM,
};
