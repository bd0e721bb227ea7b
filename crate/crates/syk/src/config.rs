//! Run configuration (JSON, `schema_version` 1).
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "n": 16, "scheme": "binary", "k": 32,
//!   "eigenvalue_budget": 1048576,
//!   "base_seed": 1,
//!   "beta": [0.0], "alpha": [1.0]
//! }
//! ```
//!
//! Exactly one of `k` / `p` and one of `n_realizations` /
//! `eigenvalue_budget` is set; a dense Gaussian run may omit both `k` and `p`.
//! Omitted sections take their defaults.

use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use syk_core::model::n_total;
use syk_core::spectrum::DEFAULT_DIM_CAP;
use syk_core::statistics::{HDenominator, SffAveraging, TimeGrid, VarianceMode, DEFAULT_FIT_ORDER, DEFAULT_TRIM};
use syk_core::{CouplingScheme, Diagonalization, Normalization};

use crate::error::{Error, Result};
use crate::persist::RecordFormat;

pub const SCHEMA_VERSION: u32 = 1;

/// Serde through `Display` / `FromStr`.
pub(crate) mod as_str {
    use super::*;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> std::result::Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for TimeGridSpec {
    fn default() -> Self {
        let g = TimeGrid::default();
        TimeGridSpec { t_min: g.t_min, t_max: g.t_max, points: g.points }
    }
}

impl From<TimeGridSpec> for TimeGrid {
    fn from(s: TimeGridSpec) -> Self {
        TimeGrid { t_min: s.t_min, t_max: s.t_max, points: s.points }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Persist one spectrum file per realization here and reuse them on re-runs.
    pub spectra_dir: Option<PathBuf>,
    pub format: RecordFormat,
}

/// Which realizations enter the headline `⟨r⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSelection {
    #[default]
    LeastDegenerate,
    All,
}

/// Which sectors' ratios enter the headline `⟨r⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorPooling {
    #[default]
    Pooled,
    Even,
    Odd,
}

fn norm_ser<S: Serializer>(v: &Normalization, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(v.name())
}

fn norm_de<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Normalization, D::Error> {
    String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SffAveragingSpec {
    #[default]
    PerRealization,
    RatioOfAverages,
}

impl From<SffAveragingSpec> for SffAveraging {
    fn from(s: SffAveragingSpec) -> Self {
        match s {
            SffAveragingSpec::PerRealization => SffAveraging::PerRealization,
            SffAveragingSpec::RatioOfAverages => SffAveraging::RatioOfAverages,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HDenominatorSpec {
    #[default]
    SameAlpha,
    AlphaZero,
}

impl From<HDenominatorSpec> for HDenominator {
    fn from(s: HDenominatorSpec) -> Self {
        match s {
            HDenominatorSpec::SameAlpha => HDenominator::SameAlpha,
            HDenominatorSpec::AlphaZero => HDenominator::AlphaZero,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceModeSpec {
    #[default]
    PerRealization,
    Pooled,
}

impl From<VarianceModeSpec> for VarianceMode {
    fn from(s: VarianceModeSpec) -> Self {
        match s {
            VarianceModeSpec::PerRealization => VarianceMode::PerRealization,
            VarianceModeSpec::Pooled => VarianceMode::Pooled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalizationSpec {
    #[default]
    Sectors,
    Full,
}

impl From<DiagonalizationSpec> for Diagonalization {
    fn from(s: DiagonalizationSpec) -> Self {
        match s {
            DiagonalizationSpec::Sectors => Diagonalization::Sectors,
            DiagonalizationSpec::Full => Diagonalization::Full,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Toggles {
    pub sample_selection: SampleSelection,
    pub sector_pooling: SectorPooling,
    pub sff_averaging: SffAveragingSpec,
    #[serde(serialize_with = "norm_ser", deserialize_with = "norm_de")]
    pub normalization: Normalization,
    pub h_denominator: HDenominatorSpec,
    pub variance_mode: VarianceModeSpec,
}

/// Uniform-in-`t` window for the plateau average.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateauSpec {
    pub t_lo: f64,
    pub t_hi: f64,
    pub points: usize,
}

impl Default for PlateauSpec {
    fn default() -> Self {
        PlateauSpec { t_lo: 1e3, t_hi: 1e4, points: 4000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    pub gap_ratio: bool,
    pub sff: bool,
    pub plateau: Option<PlateauSpec>,
    /// Window lengths for `Σ²`, in mean spacings; empty disables it.
    pub number_variance: Vec<f64>,
    /// Bin width for the unfolded `P(s)` and for `P(r)`; `None` disables both.
    pub histogram_bin_width: Option<f64>,
    pub fit_order: usize,
    pub trim: f64,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec {
            gap_ratio: true,
            sff: true,
            plateau: Some(PlateauSpec::default()),
            number_variance: Vec::new(),
            histogram_bin_width: None,
            fit_order: DEFAULT_FIT_ORDER,
            trim: DEFAULT_TRIM,
        }
    }
}

fn default_beta() -> Vec<f64> {
    vec![0.0]
}

fn default_dim_cap() -> usize {
    DEFAULT_DIM_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub n: u32,
    #[serde(with = "as_str")]
    pub scheme: CouplingScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_realizations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalue_budget: Option<u64>,
    pub base_seed: u64,
    #[serde(default = "default_beta")]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub time_grid: TimeGridSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub diagonalization: DiagonalizationSpec,
    /// Absolute clustering tolerance; `None` is relative `1e-10`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degeneracy_tol: Option<f64>,
    #[serde(default = "default_dim_cap")]
    pub dim_cap: usize,
    /// Worker threads; `None` uses the available parallelism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// Even value in `4..=max`, rounding odd values up.
pub fn even_k(k: u64, max: u64) -> u64 {
    let top = max - max % 2;
    let k = if k % 2 == 1 { k + 1 } else { k };
    k.clamp(4, top)
}

impl RunConfig {
    /// Defaults with an explicit `K` and realization count.
    pub fn new(n: u32, scheme: CouplingScheme, k: u64, n_realizations: usize, base_seed: u64) -> RunConfig {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            n,
            scheme,
            k: Some(k),
            p: None,
            n_realizations: Some(n_realizations),
            eigenvalue_budget: None,
            base_seed,
            beta: default_beta(),
            alpha: Vec::new(),
            time_grid: TimeGridSpec::default(),
            outputs: OutputSpec::default(),
            toggles: Toggles::default(),
            analysis: AnalysisSpec::default(),
            diagonalization: DiagonalizationSpec::default(),
            degeneracy_tol: None,
            dim_cap: DEFAULT_DIM_CAP,
            workers: None,
        }
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        n_total(self.n)?;
        let dense = self.scheme == CouplingScheme::GaussianDense;
        match (self.k, self.p) {
            (Some(_), Some(_)) => return fail("set exactly one of k and p".into()),
            (None, None) if !dense => return fail("set exactly one of k and p".into()),
            _ => {}
        }
        if let Some(p) = self.p {
            if !(p > 0.0 && p <= 1.0) {
                return fail(format!("p must lie in (0, 1], got {p}"));
            }
        }
        match (self.n_realizations, self.eigenvalue_budget) {
            (Some(_), Some(_)) | (None, None) => return fail("set exactly one of n_realizations and eigenvalue_budget".into()),
            (Some(0), _) => return fail("n_realizations must be at least 1".into()),
            _ => {}
        }
        if self.beta.iter().chain(&self.alpha).any(|v| !(*v >= 0.0 && v.is_finite())) {
            return fail("beta and alpha values must be finite and non-negative".into());
        }
        TimeGrid::from(self.time_grid).times()?;
        if let Some(p) = self.analysis.plateau {
            if !(p.t_hi > p.t_lo && p.t_lo >= 0.0) || p.points < 2 {
                return fail("plateau window needs 0 <= t_lo < t_hi and 2+ points".into());
            }
        }
        if !(0.0..0.5).contains(&self.analysis.trim) {
            return fail("trim must lie in [0, 0.5)".into());
        }
        if self.analysis.number_variance.iter().any(|w| !(*w > 0.0)) {
            return fail("number-variance windows must be positive".into());
        }
        if matches!(self.analysis.histogram_bin_width, Some(w) if !(w > 0.0)) {
            return fail("histogram bin width must be positive".into());
        }
        if matches!(self.workers, Some(0)) {
            return fail("workers must be at least 1".into());
        }
        self.resolved_k()?;
        self.resolved_realizations()?;
        Ok(())
    }

    /// `K`, from `p` if needed. Binary `K` from `p` is rounded to an even value;
    /// an explicit odd binary `K` is left for the sampler to reject.
    pub fn resolved_k(&self) -> Result<u64> {
        let total = n_total(self.n)?;
        let k = match (self.k, self.p) {
            (Some(k), _) => k,
            (None, Some(p)) => {
                let k = ((p * total as f64).round() as u64).max(1);
                if self.scheme == CouplingScheme::BinarySparse {
                    even_k(k, total)
                } else {
                    k.min(total)
                }
            }
            (None, None) => total,
        };
        if k == 0 || k > total {
            return Err(syk_core::Error::KOutOfRange { k, min: 1, max: total }.into());
        }
        if self.scheme == CouplingScheme::GaussianDense && k != total {
            return Err(Error::Config(format!("dense Gaussian runs use K = N_total = {total}, got {k}")));
        }
        Ok(k)
    }

    /// Full Hilbert-space dimension `2^{N/2}`.
    pub fn dimension(&self) -> u64 {
        1u64 << (self.n / 2)
    }

    /// Realization count, from the eigenvalue budget if needed (`budget / 2^{N/2}`).
    pub fn resolved_realizations(&self) -> Result<usize> {
        match (self.n_realizations, self.eigenvalue_budget) {
            (Some(r), _) => Ok(r),
            (None, Some(b)) => {
                let r = b / self.dimension();
                if r == 0 {
                    return Err(Error::Config(format!("budget {b} is below one realization ({} eigenvalues)", self.dimension())));
                }
                Ok(r as usize)
            }
            (None, None) => Err(Error::Config("no realization count".into())),
        }
    }

    /// SHA-256 of the canonical JSON, ignoring settings that cannot change
    /// results (worker count, output location).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        c.outputs = OutputSpec::default();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_takes_defaults() {
        let c = RunConfig::from_json(r#"{"schema_version":1,"n":16,"scheme":"binary","k":32,"eigenvalue_budget":1048576,"base_seed":7}"#)
            .unwrap();
        assert_eq!(c.resolved_realizations().unwrap(), 4096);
        assert_eq!(c.resolved_k().unwrap(), 32);
        assert_eq!(c.beta, vec![0.0]);
        assert_eq!(c.analysis.fit_order, 10);
        let back = RunConfig::from_json(&c.to_json_pretty()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn exclusive_fields_are_enforced() {
        let base = r#""schema_version":1,"n":16,"scheme":"binary","base_seed":1"#;
        for extra in [
            r#""k":32,"p":0.1,"n_realizations":3"#,
            r#""n_realizations":3"#,
            r#""k":32"#,
            r#""k":32,"n_realizations":0"#,
            r#""k":32,"n_realizations":3,"eigenvalue_budget":100"#,
            r#""k":32,"eigenvalue_budget":100"#,
            r#""k":32,"n_realizations":3,"bogus":1"#,
            r#""k":5000,"n_realizations":3"#,
        ] {
            assert!(RunConfig::from_json(&format!("{{{base},{extra}}}")).is_err(), "{extra}");
        }
        assert!(RunConfig::from_json(r#"{"schema_version":2,"n":16,"scheme":"binary","k":32,"n_realizations":1,"base_seed":1}"#).is_err());
    }

    #[test]
    fn k_from_p() {
        let mut c = RunConfig::new(16, CouplingScheme::BinarySparse, 1, 1, 0);
        c.k = None;
        c.p = Some(33.0 / 1820.0);
        assert_eq!(c.resolved_k().unwrap(), 34);
        c.scheme = CouplingScheme::GaussianSparse;
        assert_eq!(c.resolved_k().unwrap(), 33);
        c.scheme = CouplingScheme::GaussianDense;
        c.p = None;
        assert_eq!(c.resolved_k().unwrap(), 1820);
        assert_eq!(even_k(9, 1001), 10);
        assert_eq!(even_k(1001, 1001), 1000);
        assert_eq!(even_k(1, 70), 4);
    }

    #[test]
    fn hash_ignores_workers_only() {
        let a = RunConfig::new(12, CouplingScheme::BinarySparse, 24, 5, 1);
        let mut b = a.clone();
        b.workers = Some(3);
        assert_eq!(a.hash(), b.hash());
        b.base_seed = 2;
        assert_ne!(a.hash(), b.hash());
    }
}
