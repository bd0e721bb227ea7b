//! Seeded multi-realization runs and their aggregation.
//!
//! Realization `i` uses seed `realization_seed(base_seed, i)`. Workers return
//! per-realization summaries in index order; aggregation is a sequential
//! reduction over that order, so results do not depend on the worker count.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use syk_core::spectrum::DegeneracyClass;
use syk_core::statistics::{
    distinct_levels, ensemble_curve, form_factor_sample, gap_ratios, number_variance_ensemble, plateau_average,
    rmt_reference, unfold, FormFactorSample, Histogram, SffCurve, TimeGrid, UnfoldedSpectrum,
};
use syk_core::{diagonalize, realization_seed, sample, Diagonalization, SpectrumOptions, SpectrumRecord};

use crate::config::{RunConfig, SampleSelection, SectorPooling};
use crate::error::{Error, Result};
use crate::persist::{load_if_present, write_record, RecordKey};

/// Absolute tolerance for calling two sector spectra identical.
pub const SECTOR_MATCH_TOL: f64 = 1e-9;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Gap-ratio sums of one block of distinct levels.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioBlock {
    pub sum: f64,
    pub count: usize,
    /// Individual ratios, kept only when a `P(r)` histogram is requested.
    pub ratios: Vec<f64>,
}

/// What a worker keeps from one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationSummary {
    pub index: usize,
    pub seed: u64,
    pub class: DegeneracyClass,
    /// `Σ ε² / D`.
    pub second_moment: f64,
    /// `Σ d² / D²` from the clustering.
    pub plateau_height: f64,
    /// Largest `|ε_even,i - ε_odd,i|` when both sectors have equal size.
    pub sector_mismatch: Option<f64>,
    /// `[even, odd]` for sector runs, `[full]` otherwise; `None` when too few distinct levels.
    pub ratio_blocks: Option<Vec<RatioBlock>>,
    /// One per `beta`.
    pub g: Vec<FormFactorSample>,
    /// One per `(alpha, beta)`, alpha-major.
    pub h: Vec<FormFactorSample>,
    pub plateau_average: Option<f64>,
    /// Unfolded blocks, kept only for `Σ²` and `P(s)`.
    pub unfolded: Vec<UnfoldedSpectrum>,
    pub unfold_failed: bool,
}

impl RealizationSummary {
    pub fn least_degenerate(&self) -> bool {
        self.class == DegeneracyClass::LeastDegenerate
    }

    fn ratio_mean(&self, pooling: SectorPooling) -> Option<(f64, usize)> {
        let blocks = self.ratio_blocks.as_ref()?;
        let picked: Vec<&RatioBlock> = match (pooling, blocks.len()) {
            (SectorPooling::Pooled, _) | (_, 1) => blocks.iter().collect(),
            (SectorPooling::Even, _) => vec![&blocks[0]],
            (SectorPooling::Odd, _) => vec![&blocks[1]],
        };
        let count: usize = picked.iter().map(|b| b.count).sum();
        (count > 0).then(|| (picked.iter().map(|b| b.sum).sum::<f64>(), count))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fraction {
    pub count: usize,
    pub total: usize,
    pub fraction: f64,
    /// Binomial `sqrt(f(1-f)/n)`.
    pub stderr: f64,
}

impl Fraction {
    pub fn new(count: usize, total: usize) -> Fraction {
        let f = if total > 0 { count as f64 / total as f64 } else { 0.0 };
        let stderr = if total > 0 { (f * (1.0 - f) / total as f64).sqrt() } else { 0.0 };
        Fraction { count, total, fraction: f, stderr }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanWithError {
    pub mean: f64,
    /// Standard error across realizations.
    pub stderr: f64,
    pub realizations: usize,
}

fn mean_with_error(values: &[f64]) -> Option<MeanWithError> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() > 1 {
        (values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Some(MeanWithError { mean, stderr, realizations: values.len() })
}

/// Pooled `⟨r⟩`: all ratios of the selected realizations averaged together.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanR {
    pub mean_r: f64,
    /// From the spread of per-realization means.
    pub stderr: f64,
    pub realizations: usize,
    pub ratios: usize,
}

fn pooled_mean_r<'a>(items: impl Iterator<Item = &'a RealizationSummary>, pooling: SectorPooling) -> Option<MeanR> {
    let (mut sum, mut count, mut per) = (0.0, 0usize, Vec::new());
    for s in items {
        if let Some((ssum, c)) = s.ratio_mean(pooling) {
            sum += ssum;
            count += c;
            per.push(ssum / c as f64);
        }
    }
    let m = mean_with_error(&per)?;
    Some(MeanR { mean_r: sum / count as f64, stderr: m.stderr, realizations: m.realizations, ratios: count })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceValue {
    pub ensemble: String,
    pub mean_r: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveData {
    pub beta: f64,
    pub alpha: Option<f64>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_realizations: usize,
}

impl From<SffCurve> for CurveData {
    fn from(c: SffCurve) -> Self {
        CurveData { beta: c.beta, alpha: c.alpha, times: c.times, values: c.values, stderr: c.stderr, n_realizations: c.n_realizations }
    }
}

impl CurveData {
    pub fn to_curve(&self) -> SffCurve {
        SffCurve {
            times: self.times.clone(),
            values: self.values.clone(),
            stderr: self.stderr.clone(),
            beta: self.beta,
            alpha: self.alpha,
            n_realizations: self.n_realizations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlateauData {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Ensemble mean of the time-averaged `g(t, 0)`.
    pub time_average: MeanWithError,
    /// Ensemble mean of `Σ d² / D²`.
    pub predicted: MeanWithError,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumberVarianceData {
    pub windows: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub spectra: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramData {
    pub bin_width: f64,
    pub left_edges: Vec<f64>,
    pub density: Vec<f64>,
    pub samples: usize,
}

impl From<Histogram> for HistogramData {
    fn from(h: Histogram) -> Self {
        HistogramData {
            bin_width: h.bin_width,
            left_edges: h.bins().map(|b| b.0).collect(),
            density: h.density,
            samples: h.count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: &'static str,
    pub base_seed: u64,
    /// Seeds of the completed realizations, in index order.
    pub seeds: Vec<u64>,
}

/// Aggregates of one `(N, K, scheme)` cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub n: u32,
    pub k: u64,
    pub scheme: String,
    pub normalization: &'static str,
    pub requested: usize,
    pub completed: usize,
    pub failures: Vec<Failure>,
    pub least_degenerate: Fraction,
    /// Sector spectra equal within [`SECTOR_MATCH_TOL`]; `None` for unequal sector sizes or full runs.
    pub sectors_coincide: Option<Fraction>,
    pub second_moment: Option<MeanWithError>,
    pub max_second_moment_deviation: f64,
    /// Headline `⟨r⟩` under the configured selection and pooling.
    pub mean_r: Option<MeanR>,
    pub mean_r_least_degenerate: Option<MeanR>,
    pub mean_r_all: Option<MeanR>,
    pub mean_r_even: Option<MeanR>,
    pub mean_r_odd: Option<MeanR>,
    pub ratio_failures: usize,
    pub rmt_reference: Option<ReferenceValue>,
    pub sff_g: Vec<CurveData>,
    pub sff_h: Vec<CurveData>,
    pub plateau: Option<PlateauData>,
    pub number_variance: Option<NumberVarianceData>,
    pub spacing_histogram: Option<HistogramData>,
    pub ratio_histogram: Option<HistogramData>,
    pub unfold_failures: usize,
    pub provenance: Provenance,
}

impl EnsembleResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

enum Outcome {
    Done(Box<RealizationSummary>),
    Failed(Failure),
}

struct Plan<'a> {
    cfg: &'a RunConfig,
    k: u64,
    times: Vec<f64>,
    opts: SpectrumOptions,
}

impl Plan<'_> {
    fn key(&self, seed: u64) -> RecordKey {
        RecordKey {
            n: self.cfg.n,
            k: self.k,
            scheme: self.cfg.scheme,
            seed,
            normalization: self.cfg.toggles.normalization,
            mode: self.opts.mode,
            degeneracy_tol: self.cfg.degeneracy_tol,
        }
    }

    fn record(&self, seed: u64) -> Result<std::result::Result<SpectrumRecord, syk_core::Error>> {
        let dir = self.cfg.outputs.spectra_dir.as_deref();
        if let Some(dir) = dir {
            if let Some(r) = load_if_present(dir, &self.key(seed), self.cfg.outputs.format)? {
                return Ok(Ok(r));
            }
        }
        let cs = sample(self.cfg.scheme, self.cfg.n, self.k, seed, self.cfg.toggles.normalization)?;
        match diagonalize(&cs, &self.opts) {
            Ok(r) => {
                if let Some(dir) = dir {
                    write_record(dir, &self.key(seed), &r, self.cfg.outputs.format)?;
                }
                Ok(Ok(r))
            }
            Err(e @ (syk_core::Error::SolverFailure | syk_core::Error::NotHermitian(_))) => Ok(Err(e)),
            Err(e) => Err(e.into()),
        }
    }

    fn realize(&self, index: usize) -> Result<Outcome> {
        let seed = realization_seed(self.cfg.base_seed, index as u64);
        match self.record(seed)? {
            Ok(record) => Ok(Outcome::Done(Box::new(analyze(self.cfg, &self.times, index, &record)?))),
            Err(e) => Ok(Outcome::Failed(Failure { index, seed, error: e.to_string() })),
        }
    }
}

fn blocks(record: &SpectrumRecord) -> Vec<&[f64]> {
    match &record.sector_eigenvalues {
        Some((e, o)) => vec![e.as_slice(), o.as_slice()],
        None => vec![record.eigenvalues.as_slice()],
    }
}

/// Per-realization statistics of one spectrum record.
pub fn analyze(cfg: &RunConfig, times: &[f64], index: usize, record: &SpectrumRecord) -> Result<RealizationSummary> {
    let tol = record.meta.degeneracy_tol;
    let eigs = &record.eigenvalues;
    let analysis = &cfg.analysis;
    let keep_ratios = analysis.histogram_bin_width.is_some();
    let distinct: Vec<Vec<f64>> = blocks(record).iter().map(|b| distinct_levels(b, tol)).collect();

    let ratio_blocks = if analysis.gap_ratio {
        distinct
            .iter()
            .map(|d| {
                gap_ratios(d).ok().map(|s| RatioBlock {
                    sum: s.ratios.iter().sum(),
                    count: s.ratios.len(),
                    ratios: if keep_ratios { s.ratios } else { Vec::new() },
                })
            })
            .collect::<Option<Vec<_>>>()
    } else {
        None
    };

    let sector_mismatch = match &record.sector_eigenvalues {
        Some((e, o)) if e.len() == o.len() => Some(e.iter().zip(o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)),
        _ => None,
    };

    let mut g = Vec::new();
    let mut h = Vec::new();
    if analysis.sff {
        for &beta in &cfg.beta {
            g.push(form_factor_sample(eigs, 0.0, beta, times, Default::default())?);
        }
        for &alpha in &cfg.alpha {
            for &beta in &cfg.beta {
                h.push(form_factor_sample(eigs, alpha, beta, times, cfg.toggles.h_denominator.into())?);
            }
        }
    }
    let plateau = match analysis.plateau {
        Some(p) => Some(plateau_average(eigs, 0.0, p.t_lo, p.t_hi, p.points)?),
        None => None,
    };

    let mut unfolded = Vec::new();
    let mut unfold_failed = false;
    if !analysis.number_variance.is_empty() || analysis.histogram_bin_width.is_some() {
        for d in &distinct {
            match unfold(d, analysis.fit_order, analysis.trim) {
                Ok(u) => unfolded.push(u),
                Err(_) => {
                    unfold_failed = true;
                    unfolded.clear();
                    break;
                }
            }
        }
    }

    Ok(RealizationSummary {
        index,
        seed: record.meta.seed,
        class: record.classify()?,
        second_moment: record.second_moment(),
        plateau_height: record.plateau_height(),
        sector_mismatch,
        ratio_blocks,
        g,
        h,
        plateau_average: plateau,
        unfolded,
        unfold_failed,
    })
}

fn check_dimension(cfg: &RunConfig) -> Result<()> {
    let full = cfg.dimension() as usize;
    let dim = match cfg.diagonalization.into() {
        Diagonalization::Sectors => full / 2,
        Diagonalization::Full => full,
    };
    if dim > cfg.dim_cap {
        return Err(syk_core::Error::MatrixCap { dim, cap: cfg.dim_cap, bytes: (dim as u128).pow(2) * 16 }.into());
    }
    Ok(())
}

/// Runs every realization and returns the aggregate with the per-realization
/// summaries (completed ones, in index order).
pub fn run_detailed(cfg: &RunConfig) -> Result<(EnsembleResult, Vec<RealizationSummary>)> {
    cfg.validate()?;
    check_dimension(cfg)?;
    let plan = Plan {
        cfg,
        k: cfg.resolved_k()?,
        times: TimeGrid::from(cfg.time_grid).times()?,
        opts: SpectrumOptions { mode: cfg.diagonalization.into(), dim_cap: cfg.dim_cap, degeneracy_tol: cfg.degeneracy_tol },
    };
    let count = cfg.resolved_realizations()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<Result<Outcome>> = pool.install(|| (0..count).into_par_iter().map(|i| plan.realize(i)).collect());

    let mut done = Vec::with_capacity(count);
    let mut failures = Vec::new();
    for o in outcomes {
        match o? {
            Outcome::Done(s) => done.push(*s),
            Outcome::Failed(f) => failures.push(f),
        }
    }
    let result = aggregate(cfg, plan.k, &plan.times, &done, failures)?;
    Ok((result, done))
}

pub fn run(cfg: &RunConfig) -> Result<EnsembleResult> {
    run_detailed(cfg).map(|r| r.0)
}

fn sff_curves(samples: &[&RealizationSummary], cfg: &RunConfig, times: &[f64]) -> Result<(Vec<CurveData>, Vec<CurveData>)> {
    let mut g = Vec::new();
    let mut h = Vec::new();
    if !cfg.analysis.sff || samples.is_empty() {
        return Ok((g, h));
    }
    let mode = cfg.toggles.sff_averaging.into();
    for (j, &beta) in cfg.beta.iter().enumerate() {
        let s: Vec<FormFactorSample> = samples.iter().map(|r| r.g[j].clone()).collect();
        g.push(ensemble_curve(&s, times, beta, None, mode)?.into());
    }
    for (a, &alpha) in cfg.alpha.iter().enumerate() {
        for (b, &beta) in cfg.beta.iter().enumerate() {
            let idx = a * cfg.beta.len() + b;
            let s: Vec<FormFactorSample> = samples.iter().map(|r| r.h[idx].clone()).collect();
            h.push(ensemble_curve(&s, times, beta, Some(alpha), mode)?.into());
        }
    }
    Ok((g, h))
}

fn aggregate(
    cfg: &RunConfig,
    k: u64,
    times: &[f64],
    done: &[RealizationSummary],
    failures: Vec<Failure>,
) -> Result<EnsembleResult> {
    let least = done.iter().filter(|s| s.least_degenerate()).count();
    let mismatches: Vec<f64> = done.iter().filter_map(|s| s.sector_mismatch).collect();
    let sectors_coincide = (!mismatches.is_empty() && mismatches.len() == done.len())
        .then(|| Fraction::new(mismatches.iter().filter(|&&m| m <= SECTOR_MATCH_TOL).count(), done.len()));
    let moments: Vec<f64> = done.iter().map(|s| s.second_moment).collect();

    let pooling = cfg.toggles.sector_pooling;
    let mean_r_least = pooled_mean_r(done.iter().filter(|s| s.least_degenerate()), pooling);
    let mean_r_all = pooled_mean_r(done.iter(), pooling);
    let mean_r = match cfg.toggles.sample_selection {
        SampleSelection::LeastDegenerate => mean_r_least,
        SampleSelection::All => mean_r_all,
    };
    let split = done.first().is_some_and(|s| s.ratio_blocks.as_ref().is_some_and(|b| b.len() == 2));
    let (mean_r_even, mean_r_odd) = if split {
        (pooled_mean_r(done.iter(), SectorPooling::Even), pooled_mean_r(done.iter(), SectorPooling::Odd))
    } else {
        (None, None)
    };
    let ratio_failures = if cfg.analysis.gap_ratio { done.iter().filter(|s| s.ratio_blocks.is_none()).count() } else { 0 };
    let rmt = rmt_reference(cfg.n).ok().map(|r| ReferenceValue { ensemble: r.ensemble.name().into(), mean_r: r.mean_r, stderr: r.stderr });

    let all: Vec<&RealizationSummary> = done.iter().collect();
    let (sff_g, sff_h) = sff_curves(&all, cfg, times)?;

    let plateau = match cfg.analysis.plateau {
        Some(p) => {
            let avg: Vec<f64> = done.iter().filter_map(|s| s.plateau_average).collect();
            let pred: Vec<f64> = done.iter().map(|s| s.plateau_height).collect();
            match (mean_with_error(&avg), mean_with_error(&pred)) {
                (Some(a), Some(b)) => Some(PlateauData { t_lo: p.t_lo, t_hi: p.t_hi, time_average: a, predicted: b }),
                _ => None,
            }
        }
        None => None,
    };

    let unfolded: Vec<UnfoldedSpectrum> = done.iter().flat_map(|s| s.unfolded.iter().cloned()).collect();
    let unfold_failures = done.iter().filter(|s| s.unfold_failed).count();
    let number_variance = if cfg.analysis.number_variance.is_empty() || unfolded.is_empty() {
        None
    } else {
        let nv = number_variance_ensemble(&unfolded, &cfg.analysis.number_variance, cfg.toggles.variance_mode.into())?;
        Some(NumberVarianceData { windows: nv.windows, values: nv.values, stderr: nv.stderr, spectra: nv.n_realizations })
    };
    let (spacing_histogram, ratio_histogram) = match cfg.analysis.histogram_bin_width {
        Some(w) => {
            let spacings: Vec<f64> = unfolded.iter().flat_map(|u| u.spacings()).collect();
            let ratios: Vec<f64> = done
                .iter()
                .filter_map(|s| s.ratio_blocks.as_ref())
                .flat_map(|b| b.iter().flat_map(|x| x.ratios.iter().copied()))
                .collect();
            (
                (!spacings.is_empty()).then(|| Histogram::density(&spacings, 0.0, w)).transpose()?.map(Into::into),
                (!ratios.is_empty()).then(|| Histogram::density(&ratios, 0.0, w)).transpose()?.map(Into::into),
            )
        }
        None => (None, None),
    };

    Ok(EnsembleResult {
        n: cfg.n,
        k,
        scheme: cfg.scheme.name().into(),
        normalization: cfg.toggles.normalization.name(),
        requested: done.len() + failures.len(),
        completed: done.len(),
        failures,
        least_degenerate: Fraction::new(least, done.len()),
        sectors_coincide,
        second_moment: mean_with_error(&moments),
        max_second_moment_deviation: moments.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max),
        mean_r,
        mean_r_least_degenerate: mean_r_least,
        mean_r_all,
        mean_r_even,
        mean_r_odd,
        ratio_failures,
        rmt_reference: rmt,
        sff_g,
        sff_h,
        plateau,
        number_variance,
        spacing_histogram,
        ratio_histogram,
        unfold_failures,
        provenance: Provenance {
            config_hash: cfg.hash(),
            code_version: CODE_VERSION,
            base_seed: cfg.base_seed,
            seeds: done.iter().map(|s| s.seed).collect(),
        },
    })
}

/// Re-aggregates a subset of summaries (e.g. a bootstrap resample) with the
/// run's configuration.
pub fn aggregate_subset(cfg: &RunConfig, summaries: &[RealizationSummary]) -> Result<EnsembleResult> {
    let times = TimeGrid::from(cfg.time_grid).times()?;
    aggregate(cfg, cfg.resolved_k()?, &times, summaries, Vec::new())
}

/// Aggregates already-computed spectra (e.g. files given on the command line).
/// All records must share `N`, `K` and scheme.
pub fn summarize_records(cfg: &RunConfig, records: &[SpectrumRecord]) -> Result<EnsembleResult> {
    let first = records.first().ok_or_else(|| Error::Config("no spectra to summarize".into()))?;
    if records.iter().any(|r| (r.meta.n, r.meta.k, r.meta.scheme) != (first.meta.n, first.meta.k, first.meta.scheme)) {
        return Err(Error::Config("input spectra mix different N, K or schemes".into()));
    }
    let times = TimeGrid::from(cfg.time_grid).times()?;
    let done = records.iter().enumerate().map(|(i, r)| analyze(cfg, &times, i, r)).collect::<Result<Vec<_>>>()?;
    aggregate(cfg, first.meta.k, &times, &done, Vec::new())
}

/// One configuration of a sweep and how it ended.
#[derive(Debug)]
pub struct SweepEntry {
    pub config: RunConfig,
    pub outcome: Result<EnsembleResult>,
}

/// Runs each configuration in order; a failing configuration is reported in
/// its entry and the sweep continues.
pub fn sweep(grid: &[RunConfig]) -> Result<Vec<SweepEntry>> {
    let mut seen = HashSet::new();
    for c in grid {
        if !seen.insert(c.hash()) {
            return Err(Error::Config(format!("sweep lists the configuration N={} K={:?} scheme={} twice", c.n, c.k, c.scheme)));
        }
    }
    Ok(grid.iter().map(|c| SweepEntry { config: c.clone(), outcome: run(c) }).collect())
}

/// Writes a result as pretty JSON.
pub fn write_result(path: &Path, result: &EnsembleResult) -> Result<()> {
    crate::persist::write_atomic(path, result.to_json().as_bytes())
}
