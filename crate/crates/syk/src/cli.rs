//! `syk` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 resource cap.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use syk_core::model::n_total;
use syk_core::spectrum::{
    build_matrix_capped, detect_degeneracies, eigenvalues, least_multiplicity, spectra_coincide, DegeneracyClass,
    ParitySector, DEFAULT_DIM_CAP,
};
use syk_core::statistics::{sample_mean_r, RmtEnsemble};
use syk_core::{assemble, diagonalize, CouplingScheme, CouplingSet, Diagonalization, Normalization, SpectrumOptions, SpectrumRecord};

use crate::config::{PlateauSpec, RunConfig};
use crate::ensemble::{self, SECTOR_MATCH_TOL};
use crate::error::{Error, Result};
use crate::fixture::{self, Fixture};
use crate::output::{self, Manifest};
use crate::persist::{encode_record, read_record, write_atomic, RecordFormat, RecordKey};
use crate::presets::{build_grid, Overrides, PresetFile};

#[derive(Debug, Parser)]
#[command(name = "syk", version, about = "Sparse SYK spectra and spectral statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one coupling realization and write it as a fixture file.
    Sample(SampleArgs),
    /// Diagonalize one realization (fixture or freshly sampled).
    Spectrum(SpectrumArgs),
    /// Compute statistics datasets from spectra, a run config or a figure preset.
    Stats(StatsArgs),
    /// Check a fixture file.
    ValidateFixture(ValidateArgs),
    /// Run an ensemble from a JSON config.
    Run(RunArgs),
    /// Regenerate the pinned random-matrix gap-ratio table.
    RmtReference(RmtArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Binary,
    Unary,
    Gaussian,
    GaussianDense,
}

impl From<SchemeArg> for CouplingScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Binary => CouplingScheme::BinarySparse,
            SchemeArg::Unary => CouplingScheme::UnarySparse,
            SchemeArg::Gaussian => CouplingScheme::GaussianSparse,
            SchemeArg::GaussianDense => CouplingScheme::GaussianDense,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    PerRealization,
    Expected,
}

impl From<NormalizationArg> for Normalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::PerRealization => Normalization::PerRealization,
            NormalizationArg::Expected => Normalization::Expected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Bin,
    Csv,
}

impl From<FormatArg> for RecordFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Bin => RecordFormat::Binary,
            FormatArg::Csv => RecordFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SectorArg {
    Even,
    Odd,
    Both,
    Full,
}

/// Inline sampling flags.
#[derive(Debug, Args)]
pub struct SampleFlags {
    /// Number of Majorana fermions (even).
    #[arg(long)]
    pub n: Option<u32>,
    /// Number of nonzero couplings.
    #[arg(long, conflicts_with = "p")]
    pub k: Option<u64>,
    /// Fraction of nonzero couplings, K = round(p * N_total).
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_enum, default_value = "binary")]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "per-realization")]
    pub normalization: NormalizationArg,
}

impl SampleFlags {
    fn coupling_set(&self) -> Result<CouplingSet> {
        let n = self.n.ok_or_else(|| Error::Usage("--n is required".into()))?;
        let mut cfg = RunConfig::new(n, self.scheme.into(), 1, 1, self.seed);
        cfg.k = self.k;
        cfg.p = self.p;
        let total = n_total(n)?;
        if let Some(k) = self.k {
            if k > total {
                return Err(Error::Config(format!("K={k} exceeds N_total={total}")));
            }
        }
        if self.k.is_none() && self.p.is_none() && cfg.scheme != CouplingScheme::GaussianDense {
            return Err(Error::Usage("one of --k or --p is required".into()));
        }
        let k = cfg.resolved_k()?;
        Ok(syk_core::sample(self.scheme.into(), n, k, self.seed, self.normalization.into())?)
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub flags: SampleFlags,
    /// Output fixture file; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Fixture file to diagonalize instead of sampling.
    #[arg(long, conflicts_with_all = ["n", "k", "p"])]
    pub fixture: Option<PathBuf>,
    #[command(flatten)]
    pub flags: SampleFlags,
    #[arg(long, value_enum, default_value = "both")]
    pub sector: SectorArg,
    /// Lift the dimension cap.
    #[arg(long)]
    pub force: bool,
    /// Absolute degeneracy tolerance (default relative 1e-10).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Spectrum record to write; a `.levels.csv` with multiplicities goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bin")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Figure preset: 1, 2, 3, 4, 5, s1, s2 or s3.
    #[arg(long, conflicts_with_all = ["config", "input", "fixture"])]
    pub figure: Option<String>,
    /// Run configuration (JSON).
    #[arg(long, conflicts_with_all = ["input", "fixture"])]
    pub config: Option<PathBuf>,
    /// Spectrum record files of one (N, K, scheme) cell.
    #[arg(long, num_args = 1.., conflicts_with = "fixture")]
    pub input: Vec<PathBuf>,
    /// Fixture realization to diagonalize and analyze.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Replace the preset's N values.
    #[arg(long)]
    pub n: Option<u32>,
    /// Drop preset N values above this.
    #[arg(long)]
    pub max_n: Option<u32>,
    /// Realizations per cell instead of the preset's eigenvalue budget.
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Preset file replacing the built-in one.
    #[arg(long)]
    pub presets: Option<PathBuf>,
    /// Inverse temperatures for spectra and fixture inputs.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub beta: Vec<f64>,
    /// Filter strengths for h; empty disables h.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Number-variance windows in mean spacings.
    #[arg(long, value_delimiter = ',')]
    pub windows: Vec<f64>,
    /// Histogram bin width for P(s) and P(r).
    #[arg(long, default_value_t = 0.1)]
    pub bin_width: f64,
    /// Lift the dimension cap for fixture inputs.
    #[arg(long)]
    pub force: bool,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RmtArgs {
    #[arg(long, default_value_t = 1000)]
    pub dim: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 20_221_017)]
    pub seed: u64,
}

/// Command output: lines for stdout and for stderr.
#[derive(Debug, Default)]
pub struct Report {
    pub out: String,
    pub err: String,
}

impl Report {
    fn line(&mut self, s: impl AsRef<str>) {
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }
}

fn gib(bytes: u128) -> f64 {
    bytes as f64 / (1u64 << 30) as f64
}

fn cap_error(n: u32, dim: usize, cap: usize) -> Error {
    let bytes = (dim as u128).pow(2) * 16;
    Error::ResourceCap(format!(
        "N={n} needs dense matrices of dimension {dim} (about {:.1} GiB each as complex f64, cap {cap}); refusing without --force",
        gib(bytes)
    ))
}

fn sample_cmd(a: &SampleArgs) -> Result<Report> {
    let cs = a.flags.coupling_set()?;
    let fx = Fixture::from_coupling_set(&cs);
    let (plus, minus) = cs.sign_counts();
    let mut r = Report::default();
    let summary = format!("N={} K={} C={:?} (+:{plus} -:{minus})", cs.n(), cs.k(), cs.normalization());
    match &a.out {
        Some(path) => {
            fx.write(path)?;
            r.line(summary);
        }
        None => {
            r.out = fx.to_text();
            r.err = summary + "\n";
        }
    }
    Ok(r)
}

fn levels_csv(record: &SpectrumRecord) -> String {
    let mut s = String::from("value,multiplicity\n");
    for l in &record.multiplicities {
        let _ = writeln!(s, "{:?},{}", l.value, l.multiplicity);
    }
    s
}

fn multiplicity_summary(levels: &[syk_core::Level]) -> String {
    let mut counts = std::collections::BTreeMap::new();
    for l in levels {
        *counts.entry(l.multiplicity).or_insert(0usize) += 1;
    }
    counts.iter().map(|(m, c)| format!("{c}x{m}")).collect::<Vec<_>>().join(" ")
}

fn spectrum_cmd(a: &SpectrumArgs) -> Result<Report> {
    let cs = match &a.fixture {
        Some(p) => Fixture::read(p)?.to_coupling_set()?,
        None => a.flags.coupling_set()?,
    };
    let n = cs.n();
    let full = 1usize << (n / 2);
    let dim = match a.sector {
        SectorArg::Full => full,
        _ => full / 2,
    };
    let cap = if a.force { usize::MAX } else { DEFAULT_DIM_CAP };
    if dim > cap {
        return Err(cap_error(n, dim, cap));
    }
    let mut r = Report::default();
    r.line(format!("N={n} K={} scheme={} seed={}", cs.k(), cs.scheme(), cs.seed()));
    match a.sector {
        SectorArg::Even | SectorArg::Odd => {
            let sector = if a.sector == SectorArg::Even { ParitySector::Even } else { ParitySector::Odd };
            let terms = assemble(&cs)?;
            let eigs = eigenvalues(&build_matrix_capped(&terms, Some(sector), cap)?)?;
            let tol = a.tol.unwrap_or_else(|| syk_core::spectrum::default_tolerance(&eigs));
            let levels = detect_degeneracies(&eigs, tol);
            let want = least_multiplicity(n);
            r.line(format!("{} sector: {} eigenvalues, sum e^2 / {} = {:.12}", sector.name(), eigs.len(), eigs.len(), eigs.iter().map(|e| e * e).sum::<f64>() / eigs.len() as f64));
            r.line(format!("multiplicities: {}", multiplicity_summary(&levels)));
            let class = if levels.iter().all(|l| l.multiplicity == want) { "least degeneracy" } else { "extra degeneracy" };
            r.line(format!("classification: {class} (expected multiplicity {want})"));
            if let Some(out) = &a.out {
                let mut s = String::from("value,multiplicity\n");
                for l in &levels {
                    let _ = writeln!(s, "{:?},{}", l.value, l.multiplicity);
                }
                write_atomic(out, s.as_bytes())?;
                r.line(format!("wrote {}", out.display()));
            }
        }
        SectorArg::Both | SectorArg::Full => {
            let mode = if a.sector == SectorArg::Full { Diagonalization::Full } else { Diagonalization::Sectors };
            let rec = diagonalize(&cs, &SpectrumOptions { mode, dim_cap: cap, degeneracy_tol: a.tol })?;
            if let Some((e, o)) = &rec.sector_eigenvalues {
                r.line(format!("even sector: {} eigenvalues, odd sector: {} eigenvalues", e.len(), o.len()));
                if let Some([le, lo]) = rec.sector_levels() {
                    r.line(format!("even multiplicities: {}", multiplicity_summary(&le)));
                    r.line(format!("odd multiplicities: {}", multiplicity_summary(&lo)));
                }
                if n % 8 == 2 || n % 8 == 6 {
                    let same = spectra_coincide(e, o, SECTOR_MATCH_TOL);
                    let dev = e.iter().zip(o).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                    r.line(format!(
                        "sector spectra {} within {SECTOR_MATCH_TOL:e} (max deviation {dev:.3e})",
                        if same { "coincide" } else { "DIFFER" }
                    ));
                }
            } else {
                r.line(format!("full spectrum: {} eigenvalues", rec.dimension()));
                r.line(format!("multiplicities: {}", multiplicity_summary(&rec.multiplicities)));
            }
            r.line(format!("sum e^2 / 2^{} = {:.12}", n / 2, rec.second_moment()));
            let class = match rec.classify()? {
                DegeneracyClass::LeastDegenerate => "least degeneracy",
                DegeneracyClass::ExtraDegenerate => "extra degeneracy",
            };
            r.line(format!("classification: {class}"));
            if let Some(out) = &a.out {
                let key = RecordKey {
                    n,
                    k: cs.k(),
                    scheme: cs.scheme(),
                    seed: cs.seed(),
                    normalization: a.flags.normalization.into(),
                    mode,
                    degeneracy_tol: a.tol,
                };
                write_atomic(out, &encode_record(&rec, &key.hash(), a.format.into())?)?;
                let levels = out.with_extension("levels.csv");
                write_atomic(&levels, levels_csv(&rec).as_bytes())?;
                r.line(format!("wrote {} and {}", out.display(), levels.display()));
            }
        }
    }
    Ok(r)
}

fn finish(dir: &Path, manifest: &Manifest, r: &mut Report) -> Result<()> {
    let path = manifest.write(dir)?;
    r.line(format!("wrote {} files; manifest {}", manifest.files.len(), path.display()));
    Ok(())
}

fn cell_line(res: &ensemble::EnsembleResult) -> String {
    let mut s = format!(
        "N={} K={} {}: {}/{} done, least-degenerate {:.3}",
        res.n, res.k, res.scheme, res.completed, res.requested, res.least_degenerate.fraction
    );
    if let Some(m) = res.mean_r {
        let _ = write!(s, ", <r> = {:.4} +- {:.4}", m.mean_r, m.stderr);
    }
    if let Some(p) = &res.plateau {
        let _ = write!(s, ", plateau {:.4e} (sum d^2/D^2 {:.4e})", p.time_average.mean, p.predicted.mean);
    }
    s
}

fn flag_config(a: &StatsArgs, n: u32, scheme: CouplingScheme, k: u64, count: usize) -> RunConfig {
    let mut c = RunConfig::new(n, scheme, k, count.max(1), 0);
    c.beta = a.beta.clone();
    c.alpha = a.alpha.clone();
    c.analysis.number_variance = a.windows.clone();
    c.analysis.histogram_bin_width = Some(a.bin_width);
    c.analysis.plateau = Some(PlateauSpec::default());
    c
}

fn stats_cmd(a: &StatsArgs) -> Result<Report> {
    let mut r = Report::default();
    let mut manifest = Manifest::new();
    let dir = &a.out_dir;
    if let Some(fig) = &a.figure {
        let presets = match &a.presets {
            Some(p) => PresetFile::parse(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
            None => PresetFile::builtin(),
        };
        let preset = presets.figure(fig)?;
        let overrides = Overrides { n: a.n, max_n: a.max_n, realizations: a.realizations, base_seed: a.seed, workers: a.workers };
        let grid = build_grid(preset, &overrides)?;
        r.err.push_str(&format!("figure {fig}: {} ({} cells)\n", preset.description, grid.len()));
        let entries = ensemble::sweep(&grid)?;
        for e in &entries {
            match &e.outcome {
                Ok(res) => r.line(cell_line(res)),
                Err(err) => r.line(format!("N={} K={:?} {}: FAILED: {err}", e.config.n, e.config.k, e.config.scheme)),
            }
        }
        output::write_sweep(dir, &entries, &mut manifest)?;
        if preset.analysis.gap_ratio {
            manifest.emit(dir, "rmt_reference.csv", "rmt-reference", None, output::rmt_reference_csv().as_bytes())?;
        }
    } else if let Some(path) = &a.config {
        let mut cfg = RunConfig::read(path)?;
        if a.workers.is_some() {
            cfg.workers = a.workers;
        }
        let res = ensemble::run(&cfg)?;
        r.line(cell_line(&res));
        manifest.emit(dir, "config.json", "run-config", Some(&cfg.hash()), cfg.to_json_pretty().as_bytes())?;
        output::write_cell(dir, &res, &mut manifest)?;
    } else if !a.input.is_empty() {
        let records = a.input.iter().map(|p| read_record(p).map(|x| x.0)).collect::<Result<Vec<_>>>()?;
        let m = &records[0].meta;
        let cfg = flag_config(a, m.n, m.scheme, m.k, records.len());
        let res = ensemble::summarize_records(&cfg, &records)?;
        r.line(cell_line(&res));
        output::write_cell(dir, &res, &mut manifest)?;
    } else if let Some(path) = &a.fixture {
        let cs = Fixture::read(path)?.to_coupling_set()?;
        let dim = 1usize << (cs.n() / 2 - 1);
        let cap = if a.force { usize::MAX } else { DEFAULT_DIM_CAP };
        if dim > cap {
            return Err(cap_error(cs.n(), dim, cap));
        }
        let rec = diagonalize(&cs, &SpectrumOptions { dim_cap: cap, ..Default::default() })?;
        let mut cfg = flag_config(a, cs.n(), cs.scheme(), cs.k(), 1);
        cfg.analysis.plateau = None;
        let res = ensemble::summarize_records(&cfg, &[rec])?;
        r.line(cell_line(&res));
        output::write_cell(dir, &res, &mut manifest)?;
    } else {
        return Err(Error::Usage("stats needs one of --figure, --config, --input or --fixture".into()));
    }
    finish(dir, &manifest, &mut r)?;
    Ok(r)
}

fn run_cmd(a: &RunArgs) -> Result<Report> {
    let mut cfg = RunConfig::read(&a.config)?;
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }
    let mut r = Report::default();
    let mut manifest = Manifest::new();
    let res = ensemble::run(&cfg)?;
    r.line(cell_line(&res));
    for f in &res.failures {
        r.err.push_str(&format!("realization {} (seed {}) failed: {}\n", f.index, f.seed, f.error));
    }
    manifest.emit(&a.out_dir, "config.json", "run-config", Some(&cfg.hash()), cfg.to_json_pretty().as_bytes())?;
    output::write_cell(&a.out_dir, &res, &mut manifest)?;
    finish(&a.out_dir, &manifest, &mut r)?;
    Ok(r)
}

fn validate_cmd(a: &ValidateArgs) -> Result<Report> {
    let report = fixture::validate(&a.path)?;
    let mut r = Report::default();
    r.line(report.to_string());
    Ok(r)
}

fn rmt_cmd(a: &RmtArgs) -> Result<Report> {
    let mut r = Report::default();
    r.line("# ensemble mean_r stderr dim samples seed");
    for ens in [RmtEnsemble::Goe, RmtEnsemble::Gue, RmtEnsemble::Gse] {
        let x = sample_mean_r(ens, a.dim, a.samples, a.seed)?;
        r.line(format!("{} {:.6} {:.6} {} {} {}", ens.name(), x.mean_r, x.stderr, x.dim, x.samples, x.seed));
    }
    Ok(r)
}

pub fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Sample(a) => sample_cmd(a),
        Command::Spectrum(a) => spectrum_cmd(a),
        Command::Stats(a) => stats_cmd(a),
        Command::ValidateFixture(a) => validate_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::RmtReference(a) => rmt_cmd(a),
    }
}

/// Parses `args`, runs the command and returns `(exit code, stdout, stderr)`.
pub fn run_with_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { (0, text, String::new()) } else { (1, String::new(), text) };
        }
    };
    match execute(&cli) {
        Ok(r) => (0, r.out, r.err),
        Err(e) => (e.exit_code(), String::new(), format!("error: {e}\n")),
    }
}
