//! Figure presets: which `N`, which `K` multiples, which schemes and
//! temperatures each figure-analog sweep uses. The parameters live in
//! `presets/figures.json`.

use std::collections::BTreeMap;

use serde::Deserialize;
use syk_core::model::n_total;
use syk_core::CouplingScheme;

use crate::config::{even_k, AnalysisSpec, RunConfig};
use crate::error::{Error, Result};

pub const BUILTIN: &str = include_str!("../presets/figures.json");

pub const FIGURES: [&str; 8] = ["1", "2", "3", "4", "5", "s1", "s2", "s3"];

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigurePreset {
    pub description: String,
    pub n: Vec<u32>,
    /// `K = multiple · N`, made even for binary couplings.
    pub k_multiples: Vec<f64>,
    pub schemes: Vec<String>,
    /// Adds one dense Gaussian cell per `N`.
    #[serde(default)]
    pub dense: bool,
    #[serde(default)]
    pub eigenvalue_budget: Option<u64>,
    #[serde(default)]
    pub n_realizations: Option<usize>,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetFile {
    pub schema_version: u32,
    pub figures: BTreeMap<String, FigurePreset>,
}

impl PresetFile {
    pub fn parse(text: &str) -> Result<PresetFile> {
        let p: PresetFile = serde_json::from_str(text)?;
        if p.schema_version != 1 {
            return Err(Error::Config(format!("unsupported preset schema_version {}", p.schema_version)));
        }
        Ok(p)
    }

    pub fn builtin() -> PresetFile {
        PresetFile::parse(BUILTIN).expect("shipped presets parse")
    }

    pub fn figure(&self, name: &str) -> Result<&FigurePreset> {
        self.figures
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown figure '{name}' (known: {})", FIGURES.join(", "))))
    }
}

/// Command-line adjustments to a preset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    /// Replaces the preset's `N` list.
    pub n: Option<u32>,
    /// Drops `N` above this value.
    pub max_n: Option<u32>,
    /// Fixed realization count instead of the preset's budget.
    pub realizations: Option<usize>,
    pub base_seed: u64,
    pub workers: Option<usize>,
}

/// `K` for a multiple of `N`, at least 1 (2 for binary) and at most `N_total`.
pub fn k_for(n: u32, multiple: f64, scheme: CouplingScheme) -> Result<u64> {
    let total = n_total(n)?;
    let k = ((multiple * n as f64).round() as u64).clamp(1, total);
    Ok(match scheme {
        CouplingScheme::BinarySparse => even_k(k, total),
        _ => k,
    })
}

/// One configuration per `(N, scheme, K)` cell, in that nesting order.
pub fn build_grid(preset: &FigurePreset, o: &Overrides) -> Result<Vec<RunConfig>> {
    let ns: Vec<u32> = match o.n {
        Some(n) => vec![n],
        None => preset.n.iter().copied().filter(|&n| o.max_n.is_none_or(|m| n <= m)).collect(),
    };
    if ns.is_empty() {
        return Err(Error::Config("no N left after applying --max-n".into()));
    }
    let schemes: Vec<CouplingScheme> = preset.schemes.iter().map(|s| s.parse()).collect::<std::result::Result<_, _>>()?;
    let mut grid = Vec::new();
    for &n in &ns {
        let mut cells: Vec<(CouplingScheme, u64)> = Vec::new();
        for &scheme in &schemes {
            for &m in &preset.k_multiples {
                let k = k_for(n, m, scheme)?;
                if !cells.contains(&(scheme, k)) {
                    cells.push((scheme, k));
                }
            }
        }
        if preset.dense {
            cells.push((CouplingScheme::GaussianDense, n_total(n)?));
        }
        for (scheme, k) in cells {
            let mut c = RunConfig::new(n, scheme, k, 1, o.base_seed);
            match (o.realizations, preset.n_realizations, preset.eigenvalue_budget) {
                (Some(r), _, _) | (None, Some(r), _) => c.n_realizations = Some(r),
                (None, None, Some(b)) => {
                    c.n_realizations = None;
                    c.eigenvalue_budget = Some(b);
                }
                (None, None, None) => return Err(Error::Config("preset sets neither a budget nor a realization count".into())),
            }
            if let Some(beta) = &preset.beta {
                c.beta = beta.clone();
            }
            c.alpha = preset.alpha.clone();
            c.analysis = preset.analysis.clone();
            c.workers = o.workers;
            c.validate()?;
            grid.push(c);
        }
    }
    Ok(grid)
}
