//! Plot-ready datasets: CSV tables with JSON sidecars and a manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use syk_core::statistics::{reference, RmtEnsemble};

use crate::ensemble::{CurveData, EnsembleResult, HistogramData, SweepEntry};
use crate::error::Result;
use crate::persist::write_atomic;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifestEntry {
    /// Relative to the output directory.
    pub path: String,
    pub kind: String,
    pub config_hash: Option<String>,
    pub sha256: String,
}

/// Files written under one output directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub code_version: &'static str,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new() -> Manifest {
        Manifest { schema_version: 1, code_version: crate::ensemble::CODE_VERSION, files: Vec::new() }
    }

    /// Writes `bytes` to `dir/name` and lists it.
    pub fn emit(&mut self, dir: &Path, name: &str, kind: &str, config_hash: Option<&str>, bytes: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        write_atomic(&path, bytes)?;
        self.files.push(ManifestEntry {
            path: name.into(),
            kind: kind.into(),
            config_hash: config_hash.map(Into::into),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(path)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        write_atomic(&path, serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok(path)
    }
}

pub fn curve_csv(c: &CurveData) -> String {
    let mut s = String::from("t,value,stderr,n_realizations\n");
    for i in 0..c.times.len() {
        let _ = writeln!(s, "{:?},{:?},{:?},{}", c.times[i], c.values[i], c.stderr[i], c.n_realizations);
    }
    s
}

pub fn histogram_csv(h: &HistogramData) -> String {
    let mut s = String::from("bin_left,bin_right,density\n");
    for (l, d) in h.left_edges.iter().zip(&h.density) {
        let _ = writeln!(s, "{:?},{:?},{:?}", l, l + h.bin_width, d);
    }
    s
}

pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn f(v: f64) -> String {
    format!("{v:?}")
}

/// `N{N}_K{K}_{scheme}`.
pub fn cell_stem(r: &EnsembleResult) -> String {
    format!("N{}_K{}_{}", r.n, r.k, r.scheme)
}

/// Result JSON plus one CSV (and sidecar) per curve, histogram and `Σ²`.
pub fn write_cell(dir: &Path, r: &EnsembleResult, manifest: &mut Manifest) -> Result<()> {
    let stem = cell_stem(r);
    let hash = r.provenance.config_hash.as_str();
    manifest.emit(dir, &format!("{stem}_result.json"), "ensemble-result", Some(hash), r.to_json().as_bytes())?;
    let curves = r.sff_g.iter().map(|c| ("g", c)).chain(r.sff_h.iter().map(|c| ("h", c)));
    for (kind, c) in curves {
        let name = match c.alpha {
            Some(a) => format!("{stem}_{kind}_alpha{a}_beta{}", c.beta),
            None => format!("{stem}_{kind}_beta{}", c.beta),
        };
        manifest.emit(dir, &format!("{name}.csv"), &format!("sff-{kind}"), Some(hash), curve_csv(c).as_bytes())?;
        let sidecar = json!({
            "kind": kind, "n": r.n, "k": r.k, "scheme": r.scheme,
            "beta": c.beta, "alpha": c.alpha, "n_realizations": c.n_realizations,
            "config_hash": hash,
        });
        manifest.emit(dir, &format!("{name}.json"), "sidecar", Some(hash), serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
    }
    for (kind, h) in [("spacing", &r.spacing_histogram), ("ratio", &r.ratio_histogram)] {
        if let Some(h) = h {
            manifest.emit(dir, &format!("{stem}_P_{kind}.csv"), &format!("{kind}-histogram"), Some(hash), histogram_csv(h).as_bytes())?;
        }
    }
    if let Some(nv) = &r.number_variance {
        let rows: Vec<Vec<String>> = (0..nv.windows.len())
            .map(|i| vec![f(nv.windows[i]), f(nv.values[i]), f(nv.stderr[i]), nv.spectra.to_string()])
            .collect();
        let text = table_csv(&["window", "sigma2", "stderr", "n_spectra"], &rows);
        manifest.emit(dir, &format!("{stem}_number_variance.csv"), "number-variance", Some(hash), text.as_bytes())?;
    }
    Ok(())
}

/// Rows for the combined `⟨r⟩` table.
pub fn mean_r_rows(entries: &[SweepEntry]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for e in entries {
        if let Ok(r) = &e.outcome {
            let (m, se, n) = r.mean_r.map_or((f64::NAN, f64::NAN, 0), |m| (m.mean_r, m.stderr, m.realizations));
            let (ma, sa) = r.mean_r_all.map_or((f64::NAN, f64::NAN), |m| (m.mean_r, m.stderr));
            rows.push(vec![r.n.to_string(), r.k.to_string(), r.scheme.clone(), f(m), f(se), n.to_string(), f(ma), f(sa)]);
        }
    }
    rows
}

pub const MEAN_R_HEADER: [&str; 8] = ["N", "K", "scheme", "mean_r", "stderr", "realizations", "mean_r_all", "stderr_all"];

pub fn degeneracy_rows(entries: &[SweepEntry]) -> Vec<Vec<String>> {
    entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().ok())
        .map(|r| {
            let d = r.least_degenerate;
            vec![r.n.to_string(), r.k.to_string(), r.scheme.clone(), f(d.fraction), f(d.stderr), d.count.to_string(), d.total.to_string()]
        })
        .collect()
}

pub const DEGENERACY_HEADER: [&str; 7] = ["N", "K", "scheme", "fraction", "stderr", "least_degenerate", "realizations"];

pub fn plateau_rows(entries: &[SweepEntry]) -> Vec<Vec<String>> {
    entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().ok())
        .filter_map(|r| {
            let p = r.plateau.as_ref()?;
            Some(vec![
                r.n.to_string(),
                r.k.to_string(),
                r.scheme.clone(),
                f(p.time_average.mean),
                f(p.time_average.stderr),
                f(p.predicted.mean),
                f(p.predicted.stderr),
            ])
        })
        .collect()
}

pub const PLATEAU_HEADER: [&str; 7] = ["N", "K", "scheme", "time_average", "stderr", "sum_d2_over_D2", "stderr_predicted"];

/// Pinned `⟨r⟩` of every reference ensemble.
pub fn rmt_reference_csv() -> String {
    let mut rows = Vec::new();
    for e in RmtEnsemble::ALL {
        if let Ok(r) = reference(e) {
            rows.push(vec![e.name().to_string(), f(r.mean_r), f(r.stderr)]);
        }
    }
    table_csv(&["ensemble", "mean_r", "stderr"], &rows)
}

/// Per-cell files for every successful entry, combined tables, and a
/// `failures.json` listing configurations that did not run.
pub fn write_sweep(dir: &Path, entries: &[SweepEntry], manifest: &mut Manifest) -> Result<()> {
    let mut failed = Vec::new();
    for e in entries {
        match &e.outcome {
            Ok(r) => write_cell(dir, r, manifest)?,
            Err(err) => failed.push(json!({"config": e.config, "error": err.to_string()})),
        }
    }
    manifest.emit(dir, "mean_r.csv", "mean-r-table", None, table_csv(&MEAN_R_HEADER, &mean_r_rows(entries)).as_bytes())?;
    manifest.emit(dir, "degeneracy.csv", "degeneracy-table", None, table_csv(&DEGENERACY_HEADER, &degeneracy_rows(entries)).as_bytes())?;
    let plateau = plateau_rows(entries);
    if !plateau.is_empty() {
        manifest.emit(dir, "plateau.csv", "plateau-table", None, table_csv(&PLATEAU_HEADER, &plateau).as_bytes())?;
    }
    if !failed.is_empty() {
        manifest.emit(dir, "failures.json", "failures", None, serde_json::to_string_pretty(&failed)?.as_bytes())?;
    }
    Ok(())
}
