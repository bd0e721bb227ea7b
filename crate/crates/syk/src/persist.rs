//! One file per realization: a header line, a JSON metadata line, then the
//! eigenvalues as little-endian `f64` (even sector, then odd) or as CSV rows.
//!
//! File stem: `N{N}_K{K}_{scheme}_s{seed}`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use syk_core::{CouplingScheme, Diagonalization, Normalization, SpectrumMeta, SpectrumRecord};

use crate::error::{Error, Result};

const MAGIC: &str = "syk-spectrum 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    #[default]
    #[serde(alias = "bin")]
    Binary,
    Csv,
}

impl RecordFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RecordFormat::Binary => "bin",
            RecordFormat::Csv => "csv",
        }
    }
}

/// Everything that determines a realization's spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordKey {
    pub n: u32,
    pub k: u64,
    pub scheme: CouplingScheme,
    pub seed: u64,
    pub normalization: Normalization,
    pub mode: Diagonalization,
    pub degeneracy_tol: Option<f64>,
}

impl RecordKey {
    pub fn file_stem(&self) -> String {
        format!("N{}_K{}_{}_s{}", self.n, self.k, self.scheme, self.seed)
    }

    /// Hex SHA-256 over a canonical rendering of the key.
    pub fn hash(&self) -> String {
        let mode = match self.mode {
            Diagonalization::Sectors => "sectors",
            Diagonalization::Full => "full",
        };
        let tol = match self.degeneracy_tol {
            Some(t) => format!("{:016x}", t.to_bits()),
            None => "default".into(),
        };
        let canonical = format!(
            "n={};k={};scheme={};seed={};norm={};mode={};tol={};v={}",
            self.n,
            self.k,
            self.scheme,
            self.seed,
            self.normalization.name(),
            mode,
            tol,
            MAGIC
        );
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub n: u32,
    pub k: u64,
    pub scheme: String,
    pub seed: u64,
    pub degeneracy_tol: f64,
    /// `[even, odd]` for sector records, `[full]` otherwise.
    pub lengths: Vec<usize>,
    pub hash: String,
}

pub fn record_path(dir: &Path, key: &RecordKey, format: RecordFormat) -> PathBuf {
    dir.join(format!("{}.{}", key.file_stem(), format.extension()))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn blocks(record: &SpectrumRecord) -> Vec<&[f64]> {
    match &record.sector_eigenvalues {
        Some((e, o)) => vec![e.as_slice(), o.as_slice()],
        None => vec![record.eigenvalues.as_slice()],
    }
}

pub fn encode_record(record: &SpectrumRecord, hash: &str, format: RecordFormat) -> Result<Vec<u8>> {
    let blocks = blocks(record);
    let header = RecordHeader {
        n: record.meta.n,
        k: record.meta.k,
        scheme: record.meta.scheme.name().into(),
        seed: record.meta.seed,
        degeneracy_tol: record.meta.degeneracy_tol,
        lengths: blocks.iter().map(|b| b.len()).collect(),
        hash: hash.into(),
    };
    let json = serde_json::to_string(&header)?;
    let mut out = Vec::new();
    match format {
        RecordFormat::Binary => {
            out.extend_from_slice(MAGIC.as_bytes());
            out.push(b'\n');
            out.extend_from_slice(json.as_bytes());
            out.push(b'\n');
            for v in blocks.iter().flat_map(|b| b.iter()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        RecordFormat::Csv => {
            use std::fmt::Write as _;
            let mut s = format!("# {MAGIC}\n# {json}\nsector,value\n");
            let names: &[&str] = if blocks.len() == 2 { &["even", "odd"] } else { &["full"] };
            for (name, b) in names.iter().zip(&blocks) {
                for v in b.iter() {
                    let _ = writeln!(s, "{name},{v:?}");
                }
            }
            out = s.into_bytes();
        }
    }
    Ok(out)
}

pub fn write_record(dir: &Path, key: &RecordKey, record: &SpectrumRecord, format: RecordFormat) -> Result<PathBuf> {
    let path = record_path(dir, key, format);
    write_atomic(&path, &encode_record(record, &key.hash(), format)?)?;
    Ok(path)
}

fn bad(path: &Path, message: impl Into<String>) -> Error {
    Error::SpectrumFile { path: path.to_path_buf(), message: message.into() }
}

fn split_line<'a>(bytes: &'a [u8], path: &Path) -> Result<(&'a [u8], &'a [u8])> {
    let i = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad(path, "truncated header"))?;
    Ok((&bytes[..i], &bytes[i + 1..]))
}

/// Reads a record in either format, detected from the first line.
pub fn read_record(path: &Path) -> Result<(SpectrumRecord, RecordHeader)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (first, rest) = split_line(&bytes, path)?;
    let (header, mut values): (RecordHeader, Vec<f64>) = if first == MAGIC.as_bytes() {
        let (json, data) = split_line(rest, path)?;
        let header: RecordHeader = serde_json::from_slice(json).map_err(|e| bad(path, e.to_string()))?;
        if data.len() % 8 != 0 {
            return Err(bad(path, "payload is not a whole number of f64 values"));
        }
        let values = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        (header, values)
    } else if first == format!("# {MAGIC}").as_bytes() {
        let text = std::str::from_utf8(rest).map_err(|_| bad(path, "not UTF-8"))?;
        let mut lines = text.lines();
        let json = lines.next().and_then(|l| l.strip_prefix("# ")).ok_or_else(|| bad(path, "missing metadata line"))?;
        let header: RecordHeader = serde_json::from_str(json).map_err(|e| bad(path, e.to_string()))?;
        if lines.next() != Some("sector,value") {
            return Err(bad(path, "missing column header"));
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let v = line
                .split_once(',')
                .and_then(|(_, v)| v.parse::<f64>().ok())
                .ok_or_else(|| bad(path, format!("bad row {}", i + 4)))?;
            values.push(v);
        }
        (header, values)
    } else {
        return Err(bad(path, "unrecognized header"));
    };

    if header.lengths.iter().sum::<usize>() != values.len() || !(1..=2).contains(&header.lengths.len()) {
        return Err(bad(path, "block lengths disagree with the payload"));
    }
    let scheme: CouplingScheme = header.scheme.parse().map_err(|_| bad(path, "unknown scheme"))?;
    let meta = SpectrumMeta { n: header.n, k: header.k, scheme, seed: header.seed, degeneracy_tol: header.degeneracy_tol };
    let record = if header.lengths.len() == 2 {
        let odd = values.split_off(header.lengths[0]);
        SpectrumRecord::from_sectors(meta, values, odd, Some(header.degeneracy_tol))
    } else {
        SpectrumRecord::from_full(meta, values, Some(header.degeneracy_tol))
    };
    if record.eigenvalues.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(bad(path, "eigenvalues are not sorted"));
    }
    Ok((record, header))
}

/// The persisted record for `key`, if present; a hash mismatch is an error.
pub fn load_if_present(dir: &Path, key: &RecordKey, format: RecordFormat) -> Result<Option<SpectrumRecord>> {
    let path = record_path(dir, key, format);
    if !path.exists() {
        return Ok(None);
    }
    let (record, header) = read_record(&path)?;
    let expected = key.hash();
    if header.hash != expected {
        return Err(Error::HashMismatch { path, found: header.hash, expected });
    }
    Ok(Some(record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use syk_core::{diagonalize, sample_binary, SpectrumOptions};

    fn key(seed: u64, mode: Diagonalization) -> RecordKey {
        RecordKey {
            n: 10,
            k: 20,
            scheme: CouplingScheme::BinarySparse,
            seed,
            normalization: Normalization::PerRealization,
            mode,
            degeneracy_tol: None,
        }
    }

    #[test]
    fn both_formats_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        for mode in [Diagonalization::Sectors, Diagonalization::Full] {
            let cs = sample_binary(10, 20, 3).unwrap();
            let rec = diagonalize(&cs, &SpectrumOptions { mode, ..Default::default() }).unwrap();
            for format in [RecordFormat::Binary, RecordFormat::Csv] {
                let k = key(3, mode);
                let path = write_record(dir.path(), &k, &rec, format).unwrap();
                assert_eq!(path.file_name().unwrap().to_str().unwrap(), format!("N10_K20_binary_s3.{}", format.extension()));
                let back = load_if_present(dir.path(), &k, format).unwrap().unwrap();
                assert_eq!(back, rec);
                std::fs::remove_file(path).unwrap();
            }
        }
    }

    #[test]
    fn hash_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let cs = sample_binary(10, 20, 3).unwrap();
        let rec = diagonalize(&cs, &SpectrumOptions::default()).unwrap();
        let k = key(3, Diagonalization::Sectors);
        write_record(dir.path(), &k, &rec, RecordFormat::Binary).unwrap();
        let other = RecordKey { normalization: Normalization::Expected, ..k };
        assert!(matches!(load_if_present(dir.path(), &other, RecordFormat::Binary), Err(Error::HashMismatch { .. })));
        assert!(load_if_present(dir.path(), &key(4, Diagonalization::Sectors), RecordFormat::Binary).unwrap().is_none());
    }

    #[test]
    fn truncated_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cs = sample_binary(10, 20, 3).unwrap();
        let rec = diagonalize(&cs, &SpectrumOptions::default()).unwrap();
        let path = write_record(dir.path(), &key(3, Diagonalization::Sectors), &rec, RecordFormat::Binary).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(read_record(&path).is_err());
        std::fs::write(&path, b"garbage\n").unwrap();
        assert!(read_record(&path).is_err());
    }
}
