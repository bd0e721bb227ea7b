//! Text format for a single coupling realization.
//!
//! ```text
//! # comment
//! N=32
//! C=1            # or C=auto for 1/sqrt(sum J^2)
//! scheme=binary  # optional
//! seed=7         # optional
//! + 1 2 3 4
//! - 1 6 10 21
//! - 2 5 9 11 0.37   # optional magnitude column
//! ```
//!
//! Indices are 1-based and strictly increasing. Without a magnitude column
//! the coupling is the sign times one.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use syk_core::{CouplingScheme, CouplingSet, Quartet};

use crate::error::{Error, Result};
use crate::persist::write_atomic;

/// `C` as written in the header.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixtureNormalization {
    Value(f64),
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureTerm {
    pub line: usize,
    pub quartet: Quartet,
    pub coupling: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub n: u32,
    pub normalization: FixtureNormalization,
    pub scheme: Option<CouplingScheme>,
    pub seed: Option<u64>,
    pub terms: Vec<FixtureTerm>,
}

/// Shipped realizations: name, file contents, expected `(N, K, +, -)`.
pub const SHIPPED: [(&str, &str, (u32, usize, usize, usize)); 2] = [
    ("n32_k30", include_str!("../fixtures/n32_k30.txt"), (32, 30, 15, 15)),
    ("n34_k36", include_str!("../fixtures/n34_k36.txt"), (34, 36, 18, 18)),
];

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

impl Fixture {
    pub fn parse(text: &str, path: &Path) -> Result<Fixture> {
        let err = |line: usize, message: String| Error::Fixture { path: path.to_path_buf(), line, message };
        let mut n = None;
        let mut normalization = None;
        let mut scheme = None;
        let mut seed = None;
        let mut raw: Vec<(usize, [u32; 4], f64)> = Vec::new();

        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = strip_comment(line);
            if line.is_empty() {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "N" => {
                        let v: u32 = value.parse().map_err(|_| err(lineno, format!("bad N value '{value}'")))?;
                        n = Some(v);
                    }
                    "C" => {
                        normalization = Some(if value == "auto" {
                            FixtureNormalization::Auto
                        } else {
                            let c: f64 = value.parse().map_err(|_| err(lineno, format!("bad C value '{value}'")))?;
                            if !(c > 0.0 && c.is_finite()) {
                                return Err(err(lineno, format!("C must be positive, got {value}")));
                            }
                            FixtureNormalization::Value(c)
                        });
                    }
                    "scheme" => {
                        scheme = Some(value.parse().map_err(|_| err(lineno, format!("unknown scheme '{value}'")))?);
                    }
                    "seed" => {
                        seed = Some(value.parse().map_err(|_| err(lineno, format!("bad seed '{value}'")))?);
                    }
                    _ => return Err(err(lineno, format!("unknown header '{key}'"))),
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 && fields.len() != 6 {
                return Err(err(lineno, format!("expected '<sign> a b c d [magnitude]', got '{line}'")));
            }
            let sign = match fields[0] {
                "+" => 1.0,
                "-" | "\u{2212}" => -1.0,
                s => return Err(err(lineno, format!("sign must be + or -, got '{s}'"))),
            };
            let mut idx = [0u32; 4];
            for (slot, f) in idx.iter_mut().zip(&fields[1..5]) {
                *slot = f.parse().map_err(|_| err(lineno, format!("bad index '{f}'")))?;
            }
            let magnitude = match fields.get(5) {
                Some(m) => {
                    let v: f64 = m.parse().map_err(|_| err(lineno, format!("bad magnitude '{m}'")))?;
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(err(lineno, format!("magnitude must be positive, got {m}")));
                    }
                    v
                }
                None => 1.0,
            };
            raw.push((lineno, idx, sign * magnitude));
        }

        let n = n.ok_or_else(|| err(0, "missing 'N=' header".into()))?;
        if n % 2 != 0 || n < syk_core::model::MIN_MAJORANAS || n > syk_core::majorana::MAX_MAJORANAS {
            return Err(err(0, format!("N must be even and in 8..=128, got {n}")));
        }
        let normalization = normalization.ok_or_else(|| err(0, "missing 'C=' header".into()))?;

        let mut seen: HashMap<Quartet, usize> = HashMap::new();
        let mut terms = Vec::with_capacity(raw.len());
        for (lineno, idx, coupling) in raw {
            if let Some(&bad) = idx.iter().find(|&&a| a == 0 || a > n) {
                return Err(err(lineno, format!("index {bad} outside 1..={n}")));
            }
            let quartet = Quartet::new(idx[0], idx[1], idx[2], idx[3])
                .map_err(|_| err(lineno, format!("indices {idx:?} are not strictly increasing")))?;
            if let Some(first) = seen.insert(quartet, lineno) {
                return Err(err(lineno, format!("duplicate term {quartet} (first on line {first})")));
            }
            terms.push(FixtureTerm { line: lineno, quartet, coupling });
        }
        if terms.is_empty() {
            return Err(err(0, "no terms".into()));
        }
        Ok(Fixture { n, normalization, scheme, seed, terms })
    }

    pub fn read(path: &Path) -> Result<Fixture> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Fixture::parse(&text, path)
    }

    pub fn k(&self) -> usize {
        self.terms.len()
    }

    pub fn sign_counts(&self) -> (usize, usize) {
        let plus = self.terms.iter().filter(|t| t.coupling > 0.0).count();
        (plus, self.terms.len() - plus)
    }

    /// Declared scheme, or the one implied by the couplings.
    pub fn inferred_scheme(&self) -> CouplingScheme {
        if let Some(s) = self.scheme {
            return s;
        }
        let unit = self.terms.iter().all(|t| t.coupling.abs() == 1.0);
        let positive = self.terms.iter().all(|t| t.coupling > 0.0);
        match (unit, positive) {
            (true, true) => CouplingScheme::UnarySparse,
            (true, false) => CouplingScheme::BinarySparse,
            _ => CouplingScheme::GaussianSparse,
        }
    }

    pub fn to_coupling_set(&self) -> Result<CouplingSet> {
        let c = match self.normalization {
            FixtureNormalization::Value(c) => Some(c),
            FixtureNormalization::Auto => None,
        };
        let couplings = self.terms.iter().map(|t| (t.quartet, t.coupling)).collect();
        Ok(CouplingSet::from_parts(self.n, self.inferred_scheme(), self.seed.unwrap_or(0), couplings, c)?)
    }

    /// Shipped fixture with the same `N` and terms, if any.
    pub fn shipped_match(&self) -> Option<&'static str> {
        let mut mine: Vec<(Quartet, f64)> = self.terms.iter().map(|t| (t.quartet, t.coupling)).collect();
        mine.sort_by(|a, b| a.0.cmp(&b.0));
        SHIPPED.iter().find_map(|(name, text, _)| {
            let f = Fixture::parse(text, Path::new(name)).ok()?;
            let mut theirs: Vec<(Quartet, f64)> = f.terms.iter().map(|t| (t.quartet, t.coupling)).collect();
            theirs.sort_by(|a, b| a.0.cmp(&b.0));
            (f.n == self.n && theirs == mine).then_some(*name)
        })
    }

    pub fn from_coupling_set(cs: &CouplingSet) -> Fixture {
        Fixture {
            n: cs.n(),
            normalization: FixtureNormalization::Value(cs.normalization()),
            scheme: Some(cs.scheme()),
            seed: Some(cs.seed()),
            terms: cs
                .couplings()
                .iter()
                .enumerate()
                .map(|(i, &(quartet, coupling))| FixtureTerm { line: i + 1, quartet, coupling })
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let (plus, minus) = self.sign_counts();
        let _ = writeln!(s, "# K={} (+:{plus} -:{minus})", self.k());
        let _ = writeln!(s, "N={}", self.n);
        match self.normalization {
            FixtureNormalization::Value(c) => {
                let _ = writeln!(s, "C={c:?}");
            }
            FixtureNormalization::Auto => s.push_str("C=auto\n"),
        }
        if let Some(scheme) = self.scheme {
            let _ = writeln!(s, "scheme={scheme}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed={seed}");
        }
        for t in &self.terms {
            let [a, b, c, d] = t.quartet.indices();
            let sign = if t.coupling > 0.0 { '+' } else { '-' };
            if t.coupling.abs() == 1.0 {
                let _ = writeln!(s, "{sign} {a} {b} {c} {d}");
            } else {
                let _ = writeln!(s, "{sign} {a} {b} {c} {d} {:?}", t.coupling.abs());
            }
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureReport {
    pub path: PathBuf,
    pub n: u32,
    pub k: usize,
    pub plus: usize,
    pub minus: usize,
    pub scheme: CouplingScheme,
    pub shipped: Option<&'static str>,
}

impl fmt::Display for FixtureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OK: N={} K={} (+:{} \u{2212}:{})", self.n, self.k, self.plus, self.minus)
    }
}

/// Parses and checks ordering, bounds, duplicates and the scheme's sign rules.
/// A shipped realization must also reproduce its recorded counts.
pub fn validate(path: &Path) -> Result<FixtureReport> {
    let fixture = Fixture::read(path)?;
    let cs = fixture
        .to_coupling_set()
        .map_err(|e| Error::Fixture { path: path.to_path_buf(), line: 0, message: e.to_string() })?;
    let (plus, minus) = fixture.sign_counts();
    let shipped = fixture.shipped_match();
    if let Some(name) = shipped {
        let (_, _, want) = SHIPPED.iter().find(|s| s.0 == name).expect("listed");
        if *want != (fixture.n, fixture.k(), plus, minus) {
            return Err(Error::Fixture {
                path: path.to_path_buf(),
                line: 0,
                message: format!("shipped fixture {name} should have (N, K, +, -) = {want:?}"),
            });
        }
    }
    Ok(FixtureReport { path: path.to_path_buf(), n: cs.n(), k: fixture.k(), plus, minus, scheme: cs.scheme(), shipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Fixture> {
        Fixture::parse(text, Path::new("t.txt"))
    }

    #[test]
    fn shipped_fixtures_have_recorded_counts() {
        for (name, text, (n, k, plus, minus)) in SHIPPED {
            let f = Fixture::parse(text, Path::new(name)).unwrap();
            assert_eq!((f.n, f.k()), (n, k));
            assert_eq!(f.sign_counts(), (plus, minus));
            assert_eq!(f.inferred_scheme(), CouplingScheme::BinarySparse);
            assert_eq!(f.shipped_match(), Some(name));
            let cs = f.to_coupling_set().unwrap();
            assert_eq!(cs.normalization(), 1.0);
        }
    }

    #[test]
    fn duplicate_names_both_lines() {
        let e = parse("N=8\nC=1\n+ 1 2 3 4\n- 5 6 7 8\n- 1 2 3 4\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains(":5:") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        for (text, line) in [
            ("N=8\nC=1\n+ 1 2 3\n", 3),
            ("N=8\nC=1\n\n* 1 2 3 4\n", 4),
            ("N=8\nC=1\n+ 1 3 2 4\n", 3),
            ("N=8\nC=1\n+ 1 2 3 9\n", 3),
            ("N=8\nC=x\n", 2),
            ("N=8\nC=1\nfoo=1\n", 3),
        ] {
            match parse(text) {
                Err(Error::Fixture { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(parse("C=1\n+ 1 2 3 4\n").is_err());
        assert!(parse("N=9\nC=1\n+ 1 2 3 4\n").is_err());
    }

    #[test]
    fn round_trip_preserves_couplings() {
        for scheme in [CouplingScheme::BinarySparse, CouplingScheme::UnarySparse, CouplingScheme::GaussianSparse] {
            let cs = syk_core::sample(scheme, 12, 20, 5, Default::default()).unwrap();
            let text = Fixture::from_coupling_set(&cs).to_text();
            let back = parse(&text).unwrap().to_coupling_set().unwrap();
            assert_eq!(back, cs);
        }
    }

    #[test]
    fn unbalanced_binary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.txt");
        std::fs::write(&p, "N=8\nC=1\n+ 1 2 3 4\n- 1 2 3 5\n- 1 2 3 6\n+ 1 2 3 7\n- 1 2 3 8\n- 1 2 4 5\n").unwrap();
        assert!(validate(&p).is_err());
        std::fs::write(&p, "N=8\nC=auto\n+ 1 2 3 4\n- 1 2 3 5\n").unwrap();
        let r = validate(&p).unwrap();
        assert_eq!(r.to_string(), "OK: N=8 K=2 (+:1 \u{2212}:1)");
    }
}
