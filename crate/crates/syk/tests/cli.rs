use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn syk(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_syk")).args(args).output().expect("spawn syk");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_writes_balanced_binary_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.txt");
    let (code, stdout, _) = syk(&["sample", "--n", "16", "--k", "32", "--scheme", "binary", "--seed", "7", "--out", s(&out)]);
    assert_eq!(code, 0);
    assert!(stdout.contains("K=32") && stdout.contains("(+:16 -:16)"), "{stdout}");
    let text = fs::read_to_string(&out).unwrap();
    let terms: Vec<&str> = text.lines().filter(|l| l.starts_with('+') || l.starts_with('-')).collect();
    assert_eq!(terms.len(), 32);
    assert_eq!(terms.iter().filter(|l| l.starts_with('+')).count(), 16);
    let (code, stdout, _) = syk(&["validate-fixture", s(&out)]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("OK: N=16 K=32"), "{stdout}");
}

#[test]
fn sample_is_reproducible_from_the_seed() {
    let a = syk(&["sample", "--n", "12", "--k", "10", "--seed", "5"]);
    let b = syk(&["sample", "--n", "12", "--k", "10", "--seed", "5"]);
    let c = syk(&["sample", "--n", "12", "--k", "10", "--seed", "6"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    assert_ne!(a.1, c.1);
}

#[test]
fn odd_binary_k_is_rejected() {
    let (code, _, stderr) = syk(&["sample", "--n", "16", "--k", "31", "--scheme", "binary"]);
    assert_ne!(code, 0);
    assert!(stderr.contains("K must be even for binary scheme"), "{stderr}");
}

#[test]
fn k_above_n_total_is_rejected() {
    let (code, _, stderr) = syk(&["sample", "--n", "8", "--k", "100"]);
    assert_ne!(code, 0);
    assert!(stderr.contains("exceeds N_total=70"), "{stderr}");
}

#[test]
fn missing_k_is_a_usage_error() {
    let (code, _, stderr) = syk(&["sample", "--n", "8"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("--k or --p"), "{stderr}");
}

#[test]
fn large_fixture_needs_force() {
    let (code, _, stderr) = syk(&["spectrum", "--fixture", s(&fixture("n32_k30.txt"))]);
    assert_eq!(code, 3);
    assert!(stderr.contains("GiB") && stderr.contains("--force"), "{stderr}");
}

fn second_moment(stdout: &str) -> f64 {
    let line = stdout.lines().find(|l| l.starts_with("sum e^2 / 2^")).expect("second-moment line");
    line.rsplit(' ').next().unwrap().parse().unwrap()
}

#[test]
fn spectrum_reports_normalized_sectors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n12.bin");
    let (code, stdout, _) = syk(&["spectrum", "--n", "12", "--k", "24", "--seed", "3", "--out", s(&out)]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("even sector: 32 eigenvalues, odd sector: 32 eigenvalues"), "{stdout}");
    assert!((second_moment(&stdout) - 1.0).abs() < 1e-9);
    assert!(stdout.contains("sum e^2 / 2^6"));
    assert!(out.exists() && dir.path().join("n12.levels.csv").exists());

    // the record feeds back into the statistics command
    let stats = dir.path().join("stats");
    let (code, stdout, stderr) = syk(&["stats", "--input", s(&out), "--out-dir", s(&stats)]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("N=12 K=24 binary: 1/1 done"), "{stdout}");
    assert!(stats.join("manifest.json").exists());
}

#[test]
fn single_sector_and_full_modes() {
    let (code, stdout, _) = syk(&["spectrum", "--n", "12", "--k", "24", "--sector", "even"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("even sector: 32 eigenvalues"), "{stdout}");
    let (code, stdout, _) = syk(&["spectrum", "--n", "12", "--k", "24", "--sector", "full"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("full spectrum: 64 eigenvalues"), "{stdout}");
    assert!((second_moment(&stdout) - 1.0).abs() < 1e-9);
}

#[test]
fn sectors_coincide_for_n14() {
    let (code, stdout, _) = syk(&["spectrum", "--n", "14", "--k", "28", "--seed", "11", "--sector", "both"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("sector spectra coincide"), "{stdout}");
}

#[test]
fn shipped_fixtures_validate() {
    let (code, stdout, _) = syk(&["validate-fixture", s(&fixture("n32_k30.txt"))]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "OK: N=32 K=30 (+:15 \u{2212}:15)");
    let (code, stdout, _) = syk(&["validate-fixture", s(&fixture("n34_k36.txt"))]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "OK: N=34 K=36 (+:18 \u{2212}:18)");
}

#[test]
fn malformed_fixtures_report_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.txt");
    fs::write(&dup, "N=8\nC=0.5\n+ 1 2 3 4\n- 5 6 7 8\n+ 1 2 3 4\n- 1 2 3 5\n").unwrap();
    let (code, _, stderr) = syk(&["validate-fixture", s(&dup)]);
    assert_eq!(code, 2);
    assert!(stderr.contains(":5:") && stderr.contains("duplicate term"), "{stderr}");

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "N=8\nC=0.5\n+ 1 2 3 4\n- 4 3 2 1\n").unwrap();
    let (code, _, stderr) = syk(&["validate-fixture", s(&bad)]);
    assert_eq!(code, 2);
    assert!(stderr.contains(":4:"), "{stderr}");
}

#[test]
fn figure_2_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2");
    let (code, stdout, stderr) =
        syk(&["stats", "--figure", "2", "--max-n", "14", "--realizations", "8", "--out-dir", s(&out)]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("N=14")).count(), 4, "{stdout}");
    let table = fs::read_to_string(out.join("mean_r.csv")).unwrap();
    assert!(table.starts_with("N,K,scheme,mean_r,stderr"), "{table}");
    assert_eq!(table.lines().count(), 5);
    let rmt = fs::read_to_string(out.join("rmt_reference.csv")).unwrap();
    assert!(rmt.contains("GOE") && rmt.contains("GUE"), "{rmt}");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["files"].as_array().unwrap().len() > 4);
}

#[test]
fn figure_3_and_5_write_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3");
    let (code, _, stderr) = syk(&["stats", "--figure", "3", "--n", "14", "--realizations", "4", "--out-dir", s(&out)]);
    assert_eq!(code, 0, "{stderr}");
    let names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert!(names.iter().any(|n| n.contains("_g_beta0") && n.ends_with(".csv")), "{names:?}");

    let out = dir.path().join("fig5");
    let (code, _, stderr) = syk(&["stats", "--figure", "5", "--n", "14", "--realizations", "4", "--out-dir", s(&out)]);
    assert_eq!(code, 0, "{stderr}");
    let names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    let h = names.iter().find(|n| n.contains("_h_alpha1_beta0") && n.ends_with(".csv")).expect("h curve");
    let text = fs::read_to_string(out.join(h)).unwrap();
    assert!(text.starts_with("t,value,stderr,n_realizations"));
    assert_eq!(text.lines().count(), 401);
}

#[test]
fn run_reuses_persisted_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let spectra = dir.path().join("spectra");
    fs::create_dir(&spectra).unwrap();
    let cfg = dir.path().join("run.json");
    let json = serde_json::json!({
        "schema_version": 1, "n": 12, "scheme": "binary-sparse", "k": 24,
        "n_realizations": 6, "base_seed": 9,
        "outputs": {"spectra_dir": spectra},
    });
    fs::write(&cfg, json.to_string()).unwrap();
    let out = dir.path().join("out");
    let first = syk(&["run", "--config", s(&cfg), "--out-dir", s(&out)]);
    assert_eq!(first.0, 0, "{}", first.2);
    assert_eq!(fs::read_dir(&spectra).unwrap().count(), 6);
    let second = syk(&["run", "--config", s(&cfg), "--out-dir", s(&out)]);
    assert_eq!(second.1, first.1);
}

#[test]
fn help_and_bad_flags() {
    let (code, stdout, _) = syk(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("validate-fixture"));
    let (code, _, stderr) = syk(&["sample", "--bogus"]);
    assert_eq!(code, 1);
    assert!(!stderr.is_empty());
    let (code, _, _) = syk(&["stats", "--out-dir", "/nonexistent/x"]);
    assert_eq!(code, 1);
}
