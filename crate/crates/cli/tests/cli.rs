use qxlab_cli::bundle::read_csv;
use qxlab_cli::config::{Analysis, Axis, Periods, RunConfig, Source, SurveyGrid};
use qxlab_core::io::{MapDescription, PolyDescription};
use std::path::Path;
use std::process::Command;

fn horseshoe() -> Source<MapDescription> {
    Source::Inline(MapDescription { p_coeffs: vec![[-6.0, 0.0], [0.0, 0.0], [1.0, 0.0]], a: [0.1, 0.0], real: true })
}

fn config(analysis: Analysis, out: &Path, max: usize) -> RunConfig {
    RunConfig { analysis, map: Some(horseshoe()), periods: Periods { min: 1, max }, out: out.to_path_buf(), ..Default::default() }
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn certify_bundle_on_the_horseshoe() {
    let dir = tempfile::tempdir().unwrap();
    qxlab_cli::execute(&config(Analysis::Certify, dir.path(), 4)).unwrap();
    for f in ["certificate.json", "saddles.csv", "mfunction.csv", "cocycles.csv", "provenance.json", "diagnostics.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let cert = json(dir.path(), "certificate.json");
    assert_eq!(cert["certificate"]["verdict"], "PASS");
    assert_eq!(cert["provenance"], json(dir.path(), "provenance.json"));
    let rows = read_csv(&std::fs::read_to_string(dir.path().join("saddles.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 8);
    let csv = std::fs::read_to_string(dir.path().join("cocycles.csv")).unwrap();
    assert!(csv.starts_with("# map_digest="));
}

#[test]
fn empty_period_range_is_insufficient() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { periods: "3..2".parse().unwrap(), ..config(Analysis::Certify, dir.path(), 0) };
    qxlab_cli::execute(&cfg).unwrap();
    let cert = json(dir.path(), "certificate.json");
    assert_eq!(cert["certificate"]["verdict"], "INSUFFICIENT_SAMPLE");
    assert_eq!(cert["certificate"]["orbit_count"], 0);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for analysis in [Analysis::Certify, Analysis::Metrics, Analysis::Manifold, Analysis::Folding] {
        let ba = qxlab_cli::run(&config(analysis, a.path(), 3)).unwrap();
        let bb = qxlab_cli::run(&config(analysis, b.path(), 3)).unwrap();
        assert_eq!(ba.files, bb.files, "{analysis:?}");
    }
}

#[test]
fn catalog_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cat.json");
    let cfg = RunConfig { catalog: Some(path.clone()), ..config(Analysis::Saddles, &dir.path().join("o"), 3) };
    let first = qxlab_cli::run(&cfg).unwrap();
    assert!(path.exists());
    let second = qxlab_cli::run(&cfg).unwrap();
    assert_eq!(first.files["saddles.csv"], second.files["saddles.csv"]);
    // a catalog that does not cover the requested periods is refused
    let more = RunConfig { periods: Periods { min: 1, max: 5 }, ..cfg };
    assert!(qxlab_cli::run(&more).is_err());

    let cache = dir.path().join("cache");
    let cfg = RunConfig { cache_dir: Some(cache.clone()), ..config(Analysis::Saddles, &dir.path().join("p"), 2) };
    qxlab_cli::run(&cfg).unwrap();
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
}

#[test]
fn survey_rows_match_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let grid = SurveyGrid { a: Axis { min: 0.1, max: 0.2, steps: 2 }, c: Axis { min: -6.0, max: -4.0, steps: 3 } };
    let cfg = RunConfig { survey: grid, ..config(Analysis::Survey, dir.path(), 3) };
    let b = qxlab_cli::run(&cfg).unwrap();
    let rows = read_csv(std::str::from_utf8(&b.files["survey.csv"]).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(&r[4], "PASS");
    }
}

#[test]
fn one_cell_survey_equals_certify() {
    let dir = tempfile::tempdir().unwrap();
    let grid = SurveyGrid { a: Axis { min: 0.1, max: 0.1, steps: 1 }, c: Axis { min: -6.0, max: -6.0, steps: 1 } };
    let s = qxlab_cli::run(&RunConfig { survey: grid, ..config(Analysis::Survey, dir.path(), 3) }).unwrap();
    let rows = read_csv(std::str::from_utf8(&s.files["survey.csv"]).unwrap()).unwrap();
    let c = qxlab_cli::run(&config(Analysis::Certify, dir.path(), 3)).unwrap();
    let cert: serde_json::Value = serde_json::from_slice(&c.files["certificate.json"]).unwrap();
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), cert["certificate"]["kappa"].as_f64().unwrap());
}

#[test]
fn survey_records_bad_cells_in_row() {
    let dir = tempfile::tempdir().unwrap();
    let grid = SurveyGrid { a: Axis { min: 0.0, max: 0.1, steps: 2 }, c: Axis { min: -6.0, max: -6.0, steps: 1 } };
    let b = qxlab_cli::run(&RunConfig { survey: grid, ..config(Analysis::Survey, dir.path(), 2) }).unwrap();
    let rows = read_csv(std::str::from_utf8(&b.files["survey.csv"]).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][5].contains("nonzero"));
    assert_eq!(&rows[1][4], "PASS");
}

#[test]
fn folding_reads_manifold_exports() {
    let dir = tempfile::tempdir().unwrap();
    qxlab_cli::execute(&config(Analysis::Manifold, dir.path(), 2)).unwrap();
    let jets = dir.path().join("parametrizations.json");
    let mut cfg = config(Analysis::Folding, &dir.path().join("f"), 2);
    cfg.map = None;
    cfg.folding.jets = Some(jets);
    let b = qxlab_cli::run(&cfg).unwrap();
    let rows = read_csv(std::str::from_utf8(&b.files["folding.csv"]).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(&r[2], "1");
        assert_eq!(&r[3], "1");
    }
}

#[test]
fn poly1d_chebyshev() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        analysis: Analysis::Poly1d,
        poly: Some(Source::Inline(PolyDescription { coeffs: vec![[-2.0, 0.0], [0.0, 0.0], [1.0, 0.0]] })),
        periods: Periods { min: 1, max: 5 },
        out: dir.path().to_path_buf(),
        ..Default::default()
    };
    let b = qxlab_cli::run(&cfg).unwrap();
    let cert: serde_json::Value = serde_json::from_slice(&b.files["certificate.json"]).unwrap();
    assert_eq!(cert["certificate"]["verdict"], "PASS");
    assert_eq!(cert["certificate"]["semi_hyperbolicity"]["verdict"], "YES");
    let diag: serde_json::Value = serde_json::from_slice(&b.files["diagnostics.json"]).unwrap();
    assert_eq!(diag["diagnostics"]["agrees_with_semi_hyperbolicity"], true);
}

#[test]
fn binary_reads_config_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("map.json"), r#"{"p_coeffs": [[-6, 0], [0, 0], [1, 0]], "a": [0.1, 0]}"#).unwrap();
    std::fs::write(dir.path().join("run.json"), r#"{"map": "map.json", "periods": {"min": 1, "max": 5}, "t": 1.0}"#).unwrap();
    let out = dir.path().join("bundle");
    let status = Command::new(env!("CARGO_BIN_EXE_qxlab"))
        .args(["saddles", "--config"])
        .arg(dir.path().join("run.json"))
        .args(["--periods", "2", "--seed", "9", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let prov = json(&out, "provenance.json");
    assert_eq!(prov["seed"], 9);
    let rows = read_csv(&std::fs::read_to_string(out.join("saddles.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
}

#[test]
fn binary_fails_on_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"p_coeffs": [[1, 0], [2, 0]], "a": [0.1, 0]}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qxlab"))
        .args(["certify", "--map"])
        .arg(dir.path().join("bad.json"))
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid map"));
    let missing = Command::new(env!("CARGO_BIN_EXE_qxlab")).args(["certify", "--config", "/nonexistent.json"]).output().unwrap();
    assert!(!missing.status.success());
}

#[test]
fn negative_t_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { t: -1.0, ..config(Analysis::Certify, dir.path(), 2) };
    assert!(qxlab_cli::run(&cfg).is_err());
}
