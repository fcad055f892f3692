use std::path::PathBuf;
use std::process::{Command, Output};

use kreinspec_cli::model::{parse_model_file, parse_model_str};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn kreinspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kreinspec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o).lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn free_segment_dirichlet_eigenvalues() {
    let f = fixture("zero_potential.json");
    let o = kreinspec(&["sl", "dirichlet", f.to_str().unwrap(), "--count", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 3);
    let pi2 = std::f64::consts::PI.powi(2);
    for (k, row) in rows.iter().enumerate() {
        let e: f64 = row[1].parse().unwrap();
        let want = ((k + 1) as f64).powi(2) * pi2;
        assert!((e - want).abs() < 1e-9 * want, "{e} vs {want}");
    }
}

#[test]
fn triangle_duality_row() {
    let f = fixture("c3.json");
    let o = kreinspec(&["qgraph", "duality", f.to_str().unwrap(), "--window", "0.1,9.7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    let e: f64 = rows[0][0].parse().unwrap();
    let want = (2.0 * std::f64::consts::PI / 3.0).powi(2);
    assert!((e - want).abs() < 1e-10, "{e}");
    assert_eq!(rows[0][1], "2");
}

#[test]
fn half_flux_has_two_bands() {
    let o = kreinspec(&["bloch", "--p", "1", "--q", "2", "--l1", "1", "--l2", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 2);
    let hi: f64 = rows[1][2].parse().unwrap();
    assert!((hi - 8f64.sqrt()).abs() < 1e-12);
}

#[test]
fn out_of_range_edge_reports_field_path() {
    let f = fixture("bad_edge.json");
    let o = kreinspec(&["graph", "spectrum", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("edges[3].src"), "{}", stderr(&o));
}

#[test]
fn type_errors_report_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    std::fs::write(&p, r#"{"kind":"graph","vertices":2,"edges":[{"src":0,"dst":1},{"src":"x","dst":0}]}"#).unwrap();
    let o = kreinspec(&["graph", "spectrum", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("edges[1].src"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(kreinspec(&["bogus"]).status.code(), Some(2));
    assert_eq!(kreinspec(&["bloch", "--p", "1"]).status.code(), Some(2));
}

#[test]
fn wrong_kind_is_schema_error() {
    let f = fixture("c3.json");
    let o = kreinspec(&["graph", "spectrum", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("kind"));
}

#[test]
fn numerical_failure_exit_code() {
    // The window straddles the pole of q at 1.
    let f = fixture("probe_rational.json");
    let o = kreinspec(&["probe", "measure", f.to_str().unwrap(), "--window", "0.5,1.5"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn model_files_round_trip() {
    for name in ["zero_potential.json", "c3.json", "dirichlet_pair.json", "dots.json", "probe_rational.json"] {
        let m = parse_model_file(&fixture(name)).unwrap();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        assert!(text.starts_with(r#"{"kind":"#), "{text}");
        assert_eq!(parse_model_str(&text).unwrap(), m, "{name}");
    }
}

#[test]
fn json_and_csv_carry_identical_numbers() {
    let f = fixture("dots.json");
    let args = ["dots", "butterfly", f.to_str().unwrap(), "--qmax", "4"];
    let csv = kreinspec(&args);
    let mut jargs = args.to_vec();
    jargs.push("--json");
    let json = kreinspec(&jargs);
    assert_eq!(csv.status.code(), Some(0));
    assert_eq!(json.status.code(), Some(0));

    let text = stdout(&csv);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header, ["p", "q", "gap", "lo", "hi"]);
    let v: Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["meta"]["command"], "dots butterfly");
    let rows = v["rows"].as_array().unwrap();
    let csv_rows = csv_rows(&csv);
    assert_eq!(rows.len(), csv_rows.len());
    for (r, c) in rows.iter().zip(&csv_rows) {
        for (h, cell) in header.iter().zip(c) {
            let from_csv: f64 = cell.parse().unwrap();
            assert_eq!(r[*h].as_f64().unwrap().to_bits(), from_csv.to_bits(), "{h}");
        }
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bands.csv");
    let o = kreinspec(&["--out", out.to_str().unwrap(), "bloch", "--p", "1", "--q", "3", "--l1", "1", "--l2", "1", "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 4);
}

#[test]
fn negative_spectral_parameter_parses() {
    let f = fixture("zero_potential.json");
    let o = kreinspec(&["sl", "eta", f.to_str().unwrap(), "--z", "-1,0.5", "--alpha", "-2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}
