use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jacobi-mimo")).args(args).output().expect("spawn CLI")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ergodic_prints_closed_form_row() {
    let o = cli(&["ergodic", "--mt", "1", "--mr", "1", "--m", "2", "--rho-db", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho_db,capacity_bits,capacity_normalized,stderr"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let c: f64 = row[1].parse().unwrap();
    assert!((c - 2.362_679_739_612).abs() < 1e-9);
}

#[test]
fn dmt_lists_vertices() {
    let o = cli(&["dmt", "--mt", "4", "--mr", "4", "--m", "8"]);
    assert_eq!(stdout(&o), "r,d\n0,16\n1,9\n2,4\n3,1\n4,0\n");
}

#[test]
fn invalid_dimensions_exit_with_usage_code() {
    let o = cli(&["ergodic", "--mt", "3", "--mr", "1", "--m", "2", "--rho-db", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m_t"));
}

#[test]
fn contract_violations_exit_with_usage_code() {
    assert_eq!(cli(&["rho-norm", "--m", "4", "--epsilon", "2"]).status.code(), Some(2));
    assert_eq!(cli(&["feedback", "--mt", "1", "--mr", "1", "--m", "3", "--rho-db", "10"]).status.code(), Some(2));
    assert_eq!(
        cli(&["ergodic", "--mt", "1", "--mr", "1", "--m", "2", "--rho-db", "10", "--workers", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(cli(&["ergodic", "--mt", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["ergodic", "--mt", "1", "--mr", "1", "--m", "2", "--rho-db", "a:b"]).status.code(), Some(2));
}

#[test]
fn help_mentions_units() {
    let o = cli(&["outage", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("dB"));
    assert!(text.contains("bits"));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.csv");
    let args = ["outage", "--mt", "1", "--mr", "2", "--m", "4", "--rho-db", "10", "--rate-bits", "1,2", "--trials", "2000"];
    let direct = cli(&args);
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let o = cli(&with_out);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

fn write_manifest(dir: &Path) -> std::path::PathBuf {
    let manifest = dir.join("m.json");
    let out = dir.join("o.csv");
    let o = cli(&[
        "repetition", "--mt", "1", "--mr", "1", "--m", "2", "--rho-db", "0:20:10", "--trials", "3000", "--seed", "11",
        "--out", out.to_str().unwrap(), "--manifest", manifest.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    manifest
}

#[test]
fn manifest_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(dir.path());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(json["subcommand"], "repetition");
    assert_eq!(json["master_seed"], 11);
    assert!(!json["args"].as_array().unwrap().iter().any(|a| a == "--out" || a == "--manifest"));
    let o = cli(&["replay", manifest.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("replay ok"));
}

#[test]
fn tampered_manifest_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(dir.path());
    let mut json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    json["output_sha256"] = serde_json::Value::String("0".repeat(64));
    std::fs::write(&manifest, json.to_string()).unwrap();
    assert_eq!(cli(&["replay", manifest.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn different_seeds_change_monte_carlo_output() {
    let base = ["ergodic", "--mt", "2", "--mr", "2", "--m", "4", "--rho-db", "10", "--method", "mc", "--trials", "2000"];
    let mut a: Vec<&str> = base.to_vec();
    a.extend(["--seed", "1"]);
    let mut b: Vec<&str> = base.to_vec();
    b.extend(["--seed", "2"]);
    assert_ne!(cli(&a).stdout, cli(&b).stdout);
}

#[test]
fn feedback_reports_long_format() {
    let o = cli(&["feedback", "--mt", "2", "--mr", "2", "--m", "3", "--rho-db", "10", "--n", "100", "--frames", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("quantity,index,value\n"));
    assert!(text.contains("stream_snr,0,"));
    assert!(text.contains("ber,"));
}
