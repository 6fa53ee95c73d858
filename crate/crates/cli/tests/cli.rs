use std::path::Path;
use std::process::{Command, Output};

use toric_rbim::Hypergraph;

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toric-rbim"))
        .current_dir(dir)
        .env_remove("NF_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

const FAST_MC: [&str; 6] = ["--n-disorder", "1", "--n-equilibration-sweeps", "5", "--n-measure-sweeps", "10"];

#[test]
fn help_documents_the_csv_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path(), &["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for needle in [
        "p,q_or_T,mean,stderr,n_disorder,sweeps,seed",
        "p,success_mean,success_stderr,n_eta,L",
        "NF_SEED",
        "verify",
        "build-code",
    ] {
        assert!(text.contains(needle), "help lacks {needle}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bin(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&bin(dir.path(), &["threshold", "--ps", "x"])), 2);
    assert_eq!(code(&bin(dir.path(), &["threshold", "--config", "missing.json"])), 2);
    assert_eq!(code(&bin(dir.path(), &["scan-rbim", "--sizes", "8"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_toric-rbim"))
        .current_dir(dir.path())
        .env("NF_SEED", "abc")
        .args(["build-code"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("NF_SEED"));
}

#[test]
fn verify_passes_and_fails_on_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path(), &["verify", "-o", "v.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(dir.path(), "v.csv");
    assert!(csv.starts_with("check,passed,instances,max_error,tolerance,failures\n"));
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));

    let o = bin(dir.path(), &["verify", "--inject-fault", "bond-sign", "--format", "json", "-o", "v.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("FAIL partition_function"));
    assert!(stderr(&o).contains("seed"));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "v.json")).unwrap();
    assert_eq!(doc["result"]["passed"], false);
    assert_eq!(doc["config"]["params"]["inject_fault"], "bond-sign");
}

#[test]
fn oversized_exact_request_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path(), &["verify", "--max-size", "10"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("instance too large"), "{}", stderr(&o));
    let o = bin(dir.path(), &["threshold", "--sizes", "10", "--ps", "0.1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn scan_grid_shape_and_sidecar_replay() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["scan-rbim", "--axis", "q", "-L", "16", "--ps", "0:0.25:0.05", "--xs", "0.05:0.3:0.05", "-o", "s.csv"];
    args.extend(FAST_MC);
    let o = bin(dir.path(), &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(dir.path(), "s.csv");
    assert_eq!(csv.lines().count(), 37);
    assert!(!csv.contains('\r'));
    let cfg: serde_json::Value = serde_json::from_str(&read(dir.path(), "s.csv.config.json")).unwrap();
    assert_eq!(cfg["subcommand"], "scan-rbim");
    assert_eq!(cfg["params"]["linear_size"], 16);

    let o = bin(dir.path(), &["scan-rbim", "--config", "s.csv.config.json", "-o", "replay.csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(dir.path(), "replay.csv"), csv);

    let o = bin(dir.path(), &["scan-rbim", "--config", "s.csv.config.json", "--seed", "2", "-o", "other.csv"]);
    assert_eq!(code(&o), 0);
    assert_ne!(read(dir.path(), "other.csv"), csv);
}

#[test]
fn scan_with_only_failed_cells_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["scan-rbim", "--axis", "q", "-L", "4", "--ps", "0.7", "--xs", "0.1", "-o", "f.csv"];
    args.extend(FAST_MC);
    let o = bin(dir.path(), &args);
    assert_eq!(code(&o), 1);
    assert!(read(dir.path(), "f.csv").contains("NaN,NaN"));
}

#[test]
fn clean_column_decreases_in_q() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        dir.path(),
        &[
            "scan-rbim", "--axis", "q", "-L", "8", "--ps", "0", "--xs", "0.1:0.4:0.1", "--n-disorder", "8",
            "--n-equilibration-sweeps", "200", "--n-measure-sweeps", "1000",
        ],
    );
    assert_eq!(code(&o), 0);
    let rows: Vec<(f64, f64)> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[2], f[3])
        })
        .collect();
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        assert!(w[1].0 <= w[0].0 + 2.0 * w[0].1.hypot(w[1].1), "{rows:?}");
    }
    assert!(rows[0].0 > 0.9 && rows[3].0 < 0.5, "{rows:?}");
}

#[test]
fn threshold_success_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path(), &["threshold", "--sizes", "3", "--ps", "0.05:0.2:0.05", "--n-eta", "300", "-o", "t.csv"]);
    assert_eq!(code(&o), 0);
    let csv = read(dir.path(), "t.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,success_mean,success_stderr,n_eta,L"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[4], "3");
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        assert!(w[1].0 <= w[0].0 + 2.0 * w[0].1.hypot(w[1].1), "{rows:?}");
    }
}

#[test]
fn dualize_twice_restores_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path(), &["build-code", "--code", "toric", "--size", "3", "-o", "x.txt"]);
    assert_eq!(code(&o), 0);
    let x = Hypergraph::from_text(&read(dir.path(), "x.txt")).unwrap();
    assert_eq!((x.n_vertices(), x.n_edges()), (18, 9));

    let o = bin(dir.path(), &["dualize", "-i", "x.txt", "-o", "d.txt", "--couplings", "j.txt"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = Hypergraph::from_text(&read(dir.path(), "d.txt")).unwrap();
    assert_eq!((d.n_vertices(), d.n_edges()), (x.n_edges(), x.n_vertices()));
    assert_eq!(d.edge_size_histogram(), vec![(2, 18)]);
    let couplings = read(dir.path(), "j.txt");
    assert!(couplings.starts_with("9\n"));
    assert_eq!(couplings.lines().count(), 19);
    assert!(dir.path().join("j.txt.config.json").exists());

    let o = bin(dir.path(), &["dualize", "-i", "d.txt", "-o", "dd.txt"]);
    assert_eq!(code(&o), 0);
    let dd = Hypergraph::from_text(&read(dir.path(), "dd.txt")).unwrap();
    assert_eq!(dd.canonical_edges(), x.canonical_edges());
}

#[test]
fn dualize_reports_the_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "# three vertices\n3\n0 1\n1 two\n").unwrap();
    let o = bin(dir.path(), &["dualize", "-i", "bad.txt"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    std::fs::write(dir.path().join("iso.txt"), "3\n0 1\n").unwrap();
    let o = bin(dir.path(), &["dualize", "-i", "iso.txt"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("[2]"), "{}", stderr(&o));
}

#[test]
fn build_code_reports_structure() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path(), &["build-code", "--code", "xcube", "--size", "2", "--dual", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["result"]["n_qubits"], 24);
    assert_eq!(doc["result"]["logical_qubits"], 9);
    let edges = doc["result"]["hypergraph"]["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 24);
    assert!(edges.iter().all(|e| e.as_array().unwrap().len() == 4));

    let o = bin(dir.path(), &["build-code", "--code", "color", "--size", "2", "--dual"]);
    let d = Hypergraph::from_text(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(d.edge_size_histogram(), vec![(3, 48)]);

    assert_eq!(code(&bin(dir.path(), &["build-code", "--code", "color", "--size", "2,3"])), 2);
    assert_eq!(code(&bin(dir.path(), &["build-code", "--code", "xcube", "--size", "1"])), 2);
}

#[test]
fn coherence_scan_exact_and_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path(), &["scan-coherence", "--ps", "0,0.1", "--qs", "0.1,0.3", "--n-eta", "20", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cells = doc["result"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    assert!(cells.iter().all(|c| c["sweeps"] == 0));
    let m = |k: usize| cells[k]["estimate"]["mean"].as_f64().unwrap();
    assert!(m(0) > m(1) && m(2) > m(3));

    let mut args = vec!["scan-coherence", "-L", "6", "--ps", "0.05", "--qs", "0.2", "--n-eta", "3", "--engine", "monte-carlo"];
    args.extend(&FAST_MC[2..]);
    let o = bin(dir.path(), &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let row = String::from_utf8(o.stdout).unwrap();
    let f: Vec<&str> = row.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((f[4], f[5]), ("3", "15"));
    assert!((0.0..=1.0).contains(&f[2].parse::<f64>().unwrap()));
}
