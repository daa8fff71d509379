use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn archrecon(store: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_archrecon"))
        .arg("--store")
        .arg(store)
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes a small synthetic system and one run file per algorithm.
fn setup(dir: &Path) -> Vec<String> {
    let o = archrecon(
        &dir.join("store"),
        &["synth", "--units", "30", "--packages", "6", "--noise", "0.1", "--out-dir", dir.to_str().unwrap(), "--name", "sys"],
    );
    assert!(o.status.success(), "{o:?}");
    ["nsga2", "random", "gde3_style"]
        .iter()
        .map(|alg| {
            let path = dir.join(format!("{alg}.run.json"));
            let file = json!({
                "system": "sys",
                "graph": "sys.graph.json",
                "model": "sys.model.json",
                "config": {"algorithm": alg, "population": 10, "max_evaluations": 200, "snapshot_interval": 50, "scenario": "strict4"}
            });
            std::fs::write(&path, file.to_string()).unwrap();
            path.to_str().unwrap().to_string()
        })
        .collect()
}

#[test]
fn ingest_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let o = archrecon(
        &dir.path().join("store"),
        &["ingest", "--graph", dir.path().join("sys.graph.json").to_str().unwrap(), "--model", dir.path().join("sys.model.json").to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("nodes: 30"), "{text}");
    assert!(text.contains("edges: "), "{text}");
    assert!(text.contains("layers: 4"), "{text}");
}

#[test]
fn ingest_of_broken_graph_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"types": [], "dependencies": [{"from": 1, "to": 2}]}"#).unwrap();
    let o = archrecon(
        &dir.path().join("store"),
        &["ingest", "--graph", bad.to_str().unwrap(), "--model", dir.path().join("sys.model.json").to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = archrecon(&dir.path().join("store"), &["ingest", "--graph", "missing.json", "--model", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(archrecon(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(archrecon(dir.path(), &["run"]).status.code(), Some(1));
    assert_eq!(archrecon(dir.path(), &["stats", "--by", "colour"]).status.code(), Some(1));
    assert_eq!(archrecon(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn run_twice_reports_already_complete() {
    let dir = tempfile::tempdir().unwrap();
    let runs = setup(dir.path());
    let store = dir.path().join("store");
    let first = archrecon(&store, &["run", "--config", &runs[0]]);
    assert_eq!(first.status.code(), Some(0), "{first:?}");
    assert!(stdout(&first).contains("done"));
    let second = archrecon(&store, &["run", "--config", &runs[0]]);
    assert_eq!(second.status.code(), Some(0));
    assert!(stdout(&second).contains("already complete"), "{}", stdout(&second));
}

#[test]
fn invalid_run_config_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let path = dir.path().join("bad.run.json");
    std::fs::write(
        &path,
        json!({"system": "sys", "graph": "sys.graph.json", "model": "sys.model.json", "config": {"max_evaluations": 125, "snapshot_interval": 50}})
            .to_string(),
    )
    .unwrap();
    let o = archrecon(&dir.path().join("store"), &["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_indicators_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let runs = setup(dir.path());
    let store = dir.path().join("store");
    for r in &runs {
        assert!(archrecon(&store, &["run", "--config", r]).status.success());
    }

    let o = archrecon(&store, &["stats", "--by", "algorithm", "--objective", "violations"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "slice,metric,min,max,median,n");
    let slices: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(slices, ["gde3_style", "nsga2", "random"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("kruskal-wallis"));

    let o = archrecon(&store, &["stats", "--by", "algorithm", "--objective", "nope"]);
    assert_eq!(o.status.code(), Some(2));

    let o = archrecon(&store, &["indicators", "--stride", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let records: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    // 4 snapshots per run; strides keep the 2nd and the 4th
    assert_eq!(records.len(), 6);
    for r in &records {
        for key in ["run", "evals", "hv", "gd", "igd", "eps", "spacing", "contribution"] {
            assert!(r.get(key).is_some(), "missing {key} in {r}");
        }
    }

    let id = records[0]["run"].as_str().unwrap();
    let o = archrecon(&store, &["export", "--run", id, "--format", "json"]);
    let front: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!front.is_empty());
    let out = dir.path().join("front.csv");
    let o = archrecon(&store, &["export", "--run", id, "--format", "csv", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("index,neg_cohesion,"));
    assert_eq!(csv.lines().count(), front.len() + 1);

    assert_eq!(archrecon(&store, &["export", "--run", "0000"]).status.code(), Some(2));
}

#[test]
fn matrix_runs_and_skips() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let matrix = dir.path().join("matrix.json");
    std::fs::write(
        &matrix,
        json!({
            "algorithms": ["nsga2", "random"],
            "systems": [{"name": "sys", "graph": "sys.graph.json", "model": "sys.model.json"}],
            "scenarios": ["transient4"],
            "seeds_per_cell": 2,
            "base": {"population": 10, "max_evaluations": 100, "snapshot_interval": 50}
        })
        .to_string(),
    )
    .unwrap();
    let store = dir.path().join("store");
    let o = archrecon(&store, &["matrix", "--matrix", matrix.to_str().unwrap(), "--workers", "2"]);
    assert!(stdout(&o).contains("4 runs: 4 executed, 0 already complete, 0 failed"), "{o:?}");
    let o = archrecon(&store, &["matrix", "--matrix", matrix.to_str().unwrap()]);
    assert!(stdout(&o).contains("4 runs: 0 executed, 4 already complete"), "{o:?}");
}

#[test]
fn serve_listens_on_the_port_from_the_environment() {
    use std::io::{Read, Write};
    use std::net::{TcpListener, TcpStream};

    let dir = tempfile::tempdir().unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_archrecon"))
        .arg("--store")
        .arg(dir.path())
        .arg("serve")
        .env("ARCHRECON_PORT", port.to_string())
        .env("RUST_LOG", "off")
        .spawn()
        .unwrap();
    let mut response = String::new();
    for _ in 0..100 {
        if let Ok(mut stream) = TcpStream::connect(("127.0.0.1", port)) {
            stream.write_all(b"GET /runs HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
            stream.read_to_string(&mut response).unwrap();
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(100));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.ends_with("[]"), "{response}");
}
