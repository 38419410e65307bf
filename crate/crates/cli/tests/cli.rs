use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowsparse")).current_dir(dir).args(args).output().expect("spawn flowsparse")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = run(dir.path(), &["gen", "quasi-bipartite", "--k", "5", "--n", "200", "--seed", "1", "--out", name]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(dir.path().join("a.json")).unwrap(), fs::read(dir.path().join("b.json")).unwrap());
    let manifest = json(&dir.path().join("a.manifest.json"));
    assert_eq!(manifest["command"], "gen");
    assert_eq!(manifest["seed"], 1);
}

#[test]
fn sp_generator_emits_tree_with_expected_leaves() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["gen", "sp", "--depth", "4", "--k", "3", "--out", "g.json"])), 0);
    fn leaves(t: &Value) -> usize {
        if t["kind"] == "leaf" { 1 } else { leaves(&t["left"]) + leaves(&t["right"]) }
    }
    assert_eq!(leaves(&json(&dir.path().join("g.sptree.json"))), 16);
    let out = run(dir.path(), &["sparsify", "--input", "g.json", "--method", "sp", "--tree", "g.sptree.json", "--out", "h.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(dir.path(), &["verify", "--g", "g.json", "--gp", "h.json", "--cuts", "--out", "r.json"]);
    assert_eq!(code(&out), 0);
    let report = json(&dir.path().join("r.json"));
    assert_eq!(report["cuts"]["exact"], true);
    assert_eq!(report["flow"]["verdict"], "pass");
}

#[test]
fn bounded_component_respects_w() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["gen", "bounded-component", "--k", "4", "--w", "3", "--components", "12", "--out", "g.json"]);
    assert_eq!(code(&out), 0);
    let g = json(&dir.path().join("g.json"));
    let net: flowsparse::network::NetworkJson = serde_json::from_value(g).unwrap();
    let net = flowsparse::TerminalNetwork::from_json(&net, false).unwrap();
    assert!(net.components_after_terminal_removal().iter().all(|c| c.len() <= 3));
}

#[test]
fn sample_then_verify_gives_a_report() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["gen", "quasi-bipartite", "--k", "4", "--n", "60", "--out", "g.json"])), 0);
    let out = run(dir.path(), &["--seed", "3", "sparsify", "--input", "g.json", "--method", "sample", "--m", "30", "--out", "h.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("h.manifest.json").exists());
    let out = run(dir.path(), &["--jobs", "2", "verify", "--g", "g.json", "--gp", "h.json", "--demands", "random:5:1", "--claim", "2", "--out", "r.json"]);
    // sampling may lose flow, so either verdict is acceptable here
    assert!([0, 1].contains(&code(&out)));
    let report = json(&dir.path().join("r.json"));
    assert_eq!(report["flow"]["schema_version"], 1);
    assert_eq!(report["flow"]["records"].as_array().unwrap().len(), 5);
    assert_eq!(code(&out) == 0, report["flow"]["verdict"] == "pass");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["gen", "random", "--n", "10", "--k", "4", "--seed", "2", "--out", "g.json"])), 0);
    let out = run(dir.path(), &["sparsify", "--input", "g.json", "--method", "sp", "--out", "h.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not series-parallel"));
    let out = Command::new(env!("CARGO_BIN_EXE_flowsparse"))
        .current_dir(dir.path())
        .env("FLOWSPARSE_BUDGET", "10")
        .args(["sketch", "build", "--input", "g.json", "--out", "s.json"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    // a doubled copy violates a claim of 1
    let mut g = json(&dir.path().join("g.json"));
    for e in g["edges"].as_array_mut().unwrap() {
        let cap: i64 = e["cap"].as_str().map(|s| s.parse().unwrap()).unwrap_or_else(|| e["cap"].as_i64().unwrap());
        e["cap"] = Value::String((2 * cap).to_string());
    }
    fs::write(dir.path().join("d.json"), serde_json::to_string(&g).unwrap()).unwrap();
    let out = run(dir.path(), &["verify", "--g", "g.json", "--gp", "d.json", "--claim", "1.5", "--demands", "basis"]);
    assert_eq!(code(&out), 1);
    assert_eq!(code(&run(dir.path(), &["lambda", "--input", "missing.json", "--demand", "t0,t1,1"])), 2);
}

#[test]
fn plan_prints_m_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["plan", "--eps", "0.5", "--k", "5", "--fail", "0.1"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let m = v["m"].as_f64().unwrap();
    assert!(m > 11_000.0 && m < 12_500.0);
    assert!((v["predicted_failure"].as_f64().unwrap() - 0.1).abs() < 1e-9);
}

#[test]
fn sketch_round_trip_and_lambda() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["gen", "random", "--n", "6", "--k", "2", "--out", "g.json"])), 0);
    assert_eq!(code(&run(dir.path(), &["sketch", "build", "--input", "g.json", "--out", "s.json"])), 0);
    let q = run(dir.path(), &["sketch", "query", "--sketch", "s.json", "--demand", "t0,t1,1"]);
    assert_eq!(code(&q), 0, "{}", String::from_utf8_lossy(&q.stderr));
    let est = serde_json::from_slice::<Value>(&q.stdout).unwrap()["lambda_estimate"].as_f64().unwrap();
    let l = run(dir.path(), &["lambda", "--input", "g.json", "--demand", "t0,t1,1"]);
    let lam = serde_json::from_slice::<Value>(&l.stdout).unwrap()["lambda"].as_f64().unwrap();
    assert!(est <= 1.25 * lam && est >= lam / 1.25, "{est} vs {lam}");
}

#[test]
fn dimacs_input_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.max"), "c demo\np max 4 5\nn 1 s\nn 4 t\na 1 2 3\na 2 4 2\na 1 3 5\na 3 4 1\na 2 3 1\n").unwrap();
    fs::write(dir.path().join("g.terms"), "1 4\n").unwrap();
    let out = run(dir.path(), &["lambda", "--input", "g.max", "--format", "dimacs", "--terminals", "g.terms", "--demand", "1,4,1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let lam = serde_json::from_slice::<Value>(&out.stdout).unwrap()["lambda"].as_f64().unwrap();
    assert!((lam - 3.0).abs() < 1e-9);
}

/// `docs/cli.md` is the concatenated `--help` output; set
/// FLOWSPARSE_UPDATE_DOCS=1 to regenerate it.
#[test]
fn flag_reference_is_current() {
    let commands: &[&[&str]] = &[&[], &["gen"], &["sparsify"], &["verify"], &["sketch", "build"], &["sketch", "query"], &["plan"], &["lambda"]];
    let mut doc = String::from("# flowsparse command-line reference\n\nGenerated from `--help`; do not edit by hand.\n");
    for cmd in commands {
        let mut args = cmd.to_vec();
        args.push("--help");
        let out = Command::new(env!("CARGO_BIN_EXE_flowsparse")).args(&args).output().unwrap();
        assert_eq!(code(&out), 0);
        let title = if cmd.is_empty() { "flowsparse".to_string() } else { format!("flowsparse {}", cmd.join(" ")) };
        doc.push_str(&format!("\n## `{title}`\n\n```text\n{}```\n", String::from_utf8_lossy(&out.stdout)));
    }
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/cli.md");
    if std::env::var_os("FLOWSPARSE_UPDATE_DOCS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &doc).unwrap();
    }
    assert_eq!(fs::read_to_string(&path).unwrap_or_default(), doc, "docs/cli.md is stale; rerun with FLOWSPARSE_UPDATE_DOCS=1");
}
