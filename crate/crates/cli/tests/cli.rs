use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stancedrift"));
    c.env_remove("STANCEDRIFT_CONFIG");
    c
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/e2e/corpus.jsonl")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn ok(cmd: &mut Command) -> String {
    let out = run(cmd);
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn cooccurrence(dir: &Path) -> PathBuf {
    let path = dir.join("cooc.csv");
    let mut csv = String::from("community,author,count\n");
    for c in 0..6 {
        for a in 0..10 {
            csv.push_str(&format!("c{c},a{},{}\n", (a + c / 3 * 10), 1 + (a + c) % 4));
        }
    }
    fs::write(&path, csv).unwrap();
    path
}

#[test]
fn filter_panel_scenario_compare_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stats = ok(bin()
        .args(["filter", "--input"])
        .arg(corpus())
        .arg("--output")
        .arg(d.join("kept.jsonl")));
    let stats: serde_json::Value = serde_json::from_str(&stats).unwrap();
    assert_eq!(stats["counts"]["Kept"], 221);
    assert_eq!(stats["total"], 270);
    assert_eq!(fs::read_to_string(d.join("kept.jsonl")).unwrap().lines().count(), 221);

    ok(bin()
        .args(["panel", "--facet", "cohort", "--window", "2016Q1:2018Q4", "--input"])
        .arg(d.join("kept.jsonl"))
        .arg("--output")
        .arg(d.join("panel.csv")));
    for (mode, file) in [("empirical", "emp.csv"), ("stance-only", "so.csv")] {
        ok(bin()
            .args(["scenario", "--mode", mode, "--panel"])
            .arg(d.join("panel.csv"))
            .arg("--output")
            .arg(d.join(file)));
    }
    let json = ok(bin().arg("compare").arg(d.join("emp.csv")).arg(d.join("so.csv")));
    assert!(json.contains("\"pearson_r\": 0.873958,"), "{json}");
    assert!(json.contains("\"p_value\": 2.01999e-4,"), "{json}");
    assert!(json.contains("\"n\": 12"), "{json}");
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["l1_loss"], 1.14475);

    let report = ok(bin()
        .arg("rank")
        .arg("--empirical")
        .arg(d.join("emp.csv"))
        .arg(format!("--scenario=Cohort Stance={}", d.join("so.csv").display())));
    let rows: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(rows[0]["scenario"], "Cohort Stance");
    assert_eq!(rows[0]["rank"], 1);
}

#[test]
fn run_reads_config_from_environment_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cooc = cooccurrence(d);
    let config = serde_json::json!({
        "input": corpus(),
        "output_dir": d.join("out"),
        "window": "2016Q1:2018Q4",
        "training": { "cooccurrence": cooc, "params": { "dim": 8, "epochs": 2 } },
        "dimensions": [ { "name": "partisan", "seed_pairs": [["c0", "c3"]] } ],
    });
    fs::write(d.join("run.json"), config.to_string()).unwrap();
    let table = ok(bin().args(["run", "--seed", "5"]).env("STANCEDRIFT_CONFIG", d.join("run.json")));
    assert!(table.contains("Subtopic Stance"));
    let first = fs::read(d.join("out/dims/embedding.vec")).unwrap();
    let report = fs::read(d.join("out/driver_report.json")).unwrap();

    ok(bin()
        .args(["run", "--seed", "5", "--config"])
        .arg(d.join("run.json"))
        .arg("--output-dir")
        .arg(d.join("again")));
    assert_eq!(fs::read(d.join("again/dims/embedding.vec")).unwrap(), first);
    assert_eq!(fs::read(d.join("again/driver_report.json")).unwrap(), report);

    ok(bin()
        .args(["run", "--seed", "6", "--config"])
        .arg(d.join("run.json"))
        .arg("--output-dir")
        .arg(d.join("other")));
    assert_ne!(fs::read(d.join("other/dims/embedding.vec")).unwrap(), first);

    let text = ok(bin().arg("report").arg(d.join("out")));
    assert!(text.starts_with("rank"));
    assert_eq!(text.lines().count(), 5);
    let json = ok(bin().args(["report", "--json"]).arg(d.join("out")));
    assert_eq!(json.as_bytes(), report.as_slice());
}

#[test]
fn dims_train_and_score_respect_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cooc = cooccurrence(d);
    for (seed, name) in [("1", "a.vec"), ("1", "b.vec"), ("2", "c.vec")] {
        ok(bin()
            .args(["dims", "train", "--dim", "8", "--epochs", "2", "--seed", seed, "--cooccurrence"])
            .arg(&cooc)
            .arg("--output")
            .arg(d.join(name)));
    }
    let a = fs::read(d.join("a.vec")).unwrap();
    assert_eq!(a, fs::read(d.join("b.vec")).unwrap());
    assert_ne!(a, fs::read(d.join("c.vec")).unwrap());
    assert!(String::from_utf8_lossy(&a).starts_with("6 8\n"));

    let scores = ok(bin()
        .args(["dims", "score", "--name", "x", "--pair", "c0:c3", "--embedding"])
        .arg(d.join("a.vec")));
    let lines: Vec<&str> = scores.lines().collect();
    assert_eq!(lines[0], "community,raw,percentile,bin");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].ends_with(",0,0"));
    assert!(lines[6].ends_with(",100,4"));
}

#[test]
fn exit_codes_distinguish_contract_and_io_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let missing = run(bin().args(["compare", "nope.csv", "nope2.csv"]).current_dir(d));
    assert_eq!(missing.status.code(), Some(2));

    let bad_arg = run(bin().args(["scenario", "--panel", "p.csv", "--mode", "sideways"]));
    assert_eq!(bad_arg.status.code(), Some(1));

    fs::write(d.join("a.csv"), "quarter,value\n2016Q1,0.5\n2016Q2,0.2\n").unwrap();
    fs::write(d.join("b.csv"), "quarter,value\n2016Q1,0.5\n2016Q2,0.1\n2016Q3,0.1\n").unwrap();
    let short = run(bin().arg("compare").arg(d.join("a.csv")).arg(d.join("b.csv")));
    assert_eq!(short.status.code(), Some(0), "{}", String::from_utf8_lossy(&short.stderr));

    ok(bin()
        .args(["panel", "--input"])
        .arg(corpus())
        .arg("--output")
        .arg(d.join("panel.csv")));
    let unknown = run(bin()
        .args(["scenario", "--group-mode", "Nope=fixed", "--panel"])
        .arg(d.join("panel.csv")));
    assert_eq!(unknown.status.code(), Some(1));

    let config = serde_json::json!({ "input": corpus(), "output_dir": d.join("locked") });
    fs::write(d.join("run.json"), config.to_string()).unwrap();
    fs::create_dir_all(d.join("locked")).unwrap();
    fs::write(d.join("locked/.lock"), "").unwrap();
    let locked = run(bin().args(["run", "--config"]).arg(d.join("run.json")));
    assert_eq!(locked.status.code(), Some(2));

    let no_config = run(bin().arg("run"));
    assert_eq!(no_config.status.code(), Some(1));

    assert_eq!(run(bin().arg("--help")).status.code(), Some(0));
}
