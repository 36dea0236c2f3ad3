use std::path::Path;
use std::process::{Command, Output};

const ST: &str = r#"
name = "st-small"
replications = 30
master_seed = 3

[problem]
kind = "st"
dim = 5

[init]
strategy = "oips_annealing"
beta = 4.0
samples = 2

[init.sampler]
method = "rejection"

[optimizer]
step = 0.05
iterations = 50

[success]
mode = "value_gap"
tol = 0.5
"#;

fn gibbsinit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbsinit"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn without_timestamp(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.contains("generated_at_unix"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "st.toml", ST);
    let mut outputs = Vec::new();
    for (k, workers) in ["1", "2"].iter().enumerate() {
        let dir = tmp.path().join(format!("out{k}"));
        let o = gibbsinit(&[
            "run",
            &cfg,
            "--output-dir",
            dir.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((
            std::fs::read(dir.join("records.csv")).unwrap(),
            without_timestamp(&dir.join("summary.json")),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn list_problems_names_every_kind() {
    let o = gibbsinit(&["list-problems"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for kind in ["st", "gmm", "gmnl", "double_well"] {
        assert!(text.lines().any(|l| l.starts_with(kind)), "{kind}");
    }
}

#[test]
fn invalid_config_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.toml",
        &ST.replace("beta = 4.0", "beta = -4.0"),
    );
    assert_eq!(gibbsinit(&["run", &cfg]).status.code(), Some(2));
    let missing = tmp.path().join("missing.toml");
    assert_eq!(
        gibbsinit(&["run", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let cfg = write(tmp.path(), "ok.toml", ST);
    assert_eq!(
        gibbsinit(&["run", &cfg, "--replications", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn unstable_experiment_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "gmnl.toml",
        r#"
replications = 6

[problem]
kind = "gmnl"
customers = 40
draws = 4
half_width = 1000.0

[init]
strategy = "random"

[optimizer]
step = 0.01
iterations = 3

[success]
mode = "relative_to_best"
rel = 0.01
"#,
    );
    let o = gibbsinit(&["run", &cfg]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment-unstable"));
}

#[test]
fn sweep_writes_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "st.toml", ST);
    let dir = tmp.path().join("sweep");
    let o = gibbsinit(&[
        "sweep",
        &cfg,
        "--axis",
        "beta",
        "--values",
        "1,10",
        "--replications",
        "5",
        "--output-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn quick_theory_check_writes_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("theory.json");
    let o = gibbsinit(&["theory-check", "--quick", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(report["concentration"].as_array().unwrap().len() == 5);
}
