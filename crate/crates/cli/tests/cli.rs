use std::path::Path;
use std::process::{Command, Output};

fn locallearn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locallearn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn read(dir: &Path, rel: &str) -> String {
    std::fs::read_to_string(dir.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

const SIMULATE: &str = r#"{
  "experiment": "simulate",
  "seed": 4,
  "params": {
    "data": {"kind": "gaussian", "n": 3, "m": 50, "mean": [0.5, 0.5, 0.5],
             "cov": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
    "rule": "oja",
    "transfer": {"kind": "linear"},
    "eta": {"kind": "constant", "eta": 0.01},
    "epochs": 20
  }
}"#;

#[test]
fn rules_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let out = locallearn(&["rules", "list"], tmp.path());
    assert!(out.status.success());
    let csv = read(tmp.path(), "out/rules/list/rules.csv");
    assert!(csv.contains("\noja,3,3,false,"));
    assert_eq!(String::from_utf8_lossy(&out.stdout), csv);

    let out = locallearn(&["rules", "transform", "--from", "zero-one", "1", "0", "0", "0"], tmp.path());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "4 -2 -2 1");
    let out = locallearn(&["rules", "classify", "bounded_hebb"], tmp.path());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "bounded_hebb n=4 d=3");
    assert!(tmp.path().join("out/rules/classify/manifest.json").exists());
}

#[test]
fn invalid_configs_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let unknown = write(d, "unknown.json", &SIMULATE.replace("\"epochs\": 20", "\"epochs\": 20, \"colour\": 1"));
    assert_eq!(locallearn(&["simulate", "--config", &unknown], d).status.code(), Some(2));
    let top = write(d, "top.json", &SIMULATE.replace("\"seed\": 4", "\"seed\": 4, \"extra\": true"));
    assert_eq!(locallearn(&["simulate", "--config", &top], d).status.code(), Some(2));
    let cfg = write(d, "sim.json", SIMULATE);
    assert_eq!(locallearn(&["hopfield", "--config", &cfg], d).status.code(), Some(2));
    assert_eq!(locallearn(&["simulate"], d).status.code(), Some(2));
    assert_eq!(locallearn(&["reproduce", "table6", "--budget", "huge"], d).status.code(), Some(2));
    let bad_rule = write(d, "rule.json", &SIMULATE.replace("\"oja\"", "\"no_such_rule\""));
    assert_eq!(locallearn(&["simulate", "--config", &bad_rule], d).status.code(), Some(2));
    assert!(!d.join("out").exists());
}

#[test]
fn runtime_failures_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "idx.json",
        r#"{"params": {"data": {"kind": "idx_file", "path": "missing.idx"}, "rule": "simple_hebb"}}"#,
    );
    assert_eq!(locallearn(&["simulate", "--config", &cfg], tmp.path()).status.code(), Some(1));
}

#[test]
fn same_config_and_seed_give_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write(d, "sim.json", SIMULATE);
    for out in ["a", "b"] {
        assert!(locallearn(&["simulate", "--config", &cfg, "--out", out], d).status.success());
    }
    assert!(locallearn(&["simulate", "--config", &cfg, "--out", "c", "--seed", "5"], d).status.success());
    let a = read(d, "a/trajectory.csv");
    assert_eq!(a, read(d, "b/trajectory.csv"));
    assert_ne!(a, read(d, "c/trajectory.csv"));
    assert!(a.starts_with("epoch,norm,angle_to_centroid,w_0,w_1,w_2\n"));
    assert_eq!(a.lines().count(), 22);

    let ma: serde_json::Value = serde_json::from_str(&read(d, "a/manifest.json")).unwrap();
    let mb: serde_json::Value = serde_json::from_str(&read(d, "b/manifest.json")).unwrap();
    let mc: serde_json::Value = serde_json::from_str(&read(d, "c/manifest.json")).unwrap();
    assert_eq!(ma, mb);
    assert_eq!(ma["seed"], 4);
    assert_eq!(mc["seed"], 5);
    assert_ne!(ma["config_sha256"], mc["config_sha256"]);
    assert_eq!(ma["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reproduce_table6_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = locallearn(&["reproduce", "table6", "--out", "t6"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path(), "t6/table6.csv");
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        let expect = if r[0] == "2" { ["14", "16", "16"] } else { ["104", "256", "256"] };
        assert_eq!(&r[2..5], &expect);
    }
}

#[test]
fn reproduce_riccati_figure() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(locallearn(&["reproduce", "fig4", "--out", "f4"], tmp.path()).status.success());
    let csv = read(tmp.path(), "f4/fig4.csv");
    assert!(csv.starts_with("epoch,sim_0,"));
    assert_eq!(csv.lines().count(), 52);
}

#[test]
fn module_experiments_write_their_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cases = [
        (
            "moments",
            r#"{"params": {"data": {"kind": "gaussian", "n": 2, "m": 100, "mean": [1, 0], "cov": [[1, 0], [0, 1]]},
                "rule": "simple_hebb", "eta": 0.01, "epochs": 5, "w0": [0.1, 0.1]}}"#,
            vec!["moments.json", "prediction.csv"],
        ),
        (
            "boolean",
            r#"{"params": {"n": 2, "learn": {"restarts": 64, "hidden_epochs": 1, "top_epochs": 10, "eta0": 0.1,
                "hidden_init_std": 1.0, "top_init_std": 0.1}}}"#,
            vec!["census.csv", "details.json"],
        ),
        (
            "ssh",
            r#"{"params": {"data": {"kind": "explicit", "inputs": [[1, 1], [1, -1]], "targets": [[1], [1]]}}}"#,
            vec!["verdict.json"],
        ),
        (
            "hopfield",
            r#"{"params": {"n": 3, "rule": {"alpha": 1, "beta": 1, "gamma": 0}, "memories": [[1, -1, 1]]}}"#,
            vec!["search.json", "orientation.csv"],
        ),
        (
            "channel",
            r#"{"params": {"algorithm": {"kind": {"kind": "pwgb"}, "perturbation_scale": 1e-4,
                "reverse_on_failure": true, "precision_bits": 64},
                "sweep": {"kind": "width", "hidden": [3, 5, 7]}, "fit": "log_log", "trials": 20}}"#,
            vec!["table8.md", "table8.csv", "scaling_points.csv", "scaling_trials.csv", "fit.json"],
        ),
        (
            "deep-targets",
            r#"{"params": {"layer_sizes": [20, 8, 20], "n_clusters": 3, "per_cluster": 10, "flip_prob": 0.05,
                "epochs": 3, "seed": 1}}"#,
            vec!["errors.csv", "summary.json"],
        ),
    ];
    for (cmd, body, files) in cases {
        let cfg = write(d, &format!("{cmd}.json"), body);
        let out = locallearn(&[cmd, "--config", &cfg, "--out", cmd], d);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let manifest: serde_json::Value = serde_json::from_str(&read(d, &format!("{cmd}/manifest.json"))).unwrap();
        let listed: Vec<&str> = manifest["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap()).collect();
        assert_eq!(listed, files, "{cmd}");
        for f in files {
            assert!(d.join(cmd).join(f).exists(), "{cmd}/{f}");
        }
    }
}
