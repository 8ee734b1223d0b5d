use std::process::{Command, Output};

use unitmcts_core::properties::{penalized_logp, qed};
use unitmcts_core::smiles::parse;

fn unitmcts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitmcts"))
        .args(args)
        .env_remove("UNITMCTS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL: [&str; 8] = ["--steps", "4", "--iters", "5", "--k", "3", "--rollout-depth", "1"];

#[test]
fn score_matches_the_library() {
    let out = unitmcts(&["score", "--smiles", "OCC", "--objective", "qed"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (smiles, value) = text.trim().split_once('\t').unwrap();
    assert_eq!(smiles, "CCO");
    assert_eq!(value.parse::<f64>().unwrap(), qed(&parse("CCO").unwrap()).unwrap());

    let out = unitmcts(&["score", "--smiles", "c1ccccc1", "--objective", "plogp"]);
    let value: f64 = stdout(&out).trim().split('\t').nth(1).unwrap().parse().unwrap();
    assert_eq!(value, penalized_logp(&parse("c1ccccc1").unwrap()).unwrap());
}

#[test]
fn prop_writes_one_csv_row_per_seed() {
    let mut args = vec!["prop", "--objective", "qed", "--seeds", "3", "--seed", "9"];
    args.extend(SMALL);
    let out = unitmcts(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "task,objective,seed,delta,rank,smiles,score,improvement,evals,wall_ms");
    assert_eq!(lines.len(), 4);
    let mut seeds: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    seeds.sort();
    assert_eq!(seeds, ["10", "11", "9"]);
    let scores: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    assert!(scores.iter().all(|s| (0.0..=1.0).contains(s)));
    assert_eq!(stdout(&unitmcts(&args)), text);
}

#[test]
fn seed_defaults_to_the_environment() {
    let mut args = vec!["prop", "--objective", "plogp"];
    args.extend(SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_unitmcts"))
        .args(&args)
        .env("UNITMCTS_SEED", "77")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().nth(1).unwrap().split(',').nth(2), Some("77"));
}

#[test]
fn json_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let mut args = vec!["prop", "--objective", "qed", "--format", "json", "--out", path.to_str().unwrap()];
    args.extend(SMALL);
    let out = unitmcts(&args);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(value["method"], "mcts");
    assert_eq!(value["episodes"][0]["result"]["trajectory"].as_array().unwrap().len(), 4);
}

#[test]
fn constrained_and_baseline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let starts = dir.path().join("starts.smi");
    std::fs::write(&starts, "# two starts\nCCOc1ccccc1\nnot_a_smiles\nCC(=O)NC\n").unwrap();
    let file = starts.to_str().unwrap();

    let mut args = vec!["constrained", "--start-file", file, "--delta", "0.4"];
    args.extend(SMALL);
    let out = unitmcts(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], "constrained_opt");
        assert_eq!(row[3], "0.4");
        assert_eq!(row[4], (i + 1).to_string());
        assert!(row[7].parse::<f64>().unwrap() >= 0.0);
    }

    let greedy = |seed: &str| {
        let mut args = vec![
            "baseline", "--policy", "greedy", "--start-file", file, "--delta", "0.4", "--max-evals", "300",
            "--seed", seed,
        ];
        args.extend(&SMALL[..2]);
        let out = unitmcts(&args);
        assert!(out.status.success());
        stdout(&out).lines().skip(1).map(|l| l.split(',').nth(5).unwrap().to_owned()).collect::<Vec<_>>()
    };
    assert_eq!(greedy("1"), greedy("2"));

    let out = unitmcts(&["baseline", "--policy", "random", "--objective", "qed", "--max-evals", "200", "--steps", "5"]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().nth(1).unwrap().ends_with(",200,0"));
}

#[test]
fn config_errors_exit_with_2() {
    for args in [
        vec!["prop", "--objective", "qed", "--c", "-1"],
        vec!["prop", "--objective", "qed", "--epsilon", "1.5"],
        vec!["prop", "--objective", "qed", "--steps", "0"],
        vec!["prop", "--objective", "qed", "--k", "0"],
        vec!["prop", "--objective", "tpsa"],
        vec!["constrained", "--start-file", "x.smi", "--delta", "1.5"],
        vec!["score", "--smiles", "C1CC", "--objective", "qed"],
        vec!["frobnicate"],
    ] {
        let out = unitmcts(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_failures_exit_with_1() {
    let out = unitmcts(&["constrained", "--start-file", "/nonexistent/starts.smi", "--delta", "0.2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/starts.smi"));

    let mut args = vec!["prop", "--objective", "qed", "--out", "/nonexistent/dir/out.csv"];
    args.extend(SMALL);
    assert_eq!(unitmcts(&args).status.code(), Some(1));
}
