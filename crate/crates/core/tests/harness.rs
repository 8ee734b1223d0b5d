use std::io::Write;

use unitmcts_core::harness::{
    aggregate, load_molecule_list, run_baseline, run_property_task, to_csv, to_json, BaselinePolicy,
    HarnessError, RunRecord, TaskSpec,
};
use unitmcts_core::mcts::SearchConfig;
use unitmcts_core::properties::ObjectiveKind;

fn small_spec(objective: ObjectiveKind, seeds: usize) -> TaskSpec {
    let mut spec = TaskSpec::property(objective, 6);
    spec.num_seeds = seeds;
    spec.search = SearchConfig {
        k: Some(4),
        rollout_depth: 2,
        num_iterations: 10,
        ..SearchConfig::default()
    };
    spec
}

#[test]
fn json_round_trip_reproduces_the_aggregate() {
    let record = run_property_task(&small_spec(ObjectiveKind::Plogp, 4)).unwrap();
    let text = to_json(&record).unwrap();
    let back: RunRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(back, record);
    assert_eq!(aggregate(&back.spec, &back.episodes), record.aggregate);
    assert_eq!(to_json(&back).unwrap(), text);
}

#[test]
fn property_report_rows_descend() {
    let record = run_property_task(&small_spec(ObjectiveKind::Qed, 5)).unwrap();
    let csv = to_csv(&record).unwrap();
    let scores: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
        .collect();
    assert_eq!(scores.len(), 5);
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    assert!(scores.iter().all(|s| (0.0..=1.0).contains(s)));
    let top: Vec<f64> = record.aggregate.top3.iter().map(|r| r.score).collect();
    assert!(top.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(top[0], scores[0]);
}

#[test]
fn greedy_ignores_the_seed_and_random_walk_does_not() {
    let mut spec = small_spec(ObjectiveKind::Qed, 4);
    spec.max_steps = 10;
    spec.search.max_evals = Some(400);
    let greedy = run_baseline(&spec, BaselinePolicy::Greedy).unwrap();
    let first = &greedy.episodes[0].result;
    assert!(greedy.episodes.iter().all(|e| e.result.best_molecule == first.best_molecule));
    let random = run_baseline(&spec, BaselinePolicy::RandomWalk).unwrap();
    let distinct: std::collections::BTreeSet<&str> =
        random.episodes.iter().map(|e| e.result.best_molecule.as_str()).collect();
    assert!(distinct.len() > 1);
    assert!(random.episodes.iter().all(|e| e.result.evals_used == 400));
}

#[test]
fn loader_keeps_order_and_collects_errors() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "#comment\nCCO\nC[C@@H](O)N\n\nC1CC\nc1ccccc1 benzene").unwrap();
    let list = load_molecule_list(file.path()).unwrap();
    let texts: Vec<&str> = list.molecules.iter().map(|m| m.text.as_str()).collect();
    assert_eq!(texts, ["CCO", "C[C@@H](O)N", "c1ccccc1"]);
    assert_eq!(list.errors.len(), 1);
    assert_eq!(list.errors[0].line, 5);
    assert_eq!(list.warnings, 1);
}

#[test]
fn loader_reports_unreadable_files() {
    let err = load_molecule_list(std::path::Path::new("/nonexistent/list.smi")).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }));
}

#[test]
fn bundled_sample_loads_cleanly() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/low_plogp_sample.smi");
    let list = load_molecule_list(std::path::Path::new(path)).unwrap();
    assert_eq!(list.molecules.len(), 50);
    assert!(list.errors.is_empty());
}
