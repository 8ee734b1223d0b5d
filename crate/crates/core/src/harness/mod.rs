//! Benchmark orchestration: property and constrained optimization tasks,
//! baseline searchers, SMILES list loading and report output.

mod baseline;
mod dataset;
mod report;

use std::fmt;
use std::path::PathBuf;

use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mcts::{self, EpisodeResult, SearchConfig};
use crate::molgraph::Molecule;
use crate::properties::{
    fingerprint, tanimoto, ConstrainedObjective, Objective, ObjectiveKind, PenalizedLogP,
};
use crate::smiles::{parse, write_canonical};

pub use baseline::{greedy, random_walk};
pub use dataset::{load_molecule_list, LineError, LoadedMolecule, MoleculeList};
pub use report::{aggregate, emit_report, median, to_csv, to_json, Aggregate, RankedMolecule, ReportFormat};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid task: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    PropertyOpt,
    ConstrainedOpt,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::PropertyOpt => "property_opt",
            TaskKind::ConstrainedOpt => "constrained_opt",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mcts,
    RandomWalk,
    Greedy,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Mcts => "mcts",
            Method::RandomWalk => "random_walk",
            Method::Greedy => "greedy",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselinePolicy {
    RandomWalk,
    Greedy,
}

impl From<BaselinePolicy> for Method {
    fn from(p: BaselinePolicy) -> Self {
        match p {
            BaselinePolicy::RandomWalk => Method::RandomWalk,
            BaselinePolicy::Greedy => Method::Greedy,
        }
    }
}

/// Everything needed to reproduce a run. The `max_steps` and `seed` fields
/// of `search` are replaced per episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task: TaskKind,
    pub objective: ObjectiveKind,
    pub max_steps: usize,
    pub delta: Option<f64>,
    /// Start molecules for the constrained task; property runs start empty.
    pub start_file: Option<PathBuf>,
    pub num_seeds: usize,
    pub base_seed: u64,
    pub search: SearchConfig,
}

impl TaskSpec {
    pub fn property(objective: ObjectiveKind, max_steps: usize) -> Self {
        TaskSpec {
            task: TaskKind::PropertyOpt,
            objective,
            max_steps,
            delta: None,
            start_file: None,
            num_seeds: 1,
            base_seed: 0,
            search: SearchConfig::default(),
        }
    }

    pub fn constrained(start_file: impl Into<PathBuf>, delta: f64) -> Self {
        TaskSpec {
            task: TaskKind::ConstrainedOpt,
            objective: ObjectiveKind::Plogp,
            max_steps: 20,
            delta: Some(delta),
            start_file: Some(start_file.into()),
            num_seeds: 1,
            base_seed: 0,
            search: SearchConfig::default(),
        }
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.num_seeds as u64).map(|i| self.base_seed.wrapping_add(i))
    }

    pub fn episode_config(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            max_steps: self.max_steps,
            seed,
            ..self.search.clone()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.max_steps == 0 {
            return fail("at least one step is required".into());
        }
        if self.num_seeds == 0 {
            return fail("at least one seed is required".into());
        }
        if let Err(e) = self.search.validate() {
            return fail(e.to_string());
        }
        match self.task {
            TaskKind::PropertyOpt => {
                if self.delta.is_some() {
                    return fail("a similarity threshold only applies to constrained runs".into());
                }
                if self.start_file.is_some() {
                    return fail("property runs start from the empty molecule".into());
                }
            }
            TaskKind::ConstrainedOpt => {
                match self.delta {
                    Some(d) if (0.0..=1.0).contains(&d) => {}
                    Some(d) => return fail(format!("delta {d} outside [0, 1]")),
                    None => return fail("constrained runs need a delta".into()),
                }
                if self.start_file.is_none() {
                    return fail("constrained runs need a start file".into());
                }
                if self.objective != ObjectiveKind::Plogp {
                    return fail("the constrained task optimizes plogp".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// Position in the start file (constrained runs only).
    pub start_index: Option<usize>,
    pub start_smiles: String,
    /// Penalized logP of the start molecule (constrained runs only).
    pub start_score: Option<f64>,
    pub seed: u64,
    /// Similarity of the best molecule to the start, recomputed after the run.
    pub similarity: Option<f64>,
    pub improvement: Option<f64>,
    pub result: EpisodeResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec: TaskSpec,
    pub method: Method,
    pub episodes: Vec<EpisodeRecord>,
    /// Start-file lines that failed to parse.
    pub skipped_lines: usize,
    pub parse_warnings: usize,
    pub aggregate: Aggregate,
}

/// One episode of `method` from `start`.
pub fn run_method(
    method: Method,
    start: &Molecule,
    objective: &dyn Objective,
    cfg: &SearchConfig,
    filter: Option<&dyn Fn(&Molecule) -> bool>,
) -> EpisodeResult {
    match method {
        Method::Mcts => mcts::run_episode(start, cfg, objective, filter).expect("config validated"),
        Method::RandomWalk => random_walk(
            start,
            objective,
            cfg.space,
            cfg.max_steps,
            cfg.max_evals,
            cfg.seed,
            filter,
        ),
        Method::Greedy => greedy(start, objective, cfg.space, cfg.max_steps, cfg.max_evals, filter),
    }
}

pub fn run_task(spec: &TaskSpec, method: Method) -> Result<RunRecord, HarnessError> {
    spec.validate()?;
    let mut skipped_lines = 0;
    let mut parse_warnings = 0;
    let mut episodes = Vec::new();
    match spec.task {
        TaskKind::PropertyOpt => {
            let objective = spec.objective.build();
            for seed in spec.seeds() {
                let result =
                    run_method(method, &Molecule::empty(), &*objective, &spec.episode_config(seed), None);
                info!("{method} seed {seed}: {} {:.4}", result.best_molecule, result.best_score);
                episodes.push(EpisodeRecord {
                    start_index: None,
                    start_smiles: String::new(),
                    start_score: None,
                    seed,
                    similarity: None,
                    improvement: None,
                    result,
                });
            }
        }
        TaskKind::ConstrainedOpt => {
            let path = spec.start_file.as_ref().expect("validated");
            let delta = spec.delta.expect("validated");
            let list = load_molecule_list(path)?;
            skipped_lines = list.errors.len();
            parse_warnings = list.warnings;
            if list.molecules.is_empty() {
                return Err(HarnessError::Config(format!(
                    "{} holds no usable molecules",
                    path.display()
                )));
            }
            for (index, entry) in list.molecules.iter().enumerate() {
                let start = &entry.mol;
                let objective = ConstrainedObjective::new(start, delta);
                let feasible = |m: &Molecule| objective.is_feasible(m);
                let start_score = PenalizedLogP.score(start);
                for seed in spec.seeds() {
                    let result =
                        run_method(method, start, &objective, &spec.episode_config(seed), Some(&feasible));
                    let similarity = posthoc_similarity(start, &result.best_molecule);
                    let improvement = result.best_score - start_score;
                    info!(
                        "{method} start {index} seed {seed} delta {delta}: {} +{improvement:.3} (sim {similarity:.3})",
                        result.best_molecule
                    );
                    episodes.push(EpisodeRecord {
                        start_index: Some(index),
                        start_smiles: write_canonical(start),
                        start_score: Some(start_score),
                        seed,
                        similarity: Some(similarity),
                        improvement: Some(improvement),
                        result,
                    });
                }
            }
        }
    }
    let aggregate = aggregate(spec, &episodes);
    Ok(RunRecord {
        spec: spec.clone(),
        method,
        episodes,
        skipped_lines,
        parse_warnings,
        aggregate,
    })
}

pub fn run_property_task(spec: &TaskSpec) -> Result<RunRecord, HarnessError> {
    if spec.task != TaskKind::PropertyOpt {
        return Err(HarnessError::Config("expected a property_opt task".into()));
    }
    run_task(spec, Method::Mcts)
}

pub fn run_constrained_task(spec: &TaskSpec) -> Result<RunRecord, HarnessError> {
    if spec.task != TaskKind::ConstrainedOpt {
        return Err(HarnessError::Config("expected a constrained_opt task".into()));
    }
    run_task(spec, Method::Mcts)
}

pub fn run_baseline(spec: &TaskSpec, policy: BaselinePolicy) -> Result<RunRecord, HarnessError> {
    run_task(spec, policy.into())
}

/// Tanimoto similarity between `start` and the molecule written as `smiles`,
/// computed from scratch.
pub fn posthoc_similarity(start: &Molecule, smiles: &str) -> f64 {
    let mol = parse(smiles).expect("reported molecules are canonical SMILES");
    tanimoto(&fingerprint(&mol), &fingerprint(start)).expect("default widths match")
}
