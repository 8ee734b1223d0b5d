//! Summary statistics and the CSV / JSON writers.
//!
//! CSV columns: `task,objective,seed,delta,rank,smiles,score,improvement,evals,wall_ms`,
//! one row per episode. Property runs list episodes by descending score and
//! `rank` is the position in that order. Constrained runs keep start-file
//! order and `rank` is the 1-based start molecule number. Empty cells mean
//! "not applicable" (or no feasible molecule for `score`).

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EpisodeRecord, HarnessError, RunRecord, TaskKind, TaskSpec};
use crate::mcts::score_serde;
use crate::properties::SENTINEL;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedMolecule {
    pub smiles: String,
    pub score: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Best three distinct molecules over all episodes, descending.
    pub top3: Vec<RankedMolecule>,
    #[serde(with = "score_serde")]
    pub median_score: f64,
    pub mean_improvement: Option<f64>,
    /// Sample standard deviation of the improvements.
    pub sd_improvement: Option<f64>,
    /// Fraction of episodes whose best molecule passes the similarity
    /// threshold on re-verification.
    pub success_rate: Option<f64>,
    pub total_evals: u64,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return SENTINEL;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Recomputes the summary of `episodes` from scratch.
pub fn aggregate(spec: &TaskSpec, episodes: &[EpisodeRecord]) -> Aggregate {
    let mut ranked: Vec<RankedMolecule> = Vec::new();
    for e in property_order(episodes) {
        if !e.result.best_score.is_finite() || ranked.iter().any(|r| r.smiles == e.result.best_molecule) {
            continue;
        }
        ranked.push(RankedMolecule {
            smiles: e.result.best_molecule.clone(),
            score: e.result.best_score,
            seed: e.seed,
        });
        if ranked.len() == 3 {
            break;
        }
    }
    let scores: Vec<f64> = episodes.iter().map(|e| e.result.best_score).collect();
    let improvements: Vec<f64> = episodes.iter().filter_map(|e| e.improvement).collect();
    let (mean_improvement, sd_improvement) = if improvements.is_empty() {
        (None, None)
    } else {
        let n = improvements.len() as f64;
        let mean = improvements.iter().sum::<f64>() / n;
        let sd = if improvements.len() > 1 {
            (improvements.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        (Some(mean), Some(sd))
    };
    let success_rate = match (spec.task, spec.delta) {
        (TaskKind::ConstrainedOpt, Some(delta)) if !episodes.is_empty() => {
            let ok = episodes
                .iter()
                .filter(|e| e.result.best_score.is_finite() && e.similarity.is_some_and(|s| s >= delta))
                .count();
            Some(ok as f64 / episodes.len() as f64)
        }
        _ => None,
    };
    Aggregate {
        top3: ranked,
        median_score: median(&scores),
        mean_improvement,
        sd_improvement,
        success_rate,
        total_evals: episodes.iter().map(|e| e.result.evals_used).sum(),
    }
}

/// Episodes by descending score, then SMILES, then seed.
fn property_order(episodes: &[EpisodeRecord]) -> Vec<&EpisodeRecord> {
    let mut v: Vec<&EpisodeRecord> = episodes.iter().collect();
    v.sort_by(|a, b| {
        b.result
            .best_score
            .total_cmp(&a.result.best_score)
            .then_with(|| a.result.best_molecule.cmp(&b.result.best_molecule))
            .then_with(|| a.seed.cmp(&b.seed))
    });
    v
}

fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => v.to_string(),
        _ => String::new(),
    }
}

pub fn to_csv(record: &RunRecord) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "task", "objective", "seed", "delta", "rank", "smiles", "score", "improvement", "evals", "wall_ms",
    ])?;
    let rows: Vec<(usize, &EpisodeRecord)> = match record.spec.task {
        TaskKind::PropertyOpt => property_order(&record.episodes)
            .into_iter()
            .enumerate()
            .map(|(i, e)| (i + 1, e))
            .collect(),
        TaskKind::ConstrainedOpt => record
            .episodes
            .iter()
            .map(|e| (e.start_index.unwrap_or(0) + 1, e))
            .collect(),
    };
    let task = record.spec.task.to_string();
    let objective = record.spec.objective.to_string();
    for (rank, e) in rows {
        w.write_record([
            task.clone(),
            objective.clone(),
            e.seed.to_string(),
            cell(record.spec.delta),
            rank.to_string(),
            e.result.best_molecule.clone(),
            cell(Some(e.result.best_score)),
            cell(e.improvement),
            e.result.evals_used.to_string(),
            e.result.wall_ms.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_json(record: &RunRecord) -> Result<String, HarnessError> {
    let mut s = serde_json::to_string_pretty(record)?;
    s.push('\n');
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

pub fn emit_report(record: &RunRecord, format: ReportFormat, path: &Path) -> Result<(), HarnessError> {
    let text = match format {
        ReportFormat::Csv => to_csv(record)?,
        ReportFormat::Json => to_json(record)?,
    };
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcts::EpisodeResult;
    use crate::properties::ObjectiveKind;

    fn episode(seed: u64, smiles: &str, score: f64, improvement: Option<f64>) -> EpisodeRecord {
        EpisodeRecord {
            start_index: improvement.map(|_| 0),
            start_smiles: String::new(),
            start_score: None,
            seed,
            similarity: improvement.map(|_| 0.5),
            improvement,
            result: EpisodeResult {
                best_molecule: smiles.into(),
                best_score: score,
                trajectory: Vec::new(),
                iterations_used: 1,
                evals_used: 10,
                wall_ms: 0,
            },
        }
    }

    #[test]
    fn top3_is_distinct_and_descending() {
        let spec = TaskSpec::property(ObjectiveKind::Qed, 38);
        let eps = vec![
            episode(0, "CCO", 0.4, None),
            episode(1, "CCN", 0.7, None),
            episode(2, "CCN", 0.7, None),
            episode(3, "CCC", 0.5, None),
            episode(4, "CC", 0.1, None),
        ];
        let agg = aggregate(&spec, &eps);
        let got: Vec<&str> = agg.top3.iter().map(|r| r.smiles.as_str()).collect();
        assert_eq!(got, ["CCN", "CCC", "CCO"]);
        assert_eq!(agg.median_score, 0.5);
        assert_eq!(agg.total_evals, 50);
        assert_eq!(agg.success_rate, None);
    }

    #[test]
    fn improvement_statistics() {
        let spec = TaskSpec::constrained("x", 0.4);
        let eps = vec![episode(0, "CC", 1.0, Some(1.0)), episode(1, "CO", 3.0, Some(3.0))];
        let agg = aggregate(&spec, &eps);
        assert_eq!(agg.mean_improvement, Some(2.0));
        assert_eq!(agg.sd_improvement, Some(2f64.sqrt()));
        assert_eq!(agg.success_rate, Some(1.0));
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[]), SENTINEL);
    }
}
