//! UCT tree search over unit edits.
//!
//! Each iteration selects a leaf by UCT, expands it into its top `k`
//! successors ranked by immediate score, gives each new child one ε-greedy
//! rollout and backs the exponentially scaled reward up to the root. After
//! `num_iterations` iterations the root advances to its most visited child,
//! keeping that child's subtree.

mod search;
mod trace;
mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::ActionSpace;
use crate::molgraph::Molecule;
use crate::properties::Objective;

pub use search::{Search, SearchStats};
pub use trace::{Phase, TraceEvent};
pub use tree::{uct_score, NodeId, SearchNode, Tree};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Exploration constant.
    pub c: f64,
    /// Expansion width; `None` keeps every successor.
    pub k: Option<usize>,
    /// Probability of a random rollout step.
    pub epsilon: f64,
    pub rollout_depth: usize,
    /// Reward scaling factor.
    pub alpha: f64,
    /// Iterations per committed move.
    pub num_iterations: usize,
    /// Moves per episode.
    pub max_steps: usize,
    pub seed: u64,
    pub space: ActionSpace,
    /// Hard cap on objective evaluations for the whole episode. When set,
    /// each move may spend at most its even share of what remains.
    pub max_evals: Option<u64>,
    /// Verify selection, validity and visit conservation as the search runs.
    #[serde(default)]
    pub debug_checks: bool,
    /// Record a [`TraceEvent`] stream.
    #[serde(default)]
    pub trace: bool,
    /// Fill in `wall_ms`; off by default so results stay reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            c: 1.0,
            k: Some(10),
            epsilon: 0.1,
            rollout_depth: 5,
            alpha: 1.0,
            num_iterations: 100,
            max_steps: 38,
            seed: 0,
            space: ActionSpace::default(),
            max_evals: None,
            debug_checks: false,
            trace: false,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("exploration constant must be finite and >= 0, got {0}")]
    Exploration(f64),
    #[error("expansion width must be at least 1")]
    Width,
    #[error("epsilon must lie in [0, 1], got {0}")]
    Epsilon(f64),
    #[error("alpha must be finite, got {0}")]
    Alpha(f64),
    #[error("at least one iteration per move is required")]
    Iterations,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(ConfigError::Exploration(self.c));
        }
        if self.k == Some(0) {
            return Err(ConfigError::Width);
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(ConfigError::Epsilon(self.epsilon));
        }
        if !self.alpha.is_finite() {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if self.num_iterations == 0 {
            return Err(ConfigError::Iterations);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub step: usize,
    pub smiles: String,
    #[serde(with = "score_serde")]
    pub score: f64,
    #[serde(with = "score_serde")]
    pub best_so_far: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub best_molecule: String,
    #[serde(with = "score_serde")]
    pub best_score: f64,
    pub trajectory: Vec<TrajectoryStep>,
    pub iterations_used: u64,
    pub evals_used: u64,
    pub wall_ms: u64,
}

/// Maps rewards onto positive backup values with `exp(alpha * r)`. Bounded
/// objectives use the raw reward. Unbounded ones are min-max normalized over
/// every reward seen so far, and sit at 0.5 until two distinct values have
/// been observed. The sentinel maps to 0.
#[derive(Clone, Debug)]
pub struct RewardScaler {
    alpha: f64,
    bounded: bool,
    min: f64,
    max: f64,
}

impl RewardScaler {
    pub fn new(alpha: f64, bounded: bool) -> Self {
        RewardScaler {
            alpha,
            bounded,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    pub fn for_objective(alpha: f64, objective: &dyn Objective) -> Self {
        Self::new(alpha, objective.bounds().is_some())
    }

    pub fn scale(&mut self, reward: f64) -> f64 {
        if !reward.is_finite() {
            return 0.0;
        }
        let normalized = if self.bounded {
            reward
        } else {
            self.min = self.min.min(reward);
            self.max = self.max.max(reward);
            if self.max > self.min {
                (reward - self.min) / (self.max - self.min)
            } else {
                0.5
            }
        };
        (self.alpha * normalized).exp()
    }
}

/// Runs one episode from `start`. `filter`, when given, must accept a
/// successor before it can become a tree node.
pub fn run_episode(
    start: &Molecule,
    cfg: &SearchConfig,
    objective: &dyn Objective,
    filter: Option<&dyn Fn(&Molecule) -> bool>,
) -> Result<EpisodeResult, ConfigError> {
    Ok(Search::new(start, cfg.clone(), objective, filter)?.run())
}

impl fmt::Display for TrajectoryStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({:.4})", self.step, self.smiles, self.score)
    }
}

/// Serializes non-finite scores as `null` and reads `null` back as the
/// sentinel.
pub(crate) mod score_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::properties::SENTINEL;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(SENTINEL))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        let bad = |f: fn(&mut SearchConfig)| {
            let mut c = SearchConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.c = -1.0));
        assert!(bad(|c| c.k = Some(0)));
        assert!(bad(|c| c.epsilon = 1.5));
        assert!(bad(|c| c.alpha = f64::NAN));
        assert!(bad(|c| c.num_iterations = 0));
    }

    #[test]
    fn scaler_orders_and_handles_the_sentinel() {
        let mut s = RewardScaler::new(1.0, true);
        assert!(s.scale(0.9) > s.scale(0.3));
        assert_eq!(s.scale(f64::NEG_INFINITY), 0.0);
        let mut flat = RewardScaler::new(0.0, false);
        assert_eq!(flat.scale(-7.0), 1.0);
        assert_eq!(flat.scale(12.0), 1.0);
        let mut u = RewardScaler::new(1.0, false);
        assert_eq!(u.scale(3.0), 0.5f64.exp());
        assert_eq!(u.scale(5.0), 1f64.exp());
        assert_eq!(u.scale(3.0), 1.0);
    }
}
