//! Scorers behind a common [`Objective`] interface, and the counting,
//! memoizing [`Evaluator`] the searchers draw their budget from.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fingerprint::{fingerprint, tanimoto, Fingerprint};
use super::{penalized_logp, qed};
use crate::molgraph::Molecule;
use crate::smiles::write_canonical;

/// Score given to molecules an objective refuses: the empty molecule, and
/// molecules outside a similarity constraint.
pub const SENTINEL: f64 = f64::NEG_INFINITY;

pub trait Objective {
    fn name(&self) -> &str;

    /// Reward of `mol`, or [`SENTINEL`].
    fn score(&self, mol: &Molecule) -> f64;

    /// Known range of finite scores, if bounded.
    fn bounds(&self) -> Option<(f64, f64)> {
        None
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Qed;

impl Objective for Qed {
    fn name(&self) -> &str {
        "qed"
    }

    fn score(&self, mol: &Molecule) -> f64 {
        qed(mol).unwrap_or(SENTINEL)
    }

    fn bounds(&self) -> Option<(f64, f64)> {
        Some((0.0, 1.0))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PenalizedLogP;

impl Objective for PenalizedLogP {
    fn name(&self) -> &str {
        "plogp"
    }

    fn score(&self, mol: &Molecule) -> f64 {
        penalized_logp(mol).unwrap_or(SENTINEL)
    }
}

/// Penalized logP gated by Tanimoto similarity to a start molecule.
#[derive(Clone, Debug)]
pub struct ConstrainedObjective {
    start: Fingerprint,
    delta: f64,
}

impl ConstrainedObjective {
    pub fn new(start: &Molecule, delta: f64) -> Self {
        assert!((0.0..=1.0).contains(&delta), "delta {delta} outside [0, 1]");
        ConstrainedObjective {
            start: fingerprint(start),
            delta,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn similarity(&self, mol: &Molecule) -> f64 {
        tanimoto(&fingerprint(mol), &self.start).expect("fingerprints share the default width")
    }

    pub fn is_feasible(&self, mol: &Molecule) -> bool {
        !mol.is_empty() && self.similarity(mol) >= self.delta
    }
}

impl Objective for ConstrainedObjective {
    fn name(&self) -> &str {
        "constrained_plogp"
    }

    fn score(&self, mol: &Molecule) -> f64 {
        if self.is_feasible(mol) {
            PenalizedLogP.score(mol)
        } else {
            SENTINEL
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Qed,
    Plogp,
}

impl ObjectiveKind {
    pub fn build(self) -> Box<dyn Objective> {
        match self {
            ObjectiveKind::Qed => Box::new(Qed),
            ObjectiveKind::Plogp => Box::new(PenalizedLogP),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Qed => "qed",
            ObjectiveKind::Plogp => "plogp",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qed" => Ok(ObjectiveKind::Qed),
            "plogp" => Ok(ObjectiveKind::Plogp),
            other => Err(format!("unknown objective '{other}' (expected qed or plogp)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("objective evaluation budget of {0} exhausted")]
pub struct BudgetExhausted(pub u64);

/// Wraps an objective with an evaluation counter, an optional hard limit and
/// a cache keyed by canonical SMILES. Every request counts against the
/// budget, cached or not, so that searchers that revisit states pay for it.
pub struct Evaluator<'a> {
    objective: &'a dyn Objective,
    cache: Option<HashMap<String, f64>>,
    evals: u64,
    limit: Option<u64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a dyn Objective, limit: Option<u64>) -> Self {
        Evaluator {
            objective,
            cache: Some(HashMap::new()),
            evals: 0,
            limit,
        }
    }

    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn objective(&self) -> &'a dyn Objective {
        self.objective
    }

    pub fn evals(&self) -> u64 {
        self.evals
    }

    pub fn limit(&self) -> Option<u64> {
        self.limit
    }

    pub fn remaining(&self) -> Option<u64> {
        self.limit.map(|l| l.saturating_sub(self.evals))
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining() == Some(0)
    }

    /// Scores `mol`, whose canonical SMILES is `smiles`.
    pub fn score(&mut self, mol: &Molecule, smiles: &str) -> Result<f64, BudgetExhausted> {
        if let Some(limit) = self.limit {
            if self.evals >= limit {
                return Err(BudgetExhausted(limit));
            }
        }
        self.evals += 1;
        let objective = self.objective;
        Ok(match &mut self.cache {
            Some(cache) => {
                if let Some(&v) = cache.get(smiles) {
                    v
                } else {
                    let v = objective.score(mol);
                    cache.insert(smiles.to_owned(), v);
                    v
                }
            }
            None => objective.score(mol),
        })
    }

    pub fn score_mol(&mut self, mol: &Molecule) -> Result<f64, BudgetExhausted> {
        let smiles = write_canonical(mol);
        self.score(mol, &smiles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse;

    #[test]
    fn constrained_objective_threshold() {
        let start = parse("CC(=O)Nc1ccc(O)cc1").unwrap();
        let c0 = ConstrainedObjective::new(&start, 0.0);
        let c6 = ConstrainedObjective::new(&start, 0.6);
        let plain = PenalizedLogP.score(&start);
        assert_eq!(c6.score(&start), plain);
        let other = parse("CCCCCCCC").unwrap();
        assert_eq!(c0.score(&other), PenalizedLogP.score(&other));
        assert!(c6.similarity(&other) < 0.6);
        assert_eq!(c6.score(&other), SENTINEL);
    }

    #[test]
    fn empty_molecule_gets_the_sentinel() {
        assert_eq!(Qed.score(&Molecule::empty()), SENTINEL);
        assert_eq!(PenalizedLogP.score(&Molecule::empty()), SENTINEL);
    }

    #[test]
    fn evaluator_counts_cache_hits_and_enforces_the_limit() {
        let mut ev = Evaluator::new(&Qed, Some(3));
        let m = parse("CCO").unwrap();
        let a = ev.score_mol(&m).unwrap();
        let b = ev.score_mol(&m).unwrap();
        assert_eq!(a, b);
        assert_eq!(ev.evals(), 2);
        ev.score_mol(&m).unwrap();
        assert!(ev.is_exhausted());
        assert_eq!(ev.score_mol(&m), Err(BudgetExhausted(3)));
        assert_eq!(ev.evals(), 3);
    }

    #[test]
    fn objective_kind_parsing() {
        assert_eq!("qed".parse::<ObjectiveKind>(), Ok(ObjectiveKind::Qed));
        assert_eq!("plogp".parse::<ObjectiveKind>(), Ok(ObjectiveKind::Plogp));
        assert!("logp".parse::<ObjectiveKind>().is_err());
    }
}
