//! Reference searchers sharing the MCTS budget rules.
//!
//! Both restart from the start molecule until the evaluation budget runs
//! out. Without a budget they make a single pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actions::{Action, ActionSpace};
use crate::mcts::{EpisodeResult, TrajectoryStep};
use crate::molgraph::Molecule;
use crate::properties::{BudgetExhausted, Evaluator, Objective, SENTINEL};
use crate::smiles::write_canonical;

/// Shared bookkeeping for one baseline episode.
struct Walker<'a> {
    space: ActionSpace,
    max_steps: usize,
    filter: Option<&'a dyn Fn(&Molecule) -> bool>,
    evaluator: Evaluator<'a>,
    best: Option<(f64, String)>,
    best_path: Vec<TrajectoryStep>,
}

impl<'a> Walker<'a> {
    fn new(
        objective: &'a dyn Objective,
        space: ActionSpace,
        max_steps: usize,
        max_evals: Option<u64>,
        filter: Option<&'a dyn Fn(&Molecule) -> bool>,
    ) -> Self {
        Walker {
            space,
            max_steps,
            filter,
            evaluator: Evaluator::new(objective, max_evals),
            best: None,
            best_path: Vec::new(),
        }
    }

    fn successors(&self, mol: &Molecule) -> Vec<Action> {
        let mut actions = self.space.enumerate(mol);
        if let Some(f) = self.filter {
            actions.retain(|a| f(&a.result));
        }
        actions
    }

    fn score(&mut self, mol: &Molecule, smiles: &str) -> Result<f64, BudgetExhausted> {
        let s = self.evaluator.score(mol, smiles)?;
        if s != SENTINEL {
            let better = match &self.best {
                None => true,
                Some((b, m)) => s > *b || (s == *b && smiles < m.as_str()),
            };
            if better {
                self.best = Some((s, smiles.to_owned()));
            }
        }
        Ok(s)
    }

    /// Scores every successor and returns them best first (stable on SMILES).
    fn ranked(&mut self, mol: &Molecule) -> Result<Vec<(f64, Action)>, BudgetExhausted> {
        let mut out = Vec::new();
        for a in self.successors(mol) {
            let s = self.score(&a.result, &a.smiles)?;
            if s != SENTINEL {
                out.push((s, a));
            }
        }
        out.sort_by(|x, y| y.0.total_cmp(&x.0));
        Ok(out)
    }

    /// Keeps `path` as the reported trajectory if it reached the best score.
    fn offer_path(&mut self, path: Vec<TrajectoryStep>) {
        if let Some((b, _)) = &self.best {
            if path.iter().any(|s| s.score == *b) || self.best_path.is_empty() {
                self.best_path = path;
            }
        }
    }

    fn finish(self, start: &Molecule, restarts: u64) -> EpisodeResult {
        let (best_score, best_molecule) = match self.best {
            Some((s, m)) => (s, m),
            None => (SENTINEL, write_canonical(start)),
        };
        let mut trajectory = self.best_path;
        let mut running = SENTINEL;
        for step in &mut trajectory {
            running = running.max(step.score);
            step.best_so_far = running;
        }
        EpisodeResult {
            best_molecule,
            best_score,
            trajectory,
            iterations_used: restarts,
            evals_used: self.evaluator.evals(),
            wall_ms: 0,
        }
    }
}

fn step(n: usize, smiles: String, score: f64) -> TrajectoryStep {
    TrajectoryStep {
        step: n,
        smiles,
        score,
        best_so_far: SENTINEL,
    }
}

fn score_start(w: &mut Walker<'_>, start: &Molecule) -> bool {
    if start.is_empty() {
        return true;
    }
    w.score(start, &write_canonical(start)).is_ok()
}

/// Uniformly random legal moves, every visited molecule scored.
pub fn random_walk(
    start: &Molecule,
    objective: &dyn Objective,
    space: ActionSpace,
    max_steps: usize,
    max_evals: Option<u64>,
    seed: u64,
    filter: Option<&dyn Fn(&Molecule) -> bool>,
) -> EpisodeResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Walker::new(objective, space, max_steps, max_evals, filter);
    let mut restarts = 0;
    if !score_start(&mut w, start) {
        return w.finish(start, 0);
    }
    'restarts: loop {
        restarts += 1;
        let mut mol = start.clone();
        let mut path = Vec::new();
        for n in 1..=w.max_steps {
            let actions = w.successors(&mol);
            if actions.is_empty() {
                break;
            }
            let pick = rng.gen_range(0..actions.len());
            let a = actions.into_iter().nth(pick).expect("index in range");
            match w.score(&a.result, &a.smiles) {
                Ok(s) => path.push(step(n, a.smiles, s)),
                Err(_) => {
                    w.offer_path(path);
                    break 'restarts;
                }
            }
            mol = a.result;
        }
        w.offer_path(path);
        if max_evals.is_none() || w.evaluator.is_exhausted() || w.max_steps == 0 {
            break;
        }
    }
    w.finish(start, restarts)
}

/// Steepest ascent on the immediate score, restarted as a limited
/// discrepancy search. Pass `d` follows every path on which the ranks of the
/// chosen moves (0 for the best) sum to exactly `d`, so pass 0 is plain
/// greedy and pass 1 deviates once to a second-best move. Passes continue
/// until the budget runs out or no path with `d` discrepancies exists.
pub fn greedy(
    start: &Molecule,
    objective: &dyn Objective,
    space: ActionSpace,
    max_steps: usize,
    max_evals: Option<u64>,
    filter: Option<&dyn Fn(&Molecule) -> bool>,
) -> EpisodeResult {
    let mut w = Walker::new(objective, space, max_steps, max_evals, filter);
    if !score_start(&mut w, start) || max_steps == 0 {
        return w.finish(start, 0);
    }
    let mut probes = 0;
    for d in 0.. {
        let mut path = Vec::new();
        match w.probe(start, d, &mut path, &mut probes) {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
        if max_evals.is_none() {
            break;
        }
    }
    w.finish(start, probes)
}

impl Walker<'_> {
    /// Follows every continuation of `path` from `mol` that spends exactly
    /// `left` discrepancies. Returns the number of complete paths.
    fn probe(
        &mut self,
        mol: &Molecule,
        left: usize,
        path: &mut Vec<TrajectoryStep>,
        probes: &mut u64,
    ) -> Result<u64, BudgetExhausted> {
        let depth = path.len();
        let ranked = if depth == self.max_steps {
            Vec::new()
        } else {
            self.ranked(mol)?
        };
        if ranked.is_empty() {
            if left > 0 {
                return Ok(0);
            }
            *probes += 1;
            self.offer_path(path.clone());
            return Ok(1);
        }
        let last = depth + 1 == self.max_steps;
        let mut complete = 0;
        for (rank, (s, a)) in ranked.into_iter().enumerate() {
            if rank > left {
                break;
            }
            if last && rank != left {
                continue;
            }
            path.push(step(depth + 1, a.smiles, s));
            let r = self.probe(&a.result, left - rank, path, probes);
            path.pop();
            complete += r?;
        }
        Ok(complete)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::properties::Qed;
    use crate::smiles::parse;

    #[test]
    fn greedy_is_seed_free_and_climbs() {
        let a = greedy(&Molecule::empty(), &Qed, ActionSpace::default(), 6, None, None);
        let b = greedy(&Molecule::empty(), &Qed, ActionSpace::default(), 6, None, None);
        assert_eq!(a, b);
        assert_eq!(a.trajectory.len(), 6);
        assert_eq!(a.iterations_used, 1);
        assert!(a.best_score >= a.trajectory[0].score);
    }

    #[test]
    fn random_walk_spends_the_whole_budget() {
        let r = random_walk(&Molecule::empty(), &Qed, ActionSpace::default(), 5, Some(37), 3, None);
        assert_eq!(r.evals_used, 37);
        assert!(r.iterations_used >= 7);
        let other = random_walk(&Molecule::empty(), &Qed, ActionSpace::default(), 5, Some(37), 4, None);
        assert_eq!(other.evals_used, 37);
    }

    #[test]
    fn greedy_first_pass_is_steepest_ascent() {
        let r = greedy(&Molecule::empty(), &Qed, ActionSpace::default(), 3, None, None);
        let mut mol = Molecule::empty();
        for step in &r.trajectory {
            let best = ActionSpace::default()
                .enumerate(&mol)
                .into_iter()
                .max_by(|a, b| Qed.score(&a.result).total_cmp(&Qed.score(&b.result)).then(b.smiles.cmp(&a.smiles)))
                .unwrap();
            assert_eq!(step.smiles, best.smiles);
            mol = best.result;
        }
    }

    #[test]
    fn greedy_restarts_until_the_budget_is_gone() {
        let start = parse("CCO").unwrap();
        let r = greedy(&start, &Qed, ActionSpace::default(), 3, Some(500), None);
        assert_eq!(r.evals_used, 500);
        assert!(r.iterations_used > 1);
        assert!(r.best_score >= Qed.score(&start));
    }
}
