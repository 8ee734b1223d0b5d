use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::trace::{Phase, TraceEvent};
use super::tree::{NodeId, SearchNode, Tree};
use super::{ConfigError, EpisodeResult, RewardScaler, SearchConfig, TrajectoryStep};
use crate::actions::Action;
use crate::molgraph::Molecule;
use crate::properties::{BudgetExhausted, Evaluator, Objective, SENTINEL};
use crate::smiles::write_canonical;

/// Counters kept while searching. The check counters only move when
/// `debug_checks` is on.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub iterations: u64,
    /// Iterations cut short by the evaluation budget and discarded.
    pub abandoned: u64,
    pub expansions: u64,
    /// Calls to backpropagate, each of which adds one visit to the root.
    pub backprops: u64,
    pub selection_checks: u64,
    pub selection_violations: u64,
    pub validity_checks: u64,
    pub validity_violations: u64,
    pub conservation_checks: u64,
    pub conservation_violations: u64,
}

/// Consecutive evaluation-free iterations after which a move is committed.
const MAX_IDLE_ITERATIONS: usize = 1000;

/// A child chosen during expansion, held back until the iteration commits.
struct PlannedChild {
    action: Action,
    score: f64,
    reward: f64,
}

pub struct Search<'o> {
    cfg: SearchConfig,
    evaluator: Evaluator<'o>,
    filter: Option<&'o dyn Fn(&Molecule) -> bool>,
    scaler: RewardScaler,
    rng: ChaCha8Rng,
    tree: Tree,
    root: NodeId,
    best: Option<(f64, String)>,
    trajectory: Vec<TrajectoryStep>,
    stats: SearchStats,
    trace: Vec<TraceEvent>,
}

impl<'o> Search<'o> {
    pub fn new(
        start: &Molecule,
        cfg: SearchConfig,
        objective: &'o dyn Objective,
        filter: Option<&'o dyn Fn(&Molecule) -> bool>,
    ) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let mut evaluator = Evaluator::new(objective, cfg.max_evals);
        let smiles = write_canonical(start);
        let score = if start.is_empty() {
            SENTINEL
        } else {
            evaluator.score(start, &smiles).unwrap_or(SENTINEL)
        };
        let mut root = SearchNode::new(start.clone(), smiles.clone(), score, 0);
        root.terminal = cfg.max_steps == 0;
        let (tree, root_id) = Tree::with_root(root);
        let mut search = Search {
            scaler: RewardScaler::for_objective(cfg.alpha, objective),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            evaluator,
            filter,
            tree,
            root: root_id,
            best: None,
            trajectory: Vec::new(),
            stats: SearchStats::default(),
            trace: Vec::new(),
        };
        search.record_best(score, &smiles);
        Ok(search)
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn evals(&self) -> u64 {
        self.evaluator.evals()
    }

    pub fn best(&self) -> Option<(f64, &str)> {
        self.best.as_ref().map(|(s, m)| (*s, m.as_str()))
    }

    pub fn trajectory(&self) -> &[TrajectoryStep] {
        &self.trajectory
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.trace)
    }

    /// Moves committed so far.
    pub fn steps_taken(&self) -> usize {
        self.tree.node(self.root).depth
    }

    pub fn is_finished(&self) -> bool {
        let root = self.tree.node(self.root);
        root.terminal || root.depth >= self.cfg.max_steps
    }

    /// Runs every move of the episode and returns its result.
    pub fn run(&mut self) -> EpisodeResult {
        let clock = Instant::now();
        'moves: while !self.is_finished() {
            let moves_left = (self.cfg.max_steps - self.steps_taken()) as u64;
            let allowance = self.evaluator.remaining().map(|r| (r / moves_left).max(1));
            let spent_before = self.evaluator.evals();
            let mut idle = 0;
            for _ in 0..self.cfg.num_iterations {
                if allowance.is_some_and(|a| self.evaluator.evals() - spent_before >= a) {
                    break;
                }
                let before = self.evaluator.evals();
                if self.iterate().is_err() {
                    self.advance();
                    break 'moves;
                }
                // Iterations that only revisit finished nodes cost nothing, so
                // stop once nothing below the root is left to expand, or after
                // a long run of them.
                if self.evaluator.evals() == before {
                    idle += 1;
                    if idle >= MAX_IDLE_ITERATIONS || !self.tree.has_open_leaf(self.root) {
                        break;
                    }
                } else {
                    idle = 0;
                }
            }
            if !self.advance() {
                break;
            }
        }
        let wall_ms = if self.cfg.timing {
            clock.elapsed().as_millis() as u64
        } else {
            0
        };
        self.result(wall_ms)
    }

    pub fn result(&self, wall_ms: u64) -> EpisodeResult {
        let (best_score, best_molecule) = match &self.best {
            Some((s, m)) => (*s, m.clone()),
            None => (SENTINEL, self.tree.node(self.root).smiles.clone()),
        };
        EpisodeResult {
            best_molecule,
            best_score,
            trajectory: self.trajectory.clone(),
            iterations_used: self.stats.iterations,
            evals_used: self.evaluator.evals(),
            wall_ms,
        }
    }

    /// Commits the robust child of the root as the next move. Returns false
    /// when the root has no children.
    pub fn advance(&mut self) -> bool {
        let Some(child) = self.tree.robust_child(self.root) else {
            return false;
        };
        self.root = self.tree.reroot(child);
        let node = self.tree.node(self.root);
        let best_so_far = self.best.as_ref().map_or(SENTINEL, |b| b.0);
        self.trajectory.push(TrajectoryStep {
            step: node.depth,
            smiles: node.smiles.clone(),
            score: node.score,
            best_so_far,
        });
        true
    }

    /// One select/expand/simulate/backpropagate cycle. On budget exhaustion
    /// the tree is left exactly as it was before the call.
    pub fn iterate(&mut self) -> Result<(), BudgetExhausted> {
        let iteration = self.stats.iterations + self.stats.abandoned + 1;
        let path = self.select(iteration);
        let leaf = *path.last().expect("path contains the root");
        let max_steps = self.cfg.max_steps;
        let node = self.tree.node(leaf);

        if node.terminal || node.depth >= max_steps {
            let reward = node.score;
            let node = self.tree.node_mut(leaf);
            node.terminal = true;
            node.expanded = true;
            node.terminal_sims += 1;
            self.back_up(iteration, &path, leaf, reward);
        } else {
            let mut pending = Vec::new();
            let planned = match self.plan_expansion(leaf, &mut pending) {
                Ok(p) => p,
                Err(e) => {
                    self.stats.abandoned += 1;
                    return Err(e);
                }
            };
            for (score, smiles) in &pending {
                self.record_best(*score, smiles);
            }
            self.commit_expansion(iteration, &path, planned);
        }

        self.stats.iterations += 1;
        if self.cfg.debug_checks {
            self.stats.conservation_checks += 1;
            if self.tree.check_conservation(self.root).is_err() {
                self.stats.conservation_violations += 1;
                debug_assert!(false, "visit conservation broken");
            }
        }
        Ok(())
    }

    fn select(&mut self, iteration: u64) -> Vec<NodeId> {
        let c = self.cfg.c;
        let path = self.tree.select(self.root, c);
        if self.cfg.debug_checks {
            for pair in path.windows(2) {
                let parent = self.tree.node(pair[0]);
                let chosen = self.tree.node(pair[1]).uct(parent.visits, c);
                let top = parent
                    .children
                    .iter()
                    .map(|&id| self.tree.node(id).uct(parent.visits, c))
                    .fold(f64::NEG_INFINITY, f64::max);
                self.stats.selection_checks += 1;
                if chosen < top {
                    self.stats.selection_violations += 1;
                    debug_assert!(false, "selection missed the UCT argmax");
                }
            }
        }
        if self.cfg.trace {
            for (i, &id) in path.iter().enumerate() {
                let node = self.tree.node(id);
                let uct = (i > 0).then(|| node.uct(self.tree.node(path[i - 1]).visits, c));
                self.trace.push(TraceEvent {
                    iteration,
                    phase: Phase::Select,
                    node_smiles: node.smiles.clone(),
                    value: node.value,
                    visits: node.visits,
                    uct,
                });
            }
        }
        path
    }

    /// Scores and ranks the successors of `leaf` and rolls out from each kept
    /// one. Touches nothing but the evaluator and the RNG.
    fn plan_expansion(
        &mut self,
        leaf: NodeId,
        pending: &mut Vec<(f64, String)>,
    ) -> Result<Vec<PlannedChild>, BudgetExhausted> {
        let node = self.tree.node(leaf);
        let state = node.state.clone();
        let depth = node.depth;
        let mut candidates = Vec::new();
        for action in self.cfg.space.enumerate(&state) {
            if self.filter.is_some_and(|f| !f(&action.result)) {
                continue;
            }
            let score = self.score(&action.result, &action.smiles, pending)?;
            if score != SENTINEL {
                candidates.push((score, action));
            }
        }
        // Enumeration order is by SMILES already; a stable sort keeps it for ties.
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
        if let Some(k) = self.cfg.k {
            candidates.truncate(k);
        }
        let horizon = self.cfg.rollout_depth.min(self.cfg.max_steps - (depth + 1));
        let mut planned = Vec::with_capacity(candidates.len());
        for (score, action) in candidates {
            let reward = self.rollout(&action.result, score, horizon, pending)?;
            planned.push(PlannedChild {
                action,
                score,
                reward,
            });
        }
        Ok(planned)
    }

    fn commit_expansion(&mut self, iteration: u64, path: &[NodeId], planned: Vec<PlannedChild>) {
        let leaf = *path.last().expect("non-empty path");
        self.stats.expansions += 1;
        let depth = self.tree.node(leaf).depth + 1;
        self.tree.node_mut(leaf).expanded = true;
        if planned.is_empty() {
            let node = self.tree.node_mut(leaf);
            node.terminal = true;
            node.terminal_sims += 1;
            let reward = node.score;
            self.back_up(iteration, path, leaf, reward);
            return;
        }
        for child in planned {
            self.check_state(&child.action.result);
            let mut node = SearchNode::new(child.action.result, child.action.smiles, child.score, depth);
            node.terminal = depth >= self.cfg.max_steps;
            let scaled = self.scaler.scale(child.reward);
            node.value = scaled;
            let id = self.tree.add_child(leaf, node);
            if self.cfg.trace {
                let n = self.tree.node(id);
                self.trace.push(TraceEvent {
                    iteration,
                    phase: Phase::Expand,
                    node_smiles: n.smiles.clone(),
                    value: n.value,
                    visits: n.visits,
                    uct: None,
                });
            }
            self.propagate(iteration, path, id, scaled);
        }
    }

    /// Scales `reward` and adds it with one visit along `path`.
    fn back_up(&mut self, iteration: u64, path: &[NodeId], from: NodeId, reward: f64) {
        let scaled = self.scaler.scale(reward);
        self.propagate(iteration, path, from, scaled);
    }

    fn propagate(&mut self, iteration: u64, path: &[NodeId], from: NodeId, scaled: f64) {
        self.tree.backpropagate(path, scaled);
        self.stats.backprops += 1;
        if self.cfg.trace {
            self.trace.push(TraceEvent {
                iteration,
                phase: Phase::Simulate,
                node_smiles: self.tree.node(from).smiles.clone(),
                value: scaled,
                visits: 1,
                uct: None,
            });
            for &id in path.iter().rev() {
                let n = self.tree.node(id);
                self.trace.push(TraceEvent {
                    iteration,
                    phase: Phase::Backprop,
                    node_smiles: n.smiles.clone(),
                    value: n.value,
                    visits: n.visits,
                    uct: None,
                });
            }
        }
    }

    /// ε-greedy rollout of at most `horizon` steps from `start`, whose score
    /// is already known. Returns the score of the last molecule reached.
    fn rollout(
        &mut self,
        start: &Molecule,
        start_score: f64,
        horizon: usize,
        pending: &mut Vec<(f64, String)>,
    ) -> Result<f64, BudgetExhausted> {
        let mut mol = start.clone();
        let mut score = Some(start_score);
        for _ in 0..horizon {
            let actions = self.cfg.space.enumerate(&mol);
            if actions.is_empty() {
                break;
            }
            let explore = self.rng.gen::<f64>() < self.cfg.epsilon;
            if explore {
                let pick = self.rng.gen_range(0..actions.len());
                mol = actions.into_iter().nth(pick).expect("index in range").result;
                score = None;
            } else {
                let mut best: Option<(f64, usize)> = None;
                for (i, a) in actions.iter().enumerate() {
                    let s = self.score(&a.result, &a.smiles, pending)?;
                    if s != SENTINEL && best.map_or(true, |(b, _)| s > b) {
                        best = Some((s, i));
                    }
                }
                let Some((s, i)) = best else { break };
                mol = actions.into_iter().nth(i).expect("index in range").result;
                score = Some(s);
            }
            self.check_state(&mol);
        }
        match score {
            Some(s) => Ok(s),
            None => {
                let smiles = write_canonical(&mol);
                self.score(&mol, &smiles, pending)
            }
        }
    }

    fn score(
        &mut self,
        mol: &Molecule,
        smiles: &str,
        pending: &mut Vec<(f64, String)>,
    ) -> Result<f64, BudgetExhausted> {
        let s = self.evaluator.score(mol, smiles)?;
        pending.push((s, smiles.to_owned()));
        Ok(s)
    }

    fn record_best(&mut self, score: f64, smiles: &str) {
        if score == SENTINEL {
            return;
        }
        let better = match &self.best {
            None => true,
            Some((b, m)) => score > *b || (score == *b && smiles < m.as_str()),
        };
        if better {
            self.best = Some((score, smiles.to_owned()));
        }
    }

    fn check_state(&mut self, mol: &Molecule) {
        if self.cfg.debug_checks {
            self.stats.validity_checks += 1;
            if let Err(e) = mol.validate() {
                self.stats.validity_violations += 1;
                debug_assert!(false, "search produced an invalid molecule {}: {e}", write_canonical(mol));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::enumerate_actions;
    use crate::molgraph::ElementSet;
    use crate::properties::{ConstrainedObjective, PenalizedLogP, Qed};
    use crate::smiles::parse;

    fn cfg() -> SearchConfig {
        SearchConfig {
            k: Some(3),
            rollout_depth: 0,
            num_iterations: 1,
            max_steps: 5,
            debug_checks: true,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn expansion_keeps_the_top_k_by_score() {
        let methane = parse("C").unwrap();
        let mut ranked: Vec<(f64, String)> = enumerate_actions(&methane, ElementSet::CNO)
            .into_iter()
            .map(|a| (PenalizedLogP.score(&a.result), a.smiles))
            .collect();
        assert_eq!(ranked.len(), 8);
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut search = Search::new(&methane, cfg(), &PenalizedLogP, None).unwrap();
        search.iterate().unwrap();
        let tree = search.tree();
        let root = tree.node(search.root());
        let kids: Vec<&str> = root.children.iter().map(|&c| tree.node(c).smiles.as_str()).collect();
        let expected: Vec<&str> = ranked[..3].iter().map(|r| r.1.as_str()).collect();
        assert_eq!(kids, expected);
        assert_eq!(root.visits, 4);
        assert_eq!(search.evals(), 1 + 8);
    }

    #[test]
    fn filter_rejecting_everything_makes_a_terminal_leaf() {
        let start = parse("CC(=O)Nc1ccc(O)cc1").unwrap();
        let reject = |_: &Molecule| false;
        let mut search = Search::new(&start, cfg(), &PenalizedLogP, Some(&reject)).unwrap();
        search.iterate().unwrap();
        let root = search.tree().node(search.root());
        assert!(root.terminal && root.children.is_empty());
        assert_eq!(root.visits, 2);
        assert!(!search.advance());
    }

    #[test]
    fn constrained_filter_at_high_delta() {
        let start = parse("CC(=O)Nc1ccc(O)cc1").unwrap();
        let objective = ConstrainedObjective::new(&start, 0.6);
        let feasible = |m: &Molecule| objective.is_feasible(m);
        let mut search = Search::new(&start, cfg(), &objective, Some(&feasible)).unwrap();
        search.iterate().unwrap();
        let tree = search.tree();
        for &c in &tree.node(search.root()).children {
            assert!(objective.similarity(&tree.node(c).state) >= 0.6);
        }
    }

    #[test]
    fn zero_depth_rollout_backs_up_the_child_score() {
        let mut search = Search::new(&Molecule::empty(), cfg(), &Qed, None).unwrap();
        search.iterate().unwrap();
        let tree = search.tree();
        for &c in &tree.node(search.root()).children {
            let n = tree.node(c);
            assert_eq!(n.value, n.score.exp());
            assert_eq!(n.visits, 1);
        }
    }

    #[test]
    fn greedy_rollout_takes_the_best_successor() {
        let methane = parse("C").unwrap();
        let best = enumerate_actions(&methane, ElementSet::CNO)
            .iter()
            .map(|a| PenalizedLogP.score(&a.result))
            .fold(f64::NEG_INFINITY, f64::max);
        let c = SearchConfig {
            epsilon: 0.0,
            ..cfg()
        };
        let mut search = Search::new(&methane, c, &PenalizedLogP, None).unwrap();
        let mut pending = Vec::new();
        let r = search.rollout(&methane, PenalizedLogP.score(&methane), 1, &mut pending).unwrap();
        assert_eq!(r, best);
    }

    #[test]
    fn alpha_zero_adds_exactly_one() {
        let c = SearchConfig {
            alpha: 0.0,
            rollout_depth: 2,
            ..cfg()
        };
        let mut search = Search::new(&Molecule::empty(), c, &Qed, None).unwrap();
        for _ in 0..6 {
            search.iterate().unwrap();
        }
        for (_, n) in search.tree().nodes() {
            assert_eq!(n.value, (n.visits - 1) as f64 + if n.parent.is_some() { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn budget_exhaustion_leaves_the_tree_untouched() {
        let c = SearchConfig {
            max_evals: Some(5),
            rollout_depth: 2,
            ..cfg()
        };
        let mut search = Search::new(&parse("CCO").unwrap(), c, &Qed, None).unwrap();
        assert!(search.iterate().is_err());
        assert_eq!(search.tree().len(), 1);
        assert_eq!(search.tree().node(search.root()).visits, 1);
        assert_eq!(search.evals(), 5);
        assert_eq!(search.stats().abandoned, 1);
    }

    #[test]
    fn episodes_are_reproducible() {
        let c = SearchConfig {
            k: Some(4),
            rollout_depth: 2,
            epsilon: 0.5,
            num_iterations: 4,
            max_steps: 6,
            seed: 11,
            ..SearchConfig::default()
        };
        let a = super::super::run_episode(&Molecule::empty(), &c, &Qed, None).unwrap();
        let b = super::super::run_episode(&Molecule::empty(), &c, &Qed, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectory.len(), 6);
        assert!(a.trajectory.windows(2).all(|w| w[0].best_so_far <= w[1].best_so_far));
    }

    #[test]
    fn trace_lines_have_six_fields() {
        let c = SearchConfig {
            trace: true,
            ..cfg()
        };
        let mut search = Search::new(&Molecule::empty(), c, &Qed, None).unwrap();
        search.iterate().unwrap();
        search.iterate().unwrap();
        let trace = search.take_trace();
        assert!(trace.iter().any(|e| e.phase == Phase::Expand));
        for e in &trace {
            assert_eq!(e.to_string().split(',').count(), 6);
        }
    }
}
