//! The action set of the molecular MDP: every unit edit of a state, with the
//! resulting molecules deduplicated by canonical SMILES.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{BondOrder, Element, ElementSet, MolError, Molecule};
use crate::smiles::write_canonical;

/// One unit edit. The derived ordering is the descriptor order used to pick a
/// representative among edits with isomorphic results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    AtomAdd {
        anchor: Option<usize>,
        element: Element,
        order: BondOrder,
    },
    BondAdd {
        a: usize,
        b: usize,
        order: BondOrder,
    },
    BondRemove {
        a: usize,
        b: usize,
    },
    BondReplace {
        a: usize,
        b: usize,
        order: BondOrder,
    },
}

impl ActionKind {
    /// Applies the edit to `mol` without any bookkeeping.
    pub fn apply(&self, mol: &Molecule) -> Result<Molecule, MolError> {
        match *self {
            ActionKind::AtomAdd {
                anchor,
                element,
                order,
            } => mol.add_atom(anchor, element, order),
            ActionKind::BondAdd { a, b, order } => mol.add_bond(a, b, order),
            ActionKind::BondRemove { a, b } => mol.remove_bond(a, b),
            ActionKind::BondReplace { a, b, order } => mol.replace_bond(a, b, order),
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionKind::AtomAdd {
                anchor: None,
                element,
                ..
            } => write!(f, "add {element}"),
            ActionKind::AtomAdd {
                anchor: Some(a),
                element,
                order,
            } => write!(f, "add {element} to {a} (order {})", order.value()),
            ActionKind::BondAdd { a, b, order } => {
                write!(f, "bond {a}-{b} (order {})", order.value())
            }
            ActionKind::BondRemove { a, b } => write!(f, "remove {a}-{b}"),
            ActionKind::BondReplace { a, b, order } => {
                write!(f, "set {a}-{b} to order {}", order.value())
            }
        }
    }
}

/// An edit together with the state it leads to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub kind: ActionKind,
    pub result: Molecule,
    /// Canonical SMILES of `result`.
    pub smiles: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransitionError {
    #[error("action {0} cannot be applied: {1}")]
    NotApplicable(ActionKind, MolError),
    #[error("action {0} does not lead to its recorded result from this state")]
    ResultMismatch(ActionKind),
}

/// The configured action space: buildable elements plus an optional cap on
/// heavy atoms (atom additions beyond the cap are not offered).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub elements: ElementSet,
    pub max_atoms: Option<usize>,
}

impl Default for ActionSpace {
    fn default() -> Self {
        ActionSpace {
            elements: ElementSet::CNO,
            max_atoms: None,
        }
    }
}

impl ActionSpace {
    pub fn new(elements: ElementSet, max_atoms: Option<usize>) -> Self {
        ActionSpace {
            elements,
            max_atoms,
        }
    }

    /// Every valid unit edit of `mol`, one per distinct result, sorted by the
    /// result's canonical SMILES.
    pub fn enumerate(&self, mol: &Molecule) -> Vec<Action> {
        let mut candidates: Vec<(ActionKind, Molecule)> = Vec::new();
        let n = mol.atom_count();

        let room = self.max_atoms.is_none_or(|cap| n < cap);
        if room {
            if n == 0 {
                for element in self.elements.iter() {
                    let kind = ActionKind::AtomAdd {
                        anchor: None,
                        element,
                        order: BondOrder::Single,
                    };
                    candidates.push((kind, Molecule::single_atom(element)));
                }
            }
            for anchor in 0..n {
                let free = mol.implicit_h(anchor);
                for element in self.elements.iter() {
                    for order in BondOrder::ALL {
                        if order.value() > free || order.value() > element.max_valence() {
                            continue;
                        }
                        let kind = ActionKind::AtomAdd {
                            anchor: Some(anchor),
                            element,
                            order,
                        };
                        if let Ok(m) = kind.apply(mol) {
                            candidates.push((kind, m));
                        }
                    }
                }
            }
        }

        for a in 0..n {
            let fa = mol.implicit_h(a);
            if fa == 0 {
                continue;
            }
            for b in a + 1..n {
                let fb = mol.implicit_h(b);
                if fb == 0 || mol.bond_order(a, b).is_some() {
                    continue;
                }
                for order in BondOrder::ALL {
                    if order.value() > fa.min(fb) {
                        break;
                    }
                    let kind = ActionKind::BondAdd { a, b, order };
                    if let Ok(m) = kind.apply(mol) {
                        candidates.push((kind, m));
                    }
                }
            }
        }

        for (a, b, old) in mol.bonds() {
            let kind = ActionKind::BondRemove { a, b };
            if let Ok(m) = kind.apply(mol) {
                candidates.push((kind, m));
            }
            for order in BondOrder::ALL {
                if order == old {
                    continue;
                }
                let kind = ActionKind::BondReplace { a, b, order };
                if let Ok(m) = kind.apply(mol) {
                    candidates.push((kind, m));
                }
            }
        }

        let source = write_canonical(mol);
        let mut unique: BTreeMap<String, (ActionKind, Molecule)> = BTreeMap::new();
        for (kind, result) in candidates {
            let smiles = write_canonical(&result);
            if smiles == source {
                continue;
            }
            match unique.get_mut(&smiles) {
                Some(existing) if kind < existing.0 => *existing = (kind, result),
                Some(_) => {}
                None => {
                    unique.insert(smiles, (kind, result));
                }
            }
        }
        unique
            .into_iter()
            .map(|(smiles, (kind, result))| Action {
                kind,
                result,
                smiles,
            })
            .collect()
    }
}

/// Enumerates actions with no atom cap.
pub fn enumerate_actions(mol: &Molecule, elements: ElementSet) -> Vec<Action> {
    ActionSpace::new(elements, None).enumerate(mol)
}

/// Deterministic transition: re-applies the edit to `mol` and checks that it
/// reaches the action's recorded result.
pub fn transition(mol: &Molecule, action: &Action) -> Result<Molecule, TransitionError> {
    let applied = action
        .kind
        .apply(mol)
        .map_err(|e| TransitionError::NotApplicable(action.kind, e))?;
    if write_canonical(&applied) != action.smiles {
        return Err(TransitionError::ResultMismatch(action.kind));
    }
    Ok(action.result.clone())
}

/// Episode step counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepBudget {
    pub max_steps: usize,
    pub steps_taken: usize,
}

impl StepBudget {
    pub fn new(max_steps: usize) -> Self {
        StepBudget {
            max_steps,
            steps_taken: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.max_steps - self.steps_taken
    }

    pub fn is_exhausted(&self) -> bool {
        self.steps_taken >= self.max_steps
    }

    /// Records one step; returns false once the budget is spent.
    pub fn take(&mut self) -> bool {
        if self.is_exhausted() {
            return false;
        }
        self.steps_taken += 1;
        true
    }
}
