//! Molecular descriptors, the two rewards (QED and penalized logP) and
//! fingerprint similarity for the constrained task.

mod crippen;
mod descriptors;
mod fingerprint;
mod objective;
mod perception;
mod qed;
mod sa;

use thiserror::Error;

use crate::molgraph::Molecule;

pub use crippen::{crippen_contributions, crippen_logp, AtomContribution};
pub use descriptors::{descriptors, hbd, molecular_weight, rotatable_bonds, tpsa, DescriptorVector};
pub use fingerprint::{
    fingerprint, fingerprint_with, tanimoto, Fingerprint, DEFAULT_RADIUS, DEFAULT_WIDTH,
};
pub use objective::{
    BudgetExhausted, ConstrainedObjective, Evaluator, Objective, ObjectiveKind, PenalizedLogP,
    Qed, SENTINEL,
};
pub use qed::{qed_from_descriptors, Desirability, PARAMETERS as QED_PARAMETERS, WEIGHTS as QED_WEIGHTS};
pub use sa::sa_surrogate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropertyError {
    #[error("the empty molecule has no descriptors")]
    EmptyMolecule,
    #[error("fingerprint widths differ ({0} vs {1})")]
    WidthMismatch(usize, usize),
}

/// Sum that does not depend on the order of `values`, so per-atom totals are
/// identical for every labeling of a molecule.
pub(crate) fn order_free_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

pub fn qed(mol: &Molecule) -> Result<f64, PropertyError> {
    descriptors(mol).map(|v| qed_from_descriptors(&v))
}

/// max(0, largest SSSR ring size - 6).
pub fn long_cycle_penalty(mol: &Molecule) -> f64 {
    mol.rings().largest_ring_size().saturating_sub(6) as f64
}

/// logP - SA surrogate - long-cycle penalty.
pub fn penalized_logp(mol: &Molecule) -> Result<f64, PropertyError> {
    if mol.is_empty() {
        return Err(PropertyError::EmptyMolecule);
    }
    Ok(crippen_logp(mol) - sa_surrogate(mol) - long_cycle_penalty(mol))
}
