//! Molecular design by Monte Carlo Tree Search over unit edits.
//!
//! States are valence-valid heavy-atom graphs ([`molgraph::Molecule`]); actions
//! add an atom, add a bond, remove a bond or change a bond order
//! ([`actions`]). [`mcts`] searches this deterministic process against a
//! pluggable [`properties::Objective`], and [`harness`] runs the benchmark
//! tasks and baselines.

pub mod actions;
pub mod harness;
pub mod mcts;
pub mod molgraph;
pub mod properties;
pub mod smiles;

pub use molgraph::{BondOrder, Element, ElementSet, MolError, Molecule};
