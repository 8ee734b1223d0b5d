//! A synthetic-accessibility surrogate built from the complexity penalties
//! of the Ertl–Schuffenhauer score, without its fragment-frequency term.
//!
//! ```text
//! raw   = size + RING_WEIGHT * rings + macrocycle + junction
//! size  = n^1.005 - n                        (n heavy atoms)
//! macro = log10(2) if the largest ring has more than 8 atoms
//! junction = log10(1 + atoms with three or more ring bonds)
//! score = clamp(1 + raw * 9 / 6.5, 1, 10)
//! ```
//!
//! The 9/6.5 factor is the slope of the original score's final rescaling, so a
//! penalty moves this score by the same amount it would move the original.

use crate::molgraph::Molecule;

pub const RING_WEIGHT: f64 = 0.5;
pub const SCALE: f64 = 9.0 / 6.5;

pub fn sa_surrogate(mol: &Molecule) -> f64 {
    let n = mol.atom_count() as f64;
    let rings = mol.rings();
    let size = n.powf(1.005) - n;
    let macrocycle = if rings.largest_ring_size() > 8 {
        2f64.log10()
    } else {
        0.0
    };
    let flags = mol.ring_bond_flags();
    let junctions = flags
        .iter()
        .filter(|f| f.iter().filter(|&&r| r).count() >= 3)
        .count();
    let junction = (1.0 + junctions as f64).log10();
    let raw = size + RING_WEIGHT * rings.len() as f64 + macrocycle + junction;
    (1.0 + raw * SCALE).clamp(1.0, 10.0)
}
