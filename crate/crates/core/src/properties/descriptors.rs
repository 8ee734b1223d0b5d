//! The descriptor vector behind QED: weight, logP, H-bond counts, polar
//! surface area, rotatable bonds and aromatic rings.

use serde::{Deserialize, Serialize};

use super::crippen::crippen_from;
use super::perception::{BondKind, Perception};
use super::{order_free_sum, PropertyError};
use crate::molgraph::{BondOrder, Element, Molecule};

const HYDROGEN_WEIGHT: f64 = 1.008;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub molecular_weight: f64,
    pub alogp: f64,
    pub hba: u32,
    pub hbd: u32,
    pub tpsa: f64,
    pub rotatable_bonds: u32,
    pub aromatic_rings: u32,
    pub ring_sizes: Vec<usize>,
    /// Structural alerts are not matched; always 0.
    pub alerts: u32,
}

pub fn descriptors(mol: &Molecule) -> Result<DescriptorVector, PropertyError> {
    if mol.is_empty() {
        return Err(PropertyError::EmptyMolecule);
    }
    let p = Perception::new(mol);
    Ok(DescriptorVector {
        molecular_weight: molecular_weight(mol),
        alogp: crippen_from(&p),
        hba: hba(&p),
        hbd: hbd(mol),
        tpsa: tpsa_from(&p),
        rotatable_bonds: rotatable_bonds_from(&p),
        aromatic_rings: p.aromatic_rings as u32,
        ring_sizes: p.rings.ring_sizes(),
        alerts: 0,
    })
}

pub fn molecular_weight(mol: &Molecule) -> f64 {
    order_free_sum(mol.atoms().iter().map(|e| e.atomic_weight()))
        + mol.total_h() as f64 * HYDROGEN_WEIGHT
}

/// Donors: N or O atoms carrying at least one hydrogen.
pub fn hbd(mol: &Molecule) -> u32 {
    (0..mol.atom_count())
        .filter(|&i| matches!(mol.element(i), Element::N | Element::O) && mol.implicit_h(i) > 0)
        .count() as u32
}

/// Acceptors following the QED acceptor definitions, restricted to neutral
/// atoms: hydroxyl, ether and carbonyl O, aromatic o, divalent S, pyridine-like
/// n, nitrile N and trivalent amine N that is not an amide or thioamide N.
fn hba(p: &Perception) -> u32 {
    let mol = p.mol;
    let mut count = 0;
    for i in 0..mol.atom_count() {
        let h = mol.implicit_h(i);
        let degree = mol.degree(i);
        let x = degree + usize::from(h);
        let arom = p.aromatic_atom[i];
        let valence = mol.bond_order_sum(i) + h;
        let accepts = match (mol.element(i), arom) {
            (Element::O, true) => h == 0 && x == 2,
            (Element::O, false) => valence == 2 && h <= 1 && (x == 2 || (h == 0 && x == 1)),
            (Element::S, false) => h == 0 && valence == 2 && (x == 1 || x == 2),
            (Element::N, true) => h == 0 && x == 2,
            (Element::N, false) => {
                let nitrile = h == 0 && x == 1 && valence == 3;
                let amine = x == 3 && valence == 3 && !next_to_carbonyl_like(p, i);
                nitrile || amine
            }
            _ => false,
        };
        if accepts {
            count += 1;
        }
    }
    count
}

/// `N[C,S]=O`: bonded to an aliphatic C or S that is double-bonded to aliphatic O.
fn next_to_carbonyl_like(p: &Perception, n: usize) -> bool {
    p.bonds_of(n).any(|(j, kind)| {
        matches!(kind, BondKind::Single | BondKind::Aromatic)
            && !p.aromatic_atom[j]
            && matches!(p.mol.element(j), Element::C | Element::S)
            && p.bonds_of(j).any(|(k, kk)| {
                kk == BondKind::Double && p.mol.element(k) == Element::O && !p.aromatic_atom[k]
            })
    })
}

pub fn tpsa(mol: &Molecule) -> f64 {
    tpsa_from(&Perception::new(mol))
}

/// Ertl topological polar surface area from N and O contributions.
fn tpsa_from(p: &Perception) -> f64 {
    let mol = p.mol;
    let mut parts = Vec::new();
    for i in 0..mol.atom_count() {
        let (mut single, mut double, mut triple, mut aromatic) = (0, 0, 0, 0);
        for (_, kind) in p.bonds_of(i) {
            match kind {
                BondKind::Single => single += 1,
                BondKind::Double => double += 1,
                BondKind::Triple => triple += 1,
                BondKind::Aromatic => aromatic += 1,
            }
        }
        let h = mol.implicit_h(i);
        let heavy = mol.degree(i);
        let three_ring = p.in_three_ring(i);
        let contribution = match mol.element(i) {
            Element::N => match (heavy, h, single, double, triple, aromatic) {
                (0, 3, ..) => 35.0,
                (1, 0, 0, 0, 1, 0) => 23.79,
                (1, 1, 0, 1, 0, 0) => 23.85,
                (1, 2, 1, 0, 0, 0) => 26.02,
                (2, 0, 1, 1, 0, 0) => 12.36,
                (2, 1, 2, 0, 0, 0) if three_ring => 21.94,
                (2, 1, 2, 0, 0, 0) => 12.03,
                (2, 0, 0, 0, 1, 1) | (2, 0, 0, 2, 0, 0) => 13.60,
                (2, 0, 0, 0, 0, 2) => 12.89,
                (2, 1, 0, 0, 0, 2) => 15.79,
                (3, 0, 3, 0, 0, 0) if three_ring => 3.01,
                (3, 0, 3, 0, 0, 0) => 3.24,
                (3, 0, 0, 0, 0, 3) => 4.41,
                (3, 0, 1, 0, 0, 2) => 4.93,
                _ => 0.0,
            },
            Element::O => match (heavy, h, single, double, aromatic) {
                (0, 2, ..) => 31.5,
                (1, 0, 0, 1, 0) => 17.07,
                (1, 1, 1, 0, 0) => 20.23,
                (2, 0, 2, 0, 0) if three_ring => 12.53,
                (2, 0, 2, 0, 0) => 9.23,
                (2, 0, 0, 0, 2) => 13.14,
                _ => 0.0,
            },
            _ => 0.0,
        };
        parts.push(contribution);
    }
    order_free_sum(parts)
}

pub fn rotatable_bonds(mol: &Molecule) -> u32 {
    rotatable_bonds_from(&Perception::new(mol))
}

/// Strict rotatable bonds: acyclic single bonds between non-terminal atoms,
/// excluding triple-bonded atoms, CX3 and t-butyl centres, and amide-like
/// C(=X)-N/O/S bonds.
fn rotatable_bonds_from(p: &Perception) -> u32 {
    let mol = p.mol;
    let mut count = 0;
    for a in 0..mol.atom_count() {
        for (slot, &(b, order)) in mol.neighbors(a).iter().enumerate() {
            if b < a || order != BondOrder::Single || p.is_ring_bond(a, slot) {
                continue;
            }
            let basic = |x: usize| rotor_end(p, x);
            if (basic(a) && basic(b)) && !(amide_end(p, a) && amide_end(p, b)) {
                count += 1;
            }
        }
    }
    count
}

fn rotor_end(p: &Perception, x: usize) -> bool {
    let mol = p.mol;
    if mol.degree(x) <= 1 || mol.neighbors(x).iter().any(|&(_, o)| o == BondOrder::Triple) {
        return false;
    }
    if mol.element(x) == Element::C {
        for hal in [Element::F, Element::Cl, Element::Br] {
            let n = mol.neighbors(x).iter().filter(|&&(y, _)| mol.element(y) == hal).count();
            if n >= 3 {
                return false;
            }
        }
        let methyls = mol
            .neighbors(x)
            .iter()
            .filter(|&&(y, o)| {
                o == BondOrder::Single
                    && mol.element(y) == Element::C
                    && !p.aromatic_atom[y]
                    && mol.implicit_h(y) == 3
            })
            .count();
        if methyls >= 3 && !p.aromatic_atom[x] {
            return false;
        }
    }
    true
}

/// Whether the amide rules exclude atom `x` as the first atom of a rotor.
/// A bond survives if either orientation passes.
fn amide_end(p: &Perception, x: usize) -> bool {
    let mol = p.mol;
    let acyclic_hetero_partner = |c: usize| {
        mol.neighbors(c).iter().enumerate().any(|(slot, &(y, o))| {
            o == BondOrder::Single
                && !p.aromatic_bond[c][slot]
                && !p.is_ring_bond(c, slot)
                && is_amide_hetero(p, y)
        })
    };
    let amide_carbon = |c: usize| {
        mol.element(c) == Element::C
            && !p.aromatic_atom[c]
            && mol.degree(c) == 3
            && mol.neighbors(c).iter().any(|&(y, o)| {
                o == BondOrder::Double
                    && !p.aromatic_atom[y]
                    && matches!(mol.element(y), Element::N | Element::O | Element::S)
            })
    };
    if amide_carbon(x) && acyclic_hetero_partner(x) {
        return true;
    }
    if is_amide_hetero(p, x) {
        return mol.neighbors(x).iter().enumerate().any(|(slot, &(c, o))| {
            o == BondOrder::Single
                && !p.aromatic_bond[x][slot]
                && !p.is_ring_bond(x, slot)
                && amide_carbon(c)
        });
    }
    false
}

/// `[#7,O,S!D1]`: any N, aliphatic O, or non-terminal aliphatic S.
fn is_amide_hetero(p: &Perception, y: usize) -> bool {
    match p.mol.element(y) {
        Element::N => true,
        Element::O => !p.aromatic_atom[y],
        Element::S => !p.aromatic_atom[y] && p.mol.degree(y) != 1,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse;

    fn d(smiles: &str) -> DescriptorVector {
        descriptors(&parse(smiles).unwrap()).unwrap()
    }

    #[test]
    fn methane_weight() {
        assert!((d("C").molecular_weight - (12.011 + 4.0 * 1.008)).abs() < 1e-9);
    }

    #[test]
    fn lone_oxygen_is_one_donor() {
        assert_eq!(d("O").hbd, 1);
        assert_eq!(d("CCO").hbd, 1);
        assert_eq!(d("NCCO").hbd, 2);
        assert_eq!(d("COC").hbd, 0);
    }

    #[test]
    fn benzene_descriptors() {
        let v = d("c1ccccc1");
        assert_eq!(v.aromatic_rings, 1);
        assert_eq!(v.rotatable_bonds, 0);
        assert_eq!(v.ring_sizes, vec![6]);
        assert_eq!(v.alerts, 0);
    }

    #[test]
    fn tpsa_fragments() {
        // Single-fragment values from the Ertl table.
        let cases = [
            ("c1ccncc1", 12.89),
            ("CN(C)C", 3.24),
            ("c1cc[nH]c1", 15.79),
            ("Cn1cccc1", 4.93),
            ("CC#N", 23.79),
            ("CC=NC", 12.36),
            ("C1CN1", 21.94),
            ("C1CO1", 12.53),
            ("COC", 9.23),
            ("CC=O", 17.07),
            ("CO", 20.23),
            ("c1ccoc1", 13.14),
            ("CCN", 26.02),
        ];
        for (smiles, expected) in cases {
            assert!((d(smiles).tpsa - expected).abs() < 1e-9, "{smiles}");
        }
    }

    #[test]
    fn acceptors() {
        assert_eq!(d("CCO").hba, 1);
        assert_eq!(d("CC(=O)NC").hba, 1);
        assert_eq!(d("CN(C)C").hba, 1);
        assert_eq!(d("c1ccncc1").hba, 1);
        assert_eq!(d("c1cc[nH]c1").hba, 0);
        assert_eq!(d("CC#N").hba, 1);
    }

    #[test]
    fn rotatable_bond_rules() {
        assert_eq!(d("CCCC").rotatable_bonds, 1);
        assert_eq!(d("CCCCC").rotatable_bonds, 2);
        assert_eq!(d("CC(=O)NC").rotatable_bonds, 0);
        assert_eq!(d("CCC(=O)NCC").rotatable_bonds, 2);
        assert_eq!(d("CC(C)(C)CC").rotatable_bonds, 0);
        assert_eq!(d("CCC#C").rotatable_bonds, 0);
        assert_eq!(d("c1ccccc1-c1ccccc1").rotatable_bonds, 1);
        assert_eq!(d("C1CCCCC1").rotatable_bonds, 0);
    }

    #[test]
    fn empty_molecule_is_an_error() {
        assert_eq!(
            descriptors(&Molecule::empty()),
            Err(PropertyError::EmptyMolecule)
        );
    }
}
