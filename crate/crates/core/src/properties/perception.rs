//! Ring and aromaticity perception shared by the descriptor calculators.
//!
//! Aromaticity follows a simple Hückel model: a ring is aromatic when every
//! atom can donate π electrons and the ring total is 4n+2. Two rings fused on
//! a single bond are also tried as one envelope so that systems like azulene
//! are recognized.

use crate::molgraph::{BondOrder, Element, Molecule, RingSet};

/// Bond classification after aromaticity perception.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BondKind {
    Single,
    Double,
    Triple,
    Aromatic,
}

pub(crate) struct Perception<'a> {
    pub mol: &'a Molecule,
    pub rings: RingSet,
    /// Parallel to `mol.neighbors(i)`.
    pub ring_bond: Vec<Vec<bool>>,
    pub aromatic_atom: Vec<bool>,
    /// Parallel to `mol.neighbors(i)`.
    pub aromatic_bond: Vec<Vec<bool>>,
    /// Number of SSSR rings judged aromatic.
    pub aromatic_rings: usize,
}

impl<'a> Perception<'a> {
    pub fn new(mol: &'a Molecule) -> Self {
        let rings = mol.rings();
        let ring_bond = mol.ring_bond_flags();
        let n = mol.atom_count();
        let in_ring: Vec<bool> = rings.membership().iter().map(|&m| m > 0).collect();
        let electrons: Vec<Option<u8>> = (0..n).map(|i| pi_electrons(mol, i, &in_ring)).collect();

        let ring_list = rings.rings();
        let hueckel = |atoms: &mut dyn Iterator<Item = usize>| -> bool {
            let mut total = 0u32;
            for a in atoms {
                match electrons[a] {
                    Some(e) => total += u32::from(e),
                    None => return false,
                }
            }
            total >= 2 && (total - 2) % 4 == 0
        };
        let mut aromatic: Vec<bool> = ring_list
            .iter()
            .map(|r| hueckel(&mut r.iter().copied()))
            .collect();
        for i in 0..ring_list.len() {
            for j in i + 1..ring_list.len() {
                if aromatic[i] && aromatic[j] {
                    continue;
                }
                let shared = ring_list[i]
                    .iter()
                    .filter(|a| ring_list[j].contains(a))
                    .count();
                if shared != 2 {
                    continue;
                }
                let mut union = ring_list[i]
                    .iter()
                    .copied()
                    .chain(ring_list[j].iter().copied().filter(|a| !ring_list[i].contains(a)));
                if hueckel(&mut union) {
                    aromatic[i] = true;
                    aromatic[j] = true;
                }
            }
        }

        let mut aromatic_atom = vec![false; n];
        let mut aromatic_bond: Vec<Vec<bool>> =
            (0..n).map(|i| vec![false; mol.degree(i)]).collect();
        for (ring, _) in ring_list.iter().zip(&aromatic).filter(|(_, &a)| a) {
            for k in 0..ring.len() {
                let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
                aromatic_atom[a] = true;
                for (x, y) in [(a, b), (b, a)] {
                    let slot = mol
                        .neighbors(x)
                        .iter()
                        .position(|&(z, _)| z == y)
                        .expect("consecutive ring atoms are bonded");
                    aromatic_bond[x][slot] = true;
                }
            }
        }
        let aromatic_rings = aromatic.iter().filter(|&&a| a).count();
        Perception {
            mol,
            rings,
            ring_bond,
            aromatic_atom,
            aromatic_bond,
            aromatic_rings,
        }
    }

    pub fn bond_kind(&self, atom: usize, slot: usize) -> BondKind {
        if self.aromatic_bond[atom][slot] {
            return BondKind::Aromatic;
        }
        match self.mol.neighbors(atom)[slot].1 {
            BondOrder::Single => BondKind::Single,
            BondOrder::Double => BondKind::Double,
            BondOrder::Triple => BondKind::Triple,
        }
    }

    /// Neighbors of `atom` with their bond kinds.
    pub fn bonds_of(&self, atom: usize) -> impl Iterator<Item = (usize, BondKind)> + '_ {
        self.mol
            .neighbors(atom)
            .iter()
            .enumerate()
            .map(move |(slot, &(nbr, _))| (nbr, self.bond_kind(atom, slot)))
    }

    /// Whether `atom` lies on a three-membered SSSR ring.
    pub fn in_three_ring(&self, atom: usize) -> bool {
        self.rings
            .rings()
            .iter()
            .any(|r| r.len() == 3 && r.contains(&atom))
    }

    pub fn is_ring_bond(&self, atom: usize, slot: usize) -> bool {
        self.ring_bond[atom][slot]
    }
}

/// π electrons a ring atom can donate, or `None` if it breaks conjugation.
fn pi_electrons(mol: &Molecule, atom: usize, in_ring: &[bool]) -> Option<u8> {
    if !in_ring[atom] {
        return None;
    }
    let mut double_partner = None;
    for &(nbr, order) in mol.neighbors(atom) {
        match order {
            BondOrder::Single => {}
            BondOrder::Double if double_partner.is_none() => double_partner = Some(nbr),
            _ => return None,
        }
    }
    let element = mol.element(atom);
    match double_partner {
        Some(p) if in_ring[p] => Some(1),
        // An exocyclic double bond to an electronegative atom pulls the electron out.
        Some(p) => match (element, mol.element(p)) {
            (Element::C, Element::N | Element::O | Element::S) => Some(0),
            _ => None,
        },
        None => match element {
            Element::N | Element::P | Element::O | Element::S => Some(2),
            Element::B => Some(0),
            _ => None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse;

    fn arom(smiles: &str) -> (usize, Vec<bool>) {
        let mol = parse(smiles).unwrap();
        let p = Perception::new(&mol);
        (p.aromatic_rings, p.aromatic_atom.clone())
    }

    #[test]
    fn hueckel_rings() {
        assert_eq!(arom("c1ccccc1").0, 1);
        assert_eq!(arom("c1cc[nH]c1").0, 1);
        assert_eq!(arom("c1ccoc1").0, 1);
        assert_eq!(arom("c1ccsc1").0, 1);
        assert_eq!(arom("c1ccc2ccccc2c1").0, 2);
        assert_eq!(arom("O=c1cc[nH]cc1").0, 1);
        assert_eq!(arom("C1=CCC=C1").0, 0);
        assert_eq!(arom("C1=CC=CC=CC=C1").0, 0);
        assert_eq!(arom("C1CCCCC1").0, 0);
    }

    #[test]
    fn azulene_needs_the_fused_envelope() {
        let (rings, atoms) = arom("C1=CC2=CC=CC=CC2=C1");
        assert_eq!(rings, 2);
        assert!(atoms.iter().all(|&a| a));
    }

    #[test]
    fn substituents_stay_aliphatic() {
        let mol = parse("Cc1ccccc1").unwrap();
        let p = Perception::new(&mol);
        let methyl = (0..mol.atom_count()).find(|&i| mol.degree(i) == 1).unwrap();
        assert!(!p.aromatic_atom[methyl]);
        let kinds: Vec<BondKind> = p.bonds_of(methyl).map(|(_, k)| k).collect();
        assert_eq!(kinds, vec![BondKind::Single]);
    }
}
