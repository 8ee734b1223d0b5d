//! Valence-checked heavy-atom molecular graphs.
//!
//! A [`Molecule`] is an immutable value: every edit returns a new molecule and
//! leaves the receiver untouched. Hydrogens are never stored; each atom carries
//! `max_valence - sum(bond orders)` implicit hydrogens.

mod canon;
mod rings;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canon::CanonicalRank;
pub use rings::RingSet;

/// Heavy-atom element. Only C, N and O can be introduced by edits; the rest
/// exist so that benchmark start molecules can be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    B,
    C,
    N,
    O,
    P,
    S,
    F,
    Cl,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 10] = [
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::P,
        Element::S,
        Element::F,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    /// Fixed maximum valence. P and S use their lowest common valence.
    pub fn max_valence(self) -> u8 {
        match self {
            Element::C => 4,
            Element::B | Element::N | Element::P => 3,
            Element::O | Element::S => 2,
            Element::F | Element::Cl | Element::Br | Element::I => 1,
        }
    }

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::B => 5,
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::F => 9,
            Element::P => 15,
            Element::S => 16,
            Element::Cl => 17,
            Element::Br => 35,
            Element::I => 53,
        }
    }

    /// Standard atomic weight in g/mol.
    pub fn atomic_weight(self) -> f64 {
        match self {
            Element::B => 10.812,
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::F => 18.998,
            Element::P => 30.974,
            Element::S => 32.067,
            Element::Cl => 35.453,
            Element::Br => 79.904,
            Element::I => 126.904,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::P => "P",
            Element::S => "S",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        Element::ALL.into_iter().find(|e| e.symbol() == symbol)
    }

    /// Whether edits are allowed to introduce this element.
    pub fn is_buildable(self) -> bool {
        matches!(self, Element::C | Element::N | Element::O)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// The set of elements available to atom additions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementSet(u8);

impl ElementSet {
    pub const CNO: ElementSet = ElementSet(0b111);

    pub fn new(elements: &[Element]) -> Result<Self, MolError> {
        let mut bits = 0u8;
        for &e in elements {
            bits |= 1 << Self::slot(e).ok_or(MolError::ElementNotAllowed(e))?;
        }
        Ok(ElementSet(bits))
    }

    fn slot(e: Element) -> Option<u8> {
        match e {
            Element::C => Some(0),
            Element::N => Some(1),
            Element::O => Some(2),
            _ => None,
        }
    }

    pub fn contains(self, e: Element) -> bool {
        Self::slot(e).is_some_and(|s| self.0 & (1 << s) != 0)
    }

    pub fn iter(self) -> impl Iterator<Item = Element> {
        [Element::C, Element::N, Element::O]
            .into_iter()
            .filter(move |&e| self.contains(e))
    }
}

impl Default for ElementSet {
    fn default() -> Self {
        ElementSet::CNO
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single = 1,
    Double = 2,
    Triple = 3,
}

impl BondOrder {
    pub const ALL: [BondOrder; 3] = [BondOrder::Single, BondOrder::Double, BondOrder::Triple];

    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn from_value(v: u8) -> Option<BondOrder> {
        match v {
            1 => Some(BondOrder::Single),
            2 => Some(BondOrder::Double),
            3 => Some(BondOrder::Triple),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MolError {
    #[error("atom index {index} out of range for {count} atoms")]
    AtomOutOfRange { index: usize, count: usize },
    #[error("valence of atom {atom} would exceed its maximum")]
    ValenceOverflow { atom: usize },
    #[error("element {0} may not be added by an edit")]
    ElementNotAllowed(Element),
    #[error("an anchor atom is required for a non-empty molecule")]
    MissingAnchor,
    #[error("bond {0}-{1} already exists")]
    BondExists(usize, usize),
    #[error("no bond between atoms {0} and {1}")]
    NoSuchBond(usize, usize),
    #[error("self-loop on atom {0}")]
    SelfLoop(usize),
    #[error("bond {0}-{1} already has the requested order")]
    SameOrder(usize, usize),
    #[error("edit would create a bridged ring system")]
    BridgedRings,
    #[error("removing bond {0}-{1} would split the molecule into two multi-atom fragments")]
    DisallowedSplit(usize, usize),
    #[error("molecule is disconnected")]
    Disconnected,
}

/// Heavy-atom graph with typed bonds. The empty molecule is a legal value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Molecule {
    atoms: Vec<Element>,
    /// Per-atom neighbor lists, kept sorted by neighbor index.
    adjacency: Vec<Vec<(usize, BondOrder)>>,
}

impl Molecule {
    pub fn empty() -> Self {
        Molecule::default()
    }

    pub fn single_atom(element: Element) -> Self {
        Molecule {
            atoms: vec![element],
            adjacency: vec![Vec::new()],
        }
    }

    /// Builds a molecule from explicit parts, checking indices, duplicate bonds,
    /// valences and connectivity.
    pub fn from_parts(
        atoms: Vec<Element>,
        bonds: &[(usize, usize, BondOrder)],
    ) -> Result<Self, MolError> {
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b, order) in bonds {
            for i in [a, b] {
                if i >= n {
                    return Err(MolError::AtomOutOfRange { index: i, count: n });
                }
            }
            if a == b {
                return Err(MolError::SelfLoop(a));
            }
            if adjacency[a].iter().any(|&(x, _)| x == b) {
                return Err(MolError::BondExists(a.min(b), a.max(b)));
            }
            adjacency[a].push((b, order));
            adjacency[b].push((a, order));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let mol = Molecule { atoms, adjacency };
        for i in 0..n {
            if mol.bond_order_sum(i) > mol.atoms[i].max_valence() {
                return Err(MolError::ValenceOverflow { atom: i });
            }
        }
        if mol.component_count() > 1 {
            return Err(MolError::Disconnected);
        }
        Ok(mol)
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn bond_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn atoms(&self) -> &[Element] {
        &self.atoms
    }

    pub fn element(&self, i: usize) -> Element {
        self.atoms[i]
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, BondOrder)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Each bond once, as `(a, b, order)` with `a < b`, in ascending order.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize, BondOrder)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, list)| {
            list.iter()
                .filter(move |&&(b, _)| a < b)
                .map(move |&(b, o)| (a, b, o))
        })
    }

    pub fn bond_order(&self, a: usize, b: usize) -> Option<BondOrder> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|&&(x, _)| x == b)
            .map(|&(_, o)| o)
    }

    pub fn bond_order_sum(&self, i: usize) -> u8 {
        self.adjacency[i].iter().map(|&(_, o)| o.value()).sum()
    }

    /// Remaining valence of atom `i`, i.e. its implicit hydrogen count.
    pub fn free_valence(&self, i: usize) -> Result<u8, MolError> {
        self.check_index(i)?;
        Ok(self.implicit_h(i))
    }

    /// Implicit hydrogens on atom `i`. Panics if `i` is out of range.
    pub fn implicit_h(&self, i: usize) -> u8 {
        self.atoms[i].max_valence() - self.bond_order_sum(i)
    }

    pub fn total_h(&self) -> usize {
        (0..self.atom_count()).map(|i| self.implicit_h(i) as usize).sum()
    }

    fn check_index(&self, i: usize) -> Result<(), MolError> {
        if i < self.atoms.len() {
            Ok(())
        } else {
            Err(MolError::AtomOutOfRange {
                index: i,
                count: self.atoms.len(),
            })
        }
    }

    /// Number of connected components (0 for the empty molecule).
    pub fn component_count(&self) -> usize {
        let n = self.atom_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Cyclomatic number: bonds - atoms + components.
    pub fn cyclomatic_number(&self) -> usize {
        self.bond_count() + self.component_count() - self.atom_count()
    }

    /// Checks every structural invariant a search state must satisfy.
    pub fn validate(&self) -> Result<(), MolError> {
        for i in 0..self.atom_count() {
            if self.bond_order_sum(i) > self.atoms[i].max_valence() {
                return Err(MolError::ValenceOverflow { atom: i });
            }
            for &(j, _) in &self.adjacency[i] {
                if j == i {
                    return Err(MolError::SelfLoop(i));
                }
            }
        }
        if self.component_count() > 1 {
            return Err(MolError::Disconnected);
        }
        if self.has_bridged_rings() {
            return Err(MolError::BridgedRings);
        }
        Ok(())
    }

    /// Adds `element` bonded to `anchor` with `order`. On the empty molecule the
    /// anchor must be `None` and a lone atom is created.
    pub fn add_atom(
        &self,
        anchor: Option<usize>,
        element: Element,
        order: BondOrder,
    ) -> Result<Molecule, MolError> {
        if !element.is_buildable() {
            return Err(MolError::ElementNotAllowed(element));
        }
        let Some(anchor) = anchor else {
            if self.is_empty() {
                return Ok(Molecule::single_atom(element));
            }
            return Err(MolError::MissingAnchor);
        };
        self.check_index(anchor)?;
        if order.value() > self.implicit_h(anchor) {
            return Err(MolError::ValenceOverflow { atom: anchor });
        }
        if order.value() > element.max_valence() {
            return Err(MolError::ValenceOverflow {
                atom: self.atom_count(),
            });
        }
        let mut next = self.clone();
        let new = next.atoms.len();
        next.atoms.push(element);
        next.adjacency.push(vec![(anchor, order)]);
        next.adjacency[anchor].push((new, order));
        Ok(next)
    }

    /// Adds a ring-closing bond between two existing atoms.
    pub fn add_bond(&self, a: usize, b: usize, order: BondOrder) -> Result<Molecule, MolError> {
        self.check_index(a)?;
        self.check_index(b)?;
        if a == b {
            return Err(MolError::SelfLoop(a));
        }
        if self.bond_order(a, b).is_some() {
            return Err(MolError::BondExists(a.min(b), a.max(b)));
        }
        for i in [a, b] {
            if order.value() > self.implicit_h(i) {
                return Err(MolError::ValenceOverflow { atom: i });
            }
        }
        let mut next = self.clone();
        insert_sorted(&mut next.adjacency[a], (b, order));
        insert_sorted(&mut next.adjacency[b], (a, order));
        // A molecule without rings gains exactly one ring, which cannot be bridged.
        if self.cyclomatic_number() > 0 && next.has_bridged_rings() {
            return Err(MolError::BridgedRings);
        }
        Ok(next)
    }

    /// Removes the bond `a-b`. A resulting lone atom is deleted; when both
    /// fragments are lone atoms, the one with the smaller canonical rank stays.
    pub fn remove_bond(&self, a: usize, b: usize) -> Result<Molecule, MolError> {
        self.check_index(a)?;
        self.check_index(b)?;
        if self.bond_order(a, b).is_none() {
            return Err(MolError::NoSuchBond(a, b));
        }
        let mut next = self.clone();
        next.adjacency[a].retain(|&(x, _)| x != b);
        next.adjacency[b].retain(|&(x, _)| x != a);
        if next.component_count() == 1 {
            // Breaking a ring bond can merge two rings into one that shares
            // three atoms with a third.
            if next.cyclomatic_number() > 1 && next.has_bridged_rings() {
                return Err(MolError::BridgedRings);
            }
            return Ok(next);
        }
        let a_alone = next.adjacency[a].is_empty();
        let b_alone = next.adjacency[b].is_empty();
        let drop = match (a_alone, b_alone) {
            (true, true) => {
                let rank = self.canonical_rank();
                if rank.rank[a] < rank.rank[b] {
                    b
                } else {
                    a
                }
            }
            (true, false) => a,
            (false, true) => b,
            (false, false) => return Err(MolError::DisallowedSplit(a, b)),
        };
        Ok(next.without_isolated_atom(drop))
    }

    /// Changes the order of the existing bond `a-b`.
    pub fn replace_bond(&self, a: usize, b: usize, order: BondOrder) -> Result<Molecule, MolError> {
        self.check_index(a)?;
        self.check_index(b)?;
        let old = self.bond_order(a, b).ok_or(MolError::NoSuchBond(a, b))?;
        if old == order {
            return Err(MolError::SameOrder(a, b));
        }
        if order > old {
            let delta = order.value() - old.value();
            for i in [a, b] {
                if delta > self.implicit_h(i) {
                    return Err(MolError::ValenceOverflow { atom: i });
                }
            }
        }
        let mut next = self.clone();
        for (x, y) in [(a, b), (b, a)] {
            for entry in next.adjacency[x].iter_mut() {
                if entry.0 == y {
                    entry.1 = order;
                }
            }
        }
        Ok(next)
    }

    fn without_isolated_atom(mut self, drop: usize) -> Molecule {
        debug_assert!(self.adjacency[drop].is_empty());
        self.atoms.remove(drop);
        self.adjacency.remove(drop);
        for list in &mut self.adjacency {
            for entry in list.iter_mut() {
                if entry.0 > drop {
                    entry.0 -= 1;
                }
            }
        }
        self
    }

    /// Returns the molecule with atom `i` of the input placed at `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Molecule {
        assert_eq!(perm.len(), self.atom_count());
        let mut atoms = vec![Element::C; self.atom_count()];
        let mut adjacency = vec![Vec::new(); self.atom_count()];
        for (i, &p) in perm.iter().enumerate() {
            atoms[p] = self.atoms[i];
            adjacency[p] = self.adjacency[i]
                .iter()
                .map(|&(j, o)| (perm[j], o))
                .collect();
            adjacency[p].sort_unstable();
        }
        Molecule { atoms, adjacency }
    }

    pub fn rings(&self) -> RingSet {
        rings::perceive(self)
    }

    /// True iff two rings of the smallest set of smallest rings share three or
    /// more atoms.
    pub fn has_bridged_rings(&self) -> bool {
        if self.cyclomatic_number() < 2 {
            return false;
        }
        self.rings().has_bridged_pair()
    }

    pub fn canonical_rank(&self) -> CanonicalRank {
        canon::canonical_rank(self)
    }

    /// Marks every bond that lies on a cycle, indexed like [`Molecule::neighbors`].
    pub fn ring_bond_flags(&self) -> Vec<Vec<bool>> {
        rings::ring_bond_flags(self)
    }
}

fn insert_sorted(list: &mut Vec<(usize, BondOrder)>, entry: (usize, BondOrder)) {
    let pos = list.partition_point(|&(x, _)| x < entry.0);
    list.insert(pos, entry);
}

#[cfg(test)]
mod tests {
    use super::*;
    use BondOrder::*;
    use Element::*;

    fn chain(elements: &[Element]) -> Molecule {
        let bonds: Vec<_> = (1..elements.len()).map(|i| (i - 1, i, Single)).collect();
        Molecule::from_parts(elements.to_vec(), &bonds).unwrap()
    }

    fn ring(n: usize) -> Molecule {
        let bonds: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, Single)).collect();
        Molecule::from_parts(vec![C; n], &bonds).unwrap()
    }

    #[test]
    fn free_valence_examples() {
        assert_eq!(Molecule::single_atom(C).free_valence(0), Ok(4));
        let co = Molecule::from_parts(vec![C, O], &[(0, 1, Double)]).unwrap();
        assert_eq!(co.free_valence(1), Ok(0));
        let cn = chain(&[C, N]);
        assert_eq!(cn.free_valence(1), Ok(2));
        assert!(matches!(
            cn.free_valence(5),
            Err(MolError::AtomOutOfRange { .. })
        ));
    }

    #[test]
    fn add_atom_examples() {
        let methane = Molecule::empty().add_atom(None, C, Single).unwrap();
        assert_eq!(methane.atoms(), &[C]);
        assert_eq!(methane.implicit_h(0), 4);

        let formaldehyde = methane.add_atom(Some(0), O, Double).unwrap();
        assert_eq!(formaldehyde.bond_order(0, 1), Some(Double));
        assert_eq!(formaldehyde.implicit_h(0), 2);

        assert!(matches!(
            formaldehyde.add_atom(Some(1), C, Single),
            Err(MolError::ValenceOverflow { atom: 1 })
        ));
        assert_eq!(
            methane.add_atom(Some(0), S, Single),
            Err(MolError::ElementNotAllowed(S))
        );
        assert_eq!(methane.add_atom(None, C, Single), Err(MolError::MissingAnchor));
        // O cannot take a triple bond.
        assert!(methane.add_atom(Some(0), O, Triple).is_err());
    }

    #[test]
    fn add_bond_examples() {
        let propane = chain(&[C, C, C]);
        let cyclopropane = propane.add_bond(0, 2, Single).unwrap();
        assert_eq!(cyclopropane.rings().len(), 1);
        assert_eq!(cyclopropane.rings().rings()[0].len(), 3);

        let ethane = chain(&[C, C]);
        assert_eq!(ethane.add_bond(0, 1, Single), Err(MolError::BondExists(0, 1)));
    }

    #[test]
    fn bridging_closure_is_rejected() {
        // Methylcyclohexane; closing the methyl onto C4 gives norbornane.
        let mut bonds: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6, Single)).collect();
        bonds.push((0, 6, Single));
        let methylcyclohexane = Molecule::from_parts(vec![C; 7], &bonds).unwrap();
        assert_eq!(
            methylcyclohexane.add_bond(6, 3, Single),
            Err(MolError::BridgedRings)
        );
        // A 1,4 closure straight across cyclohexane is a fused [2.2.0] system.
        let fused = ring(6).add_bond(0, 3, Single).unwrap();
        assert!(!fused.has_bridged_rings());
    }

    #[test]
    fn remove_bond_examples() {
        let cyclopropane = ring(3);
        let propane = cyclopropane.remove_bond(0, 1).unwrap();
        assert_eq!(propane.atom_count(), 3);
        assert_eq!(propane.bond_count(), 2);
        assert_eq!(propane.component_count(), 1);

        let ethanol = chain(&[C, C, O]);
        let ethane = ethanol.remove_bond(1, 2).unwrap();
        assert_eq!(ethane.atoms(), &[C, C]);

        let butane = chain(&[C, C, C, C]);
        assert_eq!(butane.remove_bond(1, 2), Err(MolError::DisallowedSplit(1, 2)));
        assert_eq!(butane.remove_bond(0, 2), Err(MolError::NoSuchBond(0, 2)));

        // Three fused rings; dropping 1-3 leaves bicyclo[1.1.1]pentane.
        let tricycle = Molecule::from_parts(
            vec![C; 5],
            &[(0, 1, Single), (0, 3, Single), (0, 4, Single), (1, 2, Single), (1, 3, Single), (2, 3, Single), (2, 4, Single)],
        )
        .unwrap();
        assert!(tricycle.validate().is_ok());
        assert_eq!(tricycle.remove_bond(1, 3), Err(MolError::BridgedRings));
        assert!(tricycle.remove_bond(0, 4).is_ok());
    }

    #[test]
    fn diatomic_split_keeps_lower_ranked_atom() {
        let co = chain(&[O, C]);
        assert_eq!(co.remove_bond(0, 1).unwrap().atoms(), &[C]);
        let oc = chain(&[C, O]);
        assert_eq!(oc.remove_bond(0, 1).unwrap().atoms(), &[C]);
    }

    #[test]
    fn replace_bond_examples() {
        let ethane = chain(&[C, C]);
        let ethylene = ethane.replace_bond(0, 1, Double).unwrap();
        assert_eq!(ethylene.bond_order(1, 0), Some(Double));
        assert_eq!(ethylene.implicit_h(0), 2);

        let co = Molecule::from_parts(vec![C, O], &[(0, 1, Double)]).unwrap();
        assert_eq!(
            co.replace_bond(0, 1, Triple),
            Err(MolError::ValenceOverflow { atom: 1 })
        );

        assert_eq!(ethylene.replace_bond(0, 1, Single).unwrap(), ethane);
        assert_eq!(ethane.replace_bond(0, 1, Single), Err(MolError::SameOrder(0, 1)));
    }

    #[test]
    fn from_parts_rejects_bad_graphs() {
        assert_eq!(
            Molecule::from_parts(vec![C, C], &[]),
            Err(MolError::Disconnected)
        );
        assert_eq!(
            Molecule::from_parts(vec![C], &[(0, 0, Single)]),
            Err(MolError::SelfLoop(0))
        );
        assert!(Molecule::from_parts(vec![O, O], &[(0, 1, Triple)]).is_err());
        assert!(Molecule::from_parts(vec![C, C], &[(0, 1, Single), (1, 0, Double)]).is_err());
    }

    #[test]
    fn permutation_preserves_structure() {
        let ethanol = chain(&[C, C, O]);
        let p = ethanol.permuted(&[2, 0, 1]);
        assert_eq!(p.atoms(), &[C, O, C]);
        assert_eq!(p.bond_order(2, 0), Some(Single));
        assert_eq!(p.bond_order(0, 1), Some(Single));
    }
}
