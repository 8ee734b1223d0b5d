//! Canonical atom ranking.
//!
//! Ranks start from the atom invariant `(atomic number, degree, bond order sum,
//! implicit H)` and are refined by sorted neighbor ranks until stable. Remaining
//! ties are broken by individualization: each candidate in the first tied cell
//! is given the lower rank in turn and the labeling with the smallest
//! certificate wins. Interchangeable twins (same neighbors) are tried once and
//! the search stops after [`LEAF_BUDGET`] labelings.

use super::Molecule;

/// Upper bound on complete labelings examined per molecule.
const LEAF_BUDGET: usize = 32;

/// A permutation of `0..n` assigning each atom its canonical position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalRank {
    pub rank: Vec<usize>,
}

impl CanonicalRank {
    /// Atom indices in canonical order.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.rank.len()];
        for (atom, &r) in self.rank.iter().enumerate() {
            order[r] = atom;
        }
        order
    }
}

pub(crate) fn canonical_rank(mol: &Molecule) -> CanonicalRank {
    let n = mol.atom_count();
    if n == 0 {
        return CanonicalRank { rank: Vec::new() };
    }
    let invariants: Vec<(u8, usize, u8, u8)> = (0..n)
        .map(|i| {
            (
                mol.element(i).atomic_number(),
                mol.degree(i),
                mol.bond_order_sum(i),
                mol.implicit_h(i),
            )
        })
        .collect();
    let mut ranks = ranks_from_keys(&invariants);
    refine(mol, &mut ranks);

    let mut search = Search {
        mol,
        best: None,
        leaves: 0,
    };
    search.descend(ranks);
    let (_, rank) = search.best.expect("at least one leaf is visited");
    CanonicalRank { rank }
}

struct Search<'a> {
    mol: &'a Molecule,
    best: Option<(Vec<u32>, Vec<usize>)>,
    leaves: usize,
}

impl Search<'_> {
    fn descend(&mut self, ranks: Vec<usize>) {
        let n = ranks.len();
        let Some(cell_rank) = first_tied_rank(&ranks) else {
            self.leaves += 1;
            let cert = certificate(self.mol, &ranks);
            if self.best.as_ref().is_none_or(|(c, _)| cert < *c) {
                self.best = Some((cert, ranks));
            }
            return;
        };
        let cell: Vec<usize> = (0..n).filter(|&i| ranks[i] == cell_rank).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &atom in &cell {
            if self.leaves >= LEAF_BUDGET {
                return;
            }
            if tried.iter().any(|&t| are_twins(self.mol, t, atom)) {
                continue;
            }
            tried.push(atom);
            let mut next = ranks.clone();
            for r in next.iter_mut() {
                if *r == cell_rank {
                    *r += 1;
                }
            }
            next[atom] = cell_rank;
            refine(self.mol, &mut next);
            self.descend(next);
        }
    }
}

/// Rank of the lowest cell with more than one atom, if any.
fn first_tied_rank(ranks: &[usize]) -> Option<usize> {
    let mut counts = vec![0u32; ranks.len()];
    for &r in ranks {
        counts[r] += 1;
    }
    counts.iter().position(|&c| c > 1)
}

/// Atoms with identical neighborhoods (ignoring each other) can be swapped by
/// an automorphism that fixes everything else.
fn are_twins(mol: &Molecule, a: usize, b: usize) -> bool {
    let strip = |x: usize, other: usize| {
        mol.neighbors(x)
            .iter()
            .filter(|&&(y, _)| y != other)
            .copied()
            .collect::<Vec<_>>()
    };
    mol.element(a) == mol.element(b) && strip(a, b) == strip(b, a)
}

/// Rank = number of atoms with a strictly smaller key.
fn ranks_from_keys<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    for k in 1..order.len() {
        let (prev, cur) = (order[k - 1], order[k]);
        ranks[cur] = if keys[cur] == keys[prev] {
            ranks[prev]
        } else {
            k
        };
    }
    ranks
}

fn class_count(ranks: &[usize]) -> usize {
    let mut seen = vec![false; ranks.len()];
    ranks.iter().filter(|&&r| !std::mem::replace(&mut seen[r], true)).count()
}

/// Highest degree any element allows (carbon).
const MAX_DEGREE: usize = 4;

/// Iterative neighborhood refinement; never merges existing classes.
fn refine(mol: &Molecule, ranks: &mut Vec<usize>) {
    let n = ranks.len();
    let mut classes = class_count(ranks);
    let mut keys: Vec<(usize, [u32; MAX_DEGREE])> = vec![(0, [u32::MAX; MAX_DEGREE]); n];
    while classes < n {
        for (i, key) in keys.iter_mut().enumerate() {
            let mut nbrs = [u32::MAX; MAX_DEGREE];
            for (slot, &(j, o)) in nbrs.iter_mut().zip(mol.neighbors(i)) {
                *slot = (ranks[j] as u32) << 2 | o.value() as u32;
            }
            nbrs.sort_unstable();
            *key = (ranks[i], nbrs);
        }
        let next = ranks_from_keys(&keys);
        let next_classes = class_count(&next);
        *ranks = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
}

/// Encodes the graph relabeled by `ranks`; equal certificates mean isomorphic graphs.
fn certificate(mol: &Molecule, ranks: &[usize]) -> Vec<u32> {
    let n = ranks.len();
    let mut order = vec![0; n];
    for (atom, &r) in ranks.iter().enumerate() {
        order[r] = atom;
    }
    let mut cert = Vec::with_capacity(2 * n + 3 * mol.bond_count());
    for &atom in &order {
        cert.push(mol.element(atom).atomic_number() as u32);
        cert.push(mol.implicit_h(atom) as u32);
    }
    let mut edges: Vec<(u32, u32, u32)> = mol
        .bonds()
        .map(|(a, b, o)| {
            let (x, y) = (ranks[a] as u32, ranks[b] as u32);
            (x.min(y), x.max(y), o.value() as u32)
        })
        .collect();
    edges.sort_unstable();
    for (x, y, o) in edges {
        cert.extend([x, y, o]);
    }
    cert
}

#[cfg(test)]
mod tests {
    use super::super::{BondOrder::*, Element::*, Molecule};

    fn relabel_all(mol: &Molecule) -> Vec<Molecule> {
        // Every rotation plus the reversal of the identity order.
        let n = mol.atom_count();
        let mut out = Vec::new();
        for shift in 0..n {
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            out.push(mol.permuted(&perm));
        }
        let rev: Vec<usize> = (0..n).rev().collect();
        out.push(mol.permuted(&rev));
        out
    }

    fn canonical_graph(mol: &Molecule) -> Molecule {
        let rank = mol.canonical_rank();
        mol.permuted(&rank.rank)
    }

    #[test]
    fn single_atom_rank() {
        assert_eq!(Molecule::single_atom(N).canonical_rank().rank, vec![0]);
    }

    #[test]
    fn ethane_ranks_are_a_permutation() {
        let ethane = Molecule::from_parts(vec![C, C], &[(0, 1, Single)]).unwrap();
        let mut r = ethane.canonical_rank().rank;
        r.sort_unstable();
        assert_eq!(r, vec![0, 1]);
    }

    #[test]
    fn relabeling_gives_identical_canonical_graph() {
        let mut bonds: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6, Single)).collect();
        bonds[0].2 = Double;
        bonds[2].2 = Double;
        bonds[4].2 = Double;
        bonds.push((0, 6, Single));
        bonds.push((6, 7, Double));
        let mol = Molecule::from_parts(vec![C, C, C, C, N, C, C, O], &bonds).unwrap();
        let reference = canonical_graph(&mol);
        for m in relabel_all(&mol) {
            assert_eq!(canonical_graph(&m), reference);
        }
    }

    #[test]
    fn symmetric_cages_are_canonical() {
        // Cubane: every atom equivalent, stresses the tie-breaking search.
        let b = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 0),
            (4, 5),
            (5, 6),
            (6, 7),
            (7, 4),
            (0, 4),
            (1, 5),
            (2, 6),
            (3, 7),
        ];
        let bonds: Vec<_> = b.iter().map(|&(x, y)| (x, y, Single)).collect();
        let cubane = Molecule::from_parts(vec![C; 8], &bonds).unwrap();
        let reference = canonical_graph(&cubane);
        for m in relabel_all(&cubane) {
            assert_eq!(canonical_graph(&m), reference);
        }
    }
}
