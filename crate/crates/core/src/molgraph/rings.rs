//! Smallest-set-of-smallest-rings perception.
//!
//! Candidate cycles are Horton cycles (shortest path from a root to each end of
//! an edge, closed by that edge). Sorted by length, a GF(2) elimination over
//! bond bitsets keeps the first `cyclomatic number` independent ones, which is
//! a minimum cycle basis.

use std::collections::HashSet;
use std::collections::VecDeque;

use super::Molecule;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RingSet {
    rings: Vec<Vec<usize>>,
    membership: Vec<u32>,
}

impl RingSet {
    /// Rings as atom cycles, in ascending size.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn len(&self) -> usize {
        self.rings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }

    /// Number of rings containing each atom.
    pub fn membership(&self) -> &[u32] {
        &self.membership
    }

    pub fn largest_ring_size(&self) -> usize {
        self.rings.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn ring_sizes(&self) -> Vec<usize> {
        self.rings.iter().map(Vec::len).collect()
    }

    pub(crate) fn has_bridged_pair(&self) -> bool {
        let sets: Vec<HashSet<usize>> = self
            .rings
            .iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if sets[i].intersection(&sets[j]).count() >= 3 {
                    return true;
                }
            }
        }
        false
    }
}

struct BondIndex {
    /// `ids[a][k]` is the bond id of `mol.neighbors(a)[k]`.
    ids: Vec<Vec<usize>>,
    count: usize,
}

impl BondIndex {
    fn new(mol: &Molecule) -> Self {
        let n = mol.atom_count();
        let mut ids = vec![Vec::new(); n];
        let mut count = 0;
        for a in 0..n {
            ids[a] = vec![usize::MAX; mol.degree(a)];
        }
        for a in 0..n {
            for (k, &(b, _)) in mol.neighbors(a).iter().enumerate() {
                if a < b {
                    ids[a][k] = count;
                    let back = mol
                        .neighbors(b)
                        .iter()
                        .position(|&(x, _)| x == a)
                        .expect("adjacency is symmetric");
                    ids[b][back] = count;
                    count += 1;
                }
            }
        }
        BondIndex { ids, count }
    }

    fn id(&self, mol: &Molecule, a: usize, b: usize) -> usize {
        let k = mol
            .neighbors(a)
            .iter()
            .position(|&(x, _)| x == b)
            .expect("bond exists");
        self.ids[a][k]
    }
}

/// Flags bonds that lie on at least one cycle (i.e. are not graph bridges).
pub(crate) fn ring_bond_flags(mol: &Molecule) -> Vec<Vec<bool>> {
    let n = mol.atom_count();
    let index = BondIndex::new(mol);
    let mut is_bridge = vec![false; index.count];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    // Iterative Tarjan bridge finding; frames are (vertex, parent bond, next neighbor slot).
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(frame) = stack.last_mut() {
            let (v, parent_bond, slot) = *frame;
            if slot < mol.degree(v) {
                frame.2 += 1;
                let w = mol.neighbors(v)[slot].0;
                let bond = index.ids[v][slot];
                if bond == parent_bond {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, bond, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        is_bridge[parent_bond] = true;
                    }
                }
            }
        }
    }
    (0..n)
        .map(|a| index.ids[a].iter().map(|&id| !is_bridge[id]).collect())
        .collect()
}

pub(crate) fn perceive(mol: &Molecule) -> RingSet {
    let n = mol.atom_count();
    let mut membership = vec![0u32; n];
    let target = if n == 0 { 0 } else { mol.cyclomatic_number() };
    if target == 0 {
        return RingSet {
            rings: Vec::new(),
            membership,
        };
    }
    let index = BondIndex::new(mol);
    let flags = ring_bond_flags(mol);
    // Cyclic subgraph only: bridges never take part in a cycle.
    let cyclic: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            mol.neighbors(a)
                .iter()
                .zip(&flags[a])
                .filter(|(_, &f)| f)
                .map(|(&(b, _), _)| b)
                .collect()
        })
        .collect();
    let words = index.count.div_ceil(64);

    let mut candidates: Vec<(Vec<usize>, Vec<u64>)> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut dist = vec![usize::MAX; n];
    let mut pred = vec![usize::MAX; n];
    for root in 0..n {
        if cyclic[root].is_empty() {
            continue;
        }
        bfs(&cyclic, root, &mut dist, &mut pred);
        for x in 0..n {
            if dist[x] == usize::MAX {
                continue;
            }
            for &y in &cyclic[x] {
                if x >= y || dist[y] == usize::MAX {
                    continue;
                }
                // Only the shortest closing edges give candidate cycles.
                if dist[x].abs_diff(dist[y]) > 1 || pred[x] == y || pred[y] == x {
                    continue;
                }
                let px = path_to_root(&pred, x);
                let py = path_to_root(&pred, y);
                // Paths must meet only at the root.
                let sx: HashSet<usize> = px[..px.len() - 1].iter().copied().collect();
                if py[..py.len() - 1].iter().any(|v| sx.contains(v)) {
                    continue;
                }
                let mut ring: Vec<usize> = px.iter().rev().copied().collect();
                ring.extend(py.iter().take(py.len() - 1));
                let mut bits = vec![0u64; words];
                for k in 0..ring.len() {
                    let a = ring[k];
                    let b = ring[(k + 1) % ring.len()];
                    let id = index.id(mol, a, b);
                    bits[id / 64] |= 1 << (id % 64);
                }
                if seen.insert(bits.clone()) {
                    candidates.push((ring, bits));
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.0.len().cmp(&b.0.len()).then_with(|| {
            let mut sa = a.0.clone();
            let mut sb = b.0.clone();
            sa.sort_unstable();
            sb.sort_unstable();
            sa.cmp(&sb)
        })
    });

    // Incremental GF(2) elimination, basis kept as (pivot bit, row).
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for (ring, bits) in candidates {
        let mut row = bits;
        for (pivot, brow) in &basis {
            if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (r, b) in row.iter_mut().zip(brow) {
                    *r ^= b;
                }
            }
        }
        let Some(pivot) = first_bit(&row) else {
            continue;
        };
        basis.push((pivot, row));
        rings.push(normalize_cycle(ring));
        if rings.len() == target {
            break;
        }
    }
    for ring in &rings {
        for &a in ring {
            membership[a] += 1;
        }
    }
    RingSet { rings, membership }
}

fn bfs(adj: &[Vec<usize>], root: usize, dist: &mut [usize], pred: &mut [usize]) {
    dist.fill(usize::MAX);
    pred.fill(usize::MAX);
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                pred[w] = v;
                queue.push_back(w);
            }
        }
    }
}

/// Path `v, pred(v), ..., root`.
fn path_to_root(pred: &[usize], mut v: usize) -> Vec<usize> {
    let mut path = vec![v];
    while pred[v] != usize::MAX {
        v = pred[v];
        path.push(v);
    }
    path
}

fn first_bit(row: &[u64]) -> Option<usize> {
    row.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// Rotates the cycle to start at its smallest atom, walking toward the smaller neighbor.
fn normalize_cycle(mut ring: Vec<usize>) -> Vec<usize> {
    let len = ring.len();
    let start = (0..len).min_by_key(|&i| ring[i]).unwrap_or(0);
    ring.rotate_left(start);
    if len > 2 && ring[len - 1] < ring[1] {
        ring[1..].reverse();
    }
    ring
}

#[cfg(test)]
mod tests {
    use super::super::{BondOrder::*, Element::*, Molecule};


    fn graph(n: usize, bonds: &[(usize, usize)]) -> Molecule {
        let b: Vec<_> = bonds.iter().map(|&(a, b)| (a, b, Single)).collect();
        Molecule::from_parts(vec![C; n], &b).unwrap()
    }

    fn cycle_bonds(atoms: &[usize]) -> Vec<(usize, usize)> {
        (0..atoms.len())
            .map(|i| (atoms[i], atoms[(i + 1) % atoms.len()]))
            .collect()
    }

    #[test]
    fn propane_has_no_rings() {
        assert!(graph(3, &[(0, 1), (1, 2)]).rings().is_empty());
    }

    #[test]
    fn cyclohexane_single_ring() {
        let rings = graph(6, &cycle_bonds(&[0, 1, 2, 3, 4, 5])).rings();
        assert_eq!(rings.ring_sizes(), vec![6]);
        assert_eq!(rings.rings()[0], vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(rings.membership(), &[1; 6]);
    }

    fn naphthalene() -> Molecule {
        let mut b = cycle_bonds(&[0, 1, 2, 3, 4, 5]);
        b.extend([(4, 6), (6, 7), (7, 8), (8, 9), (9, 5)]);
        graph(10, &b)
    }

    #[test]
    fn naphthalene_fused_rings_share_two_atoms() {
        let mol = naphthalene();
        let rings = mol.rings();
        assert_eq!(rings.ring_sizes(), vec![6, 6]);
        let shared: Vec<_> = rings.rings()[0]
            .iter()
            .filter(|a| rings.rings()[1].contains(a))
            .collect();
        assert_eq!(shared.len(), 2);
        assert!(!mol.has_bridged_rings());
    }

    #[test]
    fn spiro_nonane_is_not_bridged() {
        let mut b = cycle_bonds(&[0, 1, 2, 3, 4]);
        b.extend(cycle_bonds(&[0, 5, 6, 7, 8]));
        let mol = graph(9, &b);
        assert_eq!(mol.rings().ring_sizes(), vec![5, 5]);
        assert_eq!(mol.rings().membership()[0], 2);
        assert!(!mol.has_bridged_rings());
    }

    #[test]
    fn norbornane_is_bridged() {
        // C1..C6 ring plus C7 bridging C1 and C4.
        let mut b = cycle_bonds(&[0, 1, 2, 3, 4, 5]);
        b.extend([(0, 6), (6, 3)]);
        let mol = graph(7, &b);
        assert_eq!(mol.rings().ring_sizes(), vec![5, 5]);
        assert!(mol.has_bridged_rings());
    }

    #[test]
    fn cyclomatic_identity_on_polycycles() {
        // Cubane-like: 8 atoms, 12 bonds, 5 rings.
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
        let rings = graph(8, &b).rings();
        assert_eq!(rings.len(), 5);
        assert!(rings.ring_sizes().iter().all(|&s| s == 4));
    }

    #[test]
    fn ring_bond_flags_mark_only_cycle_bonds() {
        let mut b = cycle_bonds(&[0, 1, 2]);
        b.push((2, 3));
        let mol = graph(4, &b);
        let flags = mol.ring_bond_flags();
        assert_eq!(flags[3], vec![false]);
        assert!(flags[0].iter().all(|&f| f));
    }
}
