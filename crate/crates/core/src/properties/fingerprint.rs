//! Circular (ECFP-style) fingerprints and Tanimoto similarity.

use serde::{Deserialize, Serialize};

use super::PropertyError;
use crate::molgraph::Molecule;

pub const DEFAULT_WIDTH: usize = 2048;
pub const DEFAULT_RADIUS: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    width: usize,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn new(width: usize) -> Self {
        Fingerprint {
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    pub fn from_bits(width: usize, bits: &[usize]) -> Self {
        let mut fp = Fingerprint::new(width);
        for &b in bits {
            fp.set(b);
        }
        fp
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.width, "bit {bit} outside width {}", self.width);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] & (1 << (bit % 64)) != 0
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&b| self.get(b))
    }
}

/// SplitMix64 finaliser; fixed so fingerprints are stable across builds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn combine(seed: u64, value: u64) -> u64 {
    mix(seed ^ value.wrapping_mul(0x100_0000_01b3))
}

pub fn fingerprint(mol: &Molecule) -> Fingerprint {
    fingerprint_with(mol, DEFAULT_WIDTH, DEFAULT_RADIUS)
}

/// Hashes each atom's neighborhood out to `radius` bonds. Identifiers start
/// from (element, degree, bond order sum, implicit H, in ring) and each round
/// folds in the sorted (bond order, neighbor identifier) pairs.
pub fn fingerprint_with(mol: &Molecule, width: usize, radius: usize) -> Fingerprint {
    let n = mol.atom_count();
    let in_ring: Vec<bool> = mol
        .ring_bond_flags()
        .iter()
        .map(|f| f.iter().any(|&r| r))
        .collect();
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let seed = [
                u64::from(mol.element(i).atomic_number()),
                mol.degree(i) as u64,
                u64::from(mol.bond_order_sum(i)),
                u64::from(mol.implicit_h(i)),
                u64::from(in_ring[i]),
            ];
            seed.iter().fold(0, |h, &v| combine(h, v))
        })
        .collect();
    let mut fp = Fingerprint::new(width);
    for &id in &ids {
        fp.set((id % width as u64) as usize);
    }
    for round in 1..=radius {
        ids = (0..n)
            .map(|i| {
                let mut env: Vec<(u8, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(j, o)| (o.value(), ids[j]))
                    .collect();
                env.sort_unstable();
                let mut h = combine(round as u64, ids[i]);
                for (o, id) in env {
                    h = combine(combine(h, u64::from(o)), id);
                }
                h
            })
            .collect();
        for &id in &ids {
            fp.set((id % width as u64) as usize);
        }
    }
    fp
}

/// |a ∧ b| / |a ∨ b|, with 1.0 for two empty fingerprints.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, PropertyError> {
    if a.width != b.width {
        return Err(PropertyError::WidthMismatch(a.width, b.width));
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    if either == 0 {
        return Ok(1.0);
    }
    Ok(f64::from(both) / f64::from(either))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse;

    #[test]
    fn hand_counted_tanimoto() {
        let a = Fingerprint::from_bits(4, &[2, 3]);
        let b = Fingerprint::from_bits(4, &[1, 2]);
        assert!((tanimoto(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        let c = Fingerprint::from_bits(4, &[0]);
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        assert_eq!(
            tanimoto(&Fingerprint::new(4), &Fingerprint::new(4)).unwrap(),
            1.0
        );
        assert_eq!(
            tanimoto(&a, &Fingerprint::new(8)),
            Err(PropertyError::WidthMismatch(4, 8))
        );
    }

    #[test]
    fn methane_and_benzene_are_dissimilar() {
        let m = fingerprint(&parse("C").unwrap());
        let b = fingerprint(&parse("c1ccccc1").unwrap());
        assert!(tanimoto(&m, &b).unwrap() < 0.2);
    }

    #[test]
    fn relabeling_keeps_bits() {
        let mol = parse("CC(=O)Nc1ccc(O)cc1").unwrap();
        let n = mol.atom_count();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        assert_eq!(fingerprint(&mol), fingerprint(&mol.permuted(&perm)));
    }
}
