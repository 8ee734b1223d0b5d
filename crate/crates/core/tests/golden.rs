//! Descriptor agreement with frozen reference values for the 50-molecule
//! corpus in `tests/data/reference_descriptors.csv` (stored to six decimals).

use std::collections::BTreeMap;

use unitmcts_core::properties::{descriptors, qed};
use unitmcts_core::smiles::{parse, write_canonical};

fn reference() -> BTreeMap<String, BTreeMap<String, f64>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/reference_descriptors.csv");
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for row in csv::Reader::from_path(path).unwrap().records() {
        let row = row.unwrap();
        out.entry(row[0].to_owned())
            .or_default()
            .insert(row[1].to_owned(), row[2].parse().unwrap());
    }
    out
}

#[test]
fn corpus_keys_are_canonical() {
    let refs = reference();
    assert_eq!(refs.len(), 50);
    for smiles in refs.keys() {
        assert_eq!(&write_canonical(&parse(smiles).unwrap()), smiles);
    }
}

#[test]
fn descriptors_match_the_reference() {
    for (smiles, want) in reference() {
        let d = descriptors(&parse(&smiles).unwrap()).unwrap();
        let close = |name: &str, got: f64, tol: f64| {
            assert!((got - want[name]).abs() <= tol, "{smiles} {name}: {got} vs {}", want[name]);
        };
        close("mol_wt", d.molecular_weight, 1e-6);
        close("tpsa", d.tpsa, 1e-6);
        close("crippen_logp", d.alogp, 1e-6);
        close("hba", d.hba as f64, 0.0);
        close("rotatable_bonds", d.rotatable_bonds as f64, 0.0);
        close("aromatic_rings", d.aromatic_rings as f64, 0.0);
    }
}

#[test]
fn qed_matches_the_reference() {
    let refs = reference();
    let mut worst: f64 = 0.0;
    for (smiles, want) in &refs {
        let got = qed(&parse(smiles).unwrap()).unwrap();
        worst = worst.max((got - want["qed_no_alerts"]).abs());
    }
    assert!(worst <= 1e-6, "largest QED difference {worst}");
}
