"""One-time generator for reference_descriptors.csv.

Reads canonical SMILES (one per line, as written by this crate) and writes
reference values from RDKit. Tests only read the frozen CSV; this script is
kept to document where the numbers came from.

    python3 generate_golden.py canonical.smi > reference_descriptors.csv
"""
import csv
import sys

from rdkit import Chem
from rdkit.Chem import QED, Crippen, Descriptors, rdMolDescriptors


def main(path):
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["canonical_smiles", "descriptor_name", "value"])
    for line in open(path):
        smiles = line.strip()
        if not smiles:
            continue
        mol = Chem.MolFromSmiles(smiles)
        props = QED.properties(mol)
        values = [
            ("crippen_logp", Crippen.MolLogP(mol)),
            ("tpsa", rdMolDescriptors.CalcTPSA(mol)),
            ("mol_wt", Descriptors.MolWt(mol)),
            ("hba", props.HBA),
            ("rotatable_bonds", props.ROTB),
            ("aromatic_rings", props.AROM),
            ("qed_no_alerts", QED.qed(mol, qedProperties=props._replace(ALERTS=0))),
        ]
        for name, value in values:
            out.writerow([smiles, name, f"{value:.6f}" if isinstance(value, float) else value])


if __name__ == "__main__":
    main(sys.argv[1])
