//! SMILES list files: one molecule per line, `#` comments and blank lines
//! ignored.

use std::fs;
use std::path::Path;

use log::warn;

use super::HarnessError;
use crate::molgraph::Molecule;
use crate::smiles::{parse_with_warnings, SmilesError};

#[derive(Clone, Debug)]
pub struct LoadedMolecule {
    /// 1-based line number in the source file.
    pub line: usize,
    pub text: String,
    pub mol: Molecule,
}

#[derive(Clone, Debug)]
pub struct LineError {
    pub line: usize,
    pub text: String,
    pub error: SmilesError,
}

#[derive(Clone, Debug, Default)]
pub struct MoleculeList {
    pub molecules: Vec<LoadedMolecule>,
    pub errors: Vec<LineError>,
    /// Parser warnings (dropped stereo, charges, isotopes) across all lines.
    pub warnings: usize,
}

impl MoleculeList {
    pub fn parse_str(content: &str) -> Self {
        let mut list = MoleculeList::default();
        for (i, raw) in content.lines().enumerate() {
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            // Allow a trailing name column.
            let smiles = text.split_whitespace().next().unwrap_or(text);
            match parse_with_warnings(smiles) {
                Ok((mol, warnings)) => {
                    list.warnings += warnings.len();
                    list.molecules.push(LoadedMolecule {
                        line: i + 1,
                        text: smiles.to_owned(),
                        mol,
                    });
                }
                Err(error) => {
                    warn!("line {}: skipping '{}': {}", i + 1, smiles, error);
                    list.errors.push(LineError {
                        line: i + 1,
                        text: smiles.to_owned(),
                        error,
                    });
                }
            }
        }
        list
    }
}

pub fn load_molecule_list(path: &Path) -> Result<MoleculeList, HarnessError> {
    let content = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(MoleculeList::parse_str(&content))
}
