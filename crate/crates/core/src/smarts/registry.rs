//! The functional-group table and per-molecule occurrence counts.
//!
//! Registry files are tab-separated `representation<TAB>smarts<TAB>name`
//! lines; blank lines and lines starting with `//` are ignored
//! (`#` cannot mark comments because `#N` is a valid representation). Two entries may share a
//! name (the built-in table lists two imine patterns); their matches are
//! pooled when counting.

use std::collections::BTreeSet;
use std::path::Path;

use super::{find_matches, parse_smarts, SmartsError, SmartsPattern};
use crate::chem::Molecule;

/// The built-in 38-entry table.
pub const BUILTIN_REGISTRY: &str = include_str!("../../data/functional_groups.tsv");

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("registry line {line}: expected 3 tab-separated fields, found {found}")]
    Fields { line: usize, found: usize },
    #[error("registry line {line}: {source}")]
    Pattern {
        line: usize,
        #[source]
        source: SmartsError,
    },
    #[error("registry is empty")]
    Empty,
    #[error("cannot read registry {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct FunctionalGroup {
    pub representation: String,
    pub smarts: String,
    pub name: String,
    pub pattern: SmartsPattern,
}

#[derive(Debug, Clone)]
pub struct FunctionalGroupRegistry {
    entries: Vec<FunctionalGroup>,
    names: Vec<String>,
}

impl FunctionalGroupRegistry {
    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with("//") {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(RegistryError::Fields {
                    line: i + 1,
                    found: fields.len(),
                });
            }
            let pattern = parse_smarts(fields[1])
                .map_err(|source| RegistryError::Pattern { line: i + 1, source })?;
            entries.push(FunctionalGroup {
                representation: fields[0].to_string(),
                smarts: fields[1].to_string(),
                name: fields[2].to_string(),
                pattern,
            });
        }
        if entries.is_empty() {
            return Err(RegistryError::Empty);
        }
        let mut names: Vec<String> = Vec::new();
        for e in &entries {
            if !names.contains(&e.name) {
                names.push(e.name.clone());
            }
        }
        Ok(FunctionalGroupRegistry { entries, names })
    }

    pub fn load(path: &Path) -> Result<Self, RegistryError> {
        let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_REGISTRY).expect("built-in registry parses")
    }

    pub fn entries(&self) -> &[FunctionalGroup] {
        &self.entries
    }

    /// Distinct group names in first-appearance order.
    pub fn group_names(&self) -> &[String] {
        &self.names
    }
}

/// Non-zero occurrence counts in registry order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupCounts(Vec<(String, usize)>);

impl GroupCounts {
    pub fn get(&self, name: &str) -> usize {
        self.0
            .iter()
            .find(|(n, _)| n == name)
            .map_or(0, |&(_, c)| c)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name) > 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(n, c)| (n.as_str(), *c))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Counts distinct occurrences of every group in `mol`.
pub fn detect_functional_groups(mol: &Molecule, registry: &FunctionalGroupRegistry) -> GroupCounts {
    let mut counts = Vec::new();
    for name in registry.group_names() {
        let mut hits: BTreeSet<Vec<usize>> = BTreeSet::new();
        for entry in registry.entries().iter().filter(|e| &e.name == name) {
            hits.extend(find_matches(mol, &entry.pattern));
        }
        if !hits.is_empty() {
            counts.push((name.clone(), hits.len()));
        }
    }
    GroupCounts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;
    use sha2::{Digest, Sha256};

    #[test]
    fn builtin_table_checksum() {
        let reg = FunctionalGroupRegistry::builtin();
        assert_eq!(reg.entries().len(), 38);
        assert!(reg.entries().iter().all(|e| e.name != "???"));
        let mut h = Sha256::new();
        for e in reg.entries() {
            h.update(format!("{}\t{}\n", e.name, e.smarts).as_bytes());
        }
        let digest: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(
            digest,
            "39641cacddf576a41f67f86a5fb6ff845424375e93cf3bf36cee63494ae26c81"
        );
        assert_eq!(reg.group_names().len(), 37);
    }

    #[test]
    fn acetylcarnitine_has_a_carboxylate() {
        let reg = FunctionalGroupRegistry::builtin();
        let mol = parse_smiles("CC(=O)OC(CC(=O)[O-])C[N+](C)(C)C").unwrap();
        let counts = detect_functional_groups(&mol, &reg);
        assert_eq!(counts.get("carboxylic acids"), 1);
    }

    #[test]
    fn ethanol_has_no_methyl_amide() {
        let reg = FunctionalGroupRegistry::builtin();
        let counts = detect_functional_groups(&parse_smiles("CCO").unwrap(), &reg);
        assert!(!counts.contains("methyl amide"));
        assert_eq!(counts.get("side-chain hydroxyls"), 1);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(
            FunctionalGroupRegistry::parse("-O\t*-[O;D1]\n"),
            Err(RegistryError::Fields { line: 1, found: 2 })
        ));
        assert!(matches!(
            FunctionalGroupRegistry::parse("// c\n-Q\t*-[Q]\tq\n"),
            Err(RegistryError::Pattern { line: 2, .. })
        ));
        assert!(matches!(
            FunctionalGroupRegistry::parse("// only comments\n"),
            Err(RegistryError::Empty)
        ));
    }
}
