//! Molecular graphs parsed from SMILES.
//!
//! Hydrogens are never graph nodes: bracket atoms carry their written H
//! count and organic-subset atoms derive theirs from a default valence.
//! Aromaticity is taken from the input (lowercase atoms, `:` bonds); no
//! perception or kekulization is attempted.

mod corpus;
pub mod elements;
mod rings;
mod smiles;

pub use corpus::{read_corpus, CorpusEntry};
pub use rings::ring_flags;
pub use smiles::{parse_smiles, SmilesError};

use std::fmt;

/// Bond multiplicity. Aromatic bonds are first-class rather than kekulized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Bond order in half units (aromatic = 3, i.e. 1.5).
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BondOrder::Single => "single",
            BondOrder::Double => "double",
            BondOrder::Triple => "triple",
            BondOrder::Aromatic => "aromatic",
        }
    }
}

impl fmt::Display for BondOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tetrahedral chirality tag as written. Carries no semantics downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chirality {
    CounterClockwise,
    Clockwise,
}

/// Directional single bond marker (`/` or `\`). Recorded only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondStereo {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub index: usize,
    pub element: u8,
    pub formal_charge: i8,
    pub aromatic: bool,
    /// Written H count of a bracket atom (`Some(0)` when a bracket atom has
    /// no H); `None` for organic-subset atoms.
    pub explicit_h: Option<u8>,
    pub isotope: Option<u16>,
    pub chirality: Option<Chirality>,
    pub in_ring: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub stereo: Option<BondStereo>,
    pub in_ring: bool,
}

impl Bond {
    /// The endpoint opposite to `atom`.
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }

    /// Endpoints as `(min, max)`.
    pub fn key(&self) -> (usize, usize) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

/// Errors raised when assembling a molecule from explicit atoms and bonds.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoleculeError {
    #[error("atom at position {position} has index {index}")]
    AtomIndex { position: usize, index: usize },
    #[error("bond {bond} references missing atom {atom}")]
    MissingAtom { bond: usize, atom: usize },
    #[error("bond {bond} is a self-loop on atom {atom}")]
    SelfLoop { bond: usize, atom: usize },
    #[error("atoms {a} and {b} are bonded twice")]
    DuplicateBond { a: usize, b: usize },
    #[error("permutation of length {got} does not cover {expected} atoms")]
    BadPermutation { expected: usize, got: usize },
}

/// A heavy-atom molecular graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    source: String,
    /// `adjacency[u]` lists `(neighbor, bond index)` in ascending neighbor order.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Molecule {
    /// Builds a molecule from explicit parts, validating the graph invariants
    /// and computing ring flags.
    pub fn from_parts(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        source: impl Into<String>,
    ) -> Result<Self, MoleculeError> {
        for (position, atom) in atoms.iter().enumerate() {
            if atom.index != position {
                return Err(MoleculeError::AtomIndex {
                    position,
                    index: atom.index,
                });
            }
        }
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, bond) in bonds.iter().enumerate() {
            for atom in [bond.a, bond.b] {
                if atom >= atoms.len() {
                    return Err(MoleculeError::MissingAtom { bond: i, atom });
                }
            }
            if bond.a == bond.b {
                return Err(MoleculeError::SelfLoop {
                    bond: i,
                    atom: bond.a,
                });
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(MoleculeError::DuplicateBond { a: u, b: w[0].0 });
            }
        }
        let mut mol = Molecule {
            atoms,
            bonds,
            source: source.into(),
            adjacency,
        };
        ring_flags(&mut mol);
        Ok(mol)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// `(neighbor, bond index)` pairs in ascending neighbor order.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|pos| &self.bonds[self.adjacency[a][pos].1])
    }

    /// Implicit hydrogen count of an atom; see [`implicit_hydrogens`].
    pub fn hydrogen_count(&self, atom: usize) -> u8 {
        implicit_hydrogens(self, atom)
    }

    /// Relabels atoms so that old atom `i` becomes atom `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Molecule, MoleculeError> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(MoleculeError::BadPermutation {
                expected: n,
                got: perm.len(),
            });
        }
        let mut atoms = self.atoms.clone();
        for (old, atom) in self.atoms.iter().enumerate() {
            let mut moved = atom.clone();
            moved.index = perm[old];
            atoms[perm[old]] = moved;
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                ..b.clone()
            })
            .collect();
        Molecule::from_parts(atoms, bonds, self.source.clone())
    }

    pub(crate) fn set_ring_flags(&mut self, atom_flags: Vec<bool>, bond_flags: Vec<bool>) {
        for (atom, flag) in self.atoms.iter_mut().zip(atom_flags) {
            atom.in_ring = flag;
        }
        for (bond, flag) in self.bonds.iter_mut().zip(bond_flags) {
            bond.in_ring = flag;
        }
    }
}

/// Hydrogens attached to `atom`.
///
/// Bracket atoms report their written count. Organic-subset atoms report
/// the default valence minus the bond-order sum (aromatic bonds count 1.5,
/// the sum is rounded down), clamped at zero.
pub fn implicit_hydrogens(mol: &Molecule, atom: usize) -> u8 {
    let a = &mol.atoms[atom];
    if let Some(h) = a.explicit_h {
        return h;
    }
    let Some(valence) = elements::default_valence(a.element) else {
        return 0;
    };
    let half: u32 = mol.adjacency[atom]
        .iter()
        .map(|&(_, b)| mol.bonds[b].order.half_units())
        .sum();
    (valence as u32).saturating_sub(half / 2) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h_counts(smiles: &str) -> Vec<u8> {
        let mol = parse_smiles(smiles).unwrap();
        (0..mol.atom_count()).map(|i| implicit_hydrogens(&mol, i)).collect()
    }

    #[test]
    fn methane_has_four_hydrogens() {
        assert_eq!(h_counts("C"), vec![4]);
    }

    #[test]
    fn hydroxyl_oxygen_of_acetic_acid() {
        assert_eq!(h_counts("CC(=O)O")[3], 1);
    }

    #[test]
    fn carboxylate_oxygen_is_bracketed() {
        // frozen from RDKit GetTotalNumHs on the same string: [3, 0, 0, 0]
        assert_eq!(h_counts("CC(=O)[O-]"), vec![3, 0, 0, 0]);
    }

    #[test]
    fn aromatic_bonds_round_down() {
        // benzene CH, substituted ring carbon, fused ring carbon
        assert_eq!(h_counts("c1ccccc1")[0], 1);
        assert_eq!(h_counts("Cc1ccccc1")[1], 0);
        let naph = h_counts("c1ccc2ccccc2c1");
        assert_eq!(naph[3], 0);
        assert_eq!(naph[0], 1);
    }

    #[test]
    fn hypervalent_inputs_clamp_to_zero() {
        assert_eq!(h_counts("FC(F)(F)(F)F")[1], 0);
        assert_eq!(h_counts("CS(=O)(=O)C")[1], 0);
    }

    #[test]
    fn degree_sum_is_twice_bond_count() {
        let mol = parse_smiles("CC(C)(C)c1ccc(O)cc1").unwrap();
        let total: usize = (0..mol.atom_count()).map(|i| mol.degree(i)).sum();
        assert_eq!(total, 2 * mol.bond_count());
    }

    #[test]
    fn from_parts_rejects_bad_graphs() {
        let atom = |i| Atom {
            index: i,
            element: 6,
            formal_charge: 0,
            aromatic: false,
            explicit_h: None,
            isotope: None,
            chirality: None,
            in_ring: false,
        };
        let bond = |a, b| Bond {
            a,
            b,
            order: BondOrder::Single,
            stereo: None,
            in_ring: false,
        };
        assert!(matches!(
            Molecule::from_parts(vec![atom(0)], vec![bond(0, 1)], ""),
            Err(MoleculeError::MissingAtom { .. })
        ));
        assert!(matches!(
            Molecule::from_parts(vec![atom(0)], vec![bond(0, 0)], ""),
            Err(MoleculeError::SelfLoop { .. })
        ));
        assert!(matches!(
            Molecule::from_parts(vec![atom(0), atom(1)], vec![bond(0, 1), bond(1, 0)], ""),
            Err(MoleculeError::DuplicateBond { .. })
        ));
        assert!(matches!(
            Molecule::from_parts(vec![atom(1)], vec![], ""),
            Err(MoleculeError::AtomIndex { .. })
        ));
    }

    #[test]
    fn permutation_preserves_structure() {
        let mol = parse_smiles("CC(=O)N").unwrap();
        let moved = mol.permuted(&[3, 2, 1, 0]).unwrap();
        assert_eq!(moved.atom(0).element, 7);
        assert_eq!(moved.atom(3).element, 6);
        assert_eq!(moved.atom(1).element, mol.atom(2).element);
        assert_eq!(moved.bond_between(2, 1).unwrap().order, BondOrder::Double);
        assert!(mol.permuted(&[0, 0, 1, 2]).is_err());
    }
}
