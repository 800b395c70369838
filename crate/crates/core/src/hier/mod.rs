//! Supernode-augmented molecular graphs.
//!
//! Node order is: every atom (same index as in the molecule), then one
//! supernode per motif in motif order, with the graph supernode last.
//! Edges are the chemical bonds in bond order followed by the super edges,
//! grouped by motif and ascending by atom.

mod spectral;

pub use spectral::{
    laplacian_eigenpairs, laplacian_pe, normalized_laplacian, symmetric_eigen, Eigenpairs,
    SpectralError, ZERO_EIGENVALUE,
};

use ndarray::Array2;

use crate::brics::Motif;
use crate::chem::Molecule;

/// Width of the positional encoding attached to every node.
pub const PE_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Atom,
    MotifSuper,
    GraphSuper,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Atom => "atom",
            NodeKind::MotifSuper => "motif",
            NodeKind::GraphSuper => "graph",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierNode {
    pub kind: NodeKind,
    /// Atom index for atom nodes, motif id for supernodes.
    pub reference: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Chemical,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierEdge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    /// Bond index for chemical edges.
    pub bond: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HierError {
    #[error("motif {motif} references atom {atom} but the molecule has {atoms} atoms")]
    AtomOutOfRange {
        motif: usize,
        atom: usize,
        atoms: usize,
    },
    #[error("the last motif must be the graph motif covering every atom")]
    MissingGraphMotif,
}

#[derive(Debug, Clone)]
pub struct HierGraph {
    base: Molecule,
    motifs: Vec<Motif>,
    nodes: Vec<HierNode>,
    edges: Vec<HierEdge>,
    pe: Option<Array2<f64>>,
}

/// Adds a supernode per motif and joins it to each of the motif's atoms.
pub fn build_hier(mol: &Molecule, motifs: &[Motif]) -> Result<HierGraph, HierError> {
    let n = mol.atom_count();
    match motifs.last() {
        Some(m) if m.is_graph_motif && m.atoms.len() == n => {}
        _ => return Err(HierError::MissingGraphMotif),
    }
    for m in motifs {
        if let Some(&atom) = m.atoms.iter().find(|&&a| a >= n) {
            return Err(HierError::AtomOutOfRange {
                motif: m.id,
                atom,
                atoms: n,
            });
        }
    }
    let mut nodes: Vec<HierNode> = (0..n)
        .map(|i| HierNode {
            kind: NodeKind::Atom,
            reference: i,
        })
        .collect();
    let mut edges: Vec<HierEdge> = mol
        .bonds()
        .iter()
        .enumerate()
        .map(|(i, b)| HierEdge {
            a: b.a,
            b: b.b,
            kind: EdgeKind::Chemical,
            bond: Some(i),
        })
        .collect();
    for m in motifs {
        let node = nodes.len();
        nodes.push(HierNode {
            kind: if m.is_graph_motif {
                NodeKind::GraphSuper
            } else {
                NodeKind::MotifSuper
            },
            reference: m.id,
        });
        edges.extend(m.atoms.iter().map(|&a| HierEdge {
            a,
            b: node,
            kind: EdgeKind::Super,
            bond: None,
        }));
    }
    Ok(HierGraph {
        base: mol.clone(),
        motifs: motifs.to_vec(),
        nodes,
        edges,
        pe: None,
    })
}

impl HierGraph {
    pub fn base(&self) -> &Molecule {
        &self.base
    }

    pub fn motifs(&self) -> &[Motif] {
        &self.motifs
    }

    pub fn nodes(&self) -> &[HierNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[HierEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn atom_count(&self) -> usize {
        self.base.atom_count()
    }

    /// Number of non-graph motifs.
    pub fn motif_count(&self) -> usize {
        self.motifs.len() - 1
    }

    pub fn pe(&self) -> Option<&Array2<f64>> {
        self.pe.as_ref()
    }

    /// Computes and stores the positional encoding.
    pub fn compute_pe(&mut self, dim: usize) -> Result<&Array2<f64>, SpectralError> {
        let pe = laplacian_pe(self, dim)?;
        Ok(self.pe.insert(pe))
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.a, e.b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brics::fragment;
    use crate::chem::parse_smiles;

    fn counts(smiles: &str) -> (usize, usize) {
        let mol = parse_smiles(smiles).unwrap();
        let h = build_hier(&mol, &fragment(&mol)).unwrap();
        (h.node_count(), h.edges().len())
    }

    #[test]
    fn node_and_edge_counts() {
        assert_eq!(counts("CCO"), (5, 8));
        assert_eq!(counts("c1ccccc1"), (8, 18));
        // three motifs: ethyl, ether oxygen, propanoyl
        assert_eq!(counts("CCOC(=O)CC"), (11, 20));
    }

    #[test]
    fn super_edges_join_atoms_to_supernodes() {
        let mol = parse_smiles("CCOC(=O)CC").unwrap();
        let h = build_hier(&mol, &fragment(&mol)).unwrap();
        let n = mol.atom_count();
        for e in h.edges().iter().filter(|e| e.kind == EdgeKind::Super) {
            assert!(e.a < n && e.b >= n);
        }
        assert_eq!(h.nodes().last().unwrap().kind, NodeKind::GraphSuper);
    }

    #[test]
    fn rejects_bad_motifs() {
        let mol = parse_smiles("CC").unwrap();
        let bad = vec![
            Motif {
                id: 1,
                atoms: vec![0, 5],
                is_graph_motif: false,
            },
            Motif {
                id: 2,
                atoms: vec![0, 1],
                is_graph_motif: true,
            },
        ];
        assert!(matches!(
            build_hier(&mol, &bad),
            Err(HierError::AtomOutOfRange { atom: 5, .. })
        ));
        assert_eq!(
            build_hier(&mol, &bad[..1]).unwrap_err(),
            HierError::MissingGraphMotif
        );
    }
}
