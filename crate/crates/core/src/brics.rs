//! BRICS fragmentation into motifs.
//!
//! The environment table and the compatible-pair rules follow the reference
//! BRICS implementation (including its later additions such as the L7
//! double-bond pair and the 9-13, 9-14, 14-14 and 16-16 pairs). A bond is
//! cleavable when it is acyclic, has the rule's bond order, and its two
//! endpoints match the two environments.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::chem::Molecule;
use crate::smarts::{for_each_mapping, parse_extended, SmartsPattern};

const ENVIRONMENTS: &[(&str, &str)] = &[
    ("1", "[C;D3]([#0,#6,#7,#8])(=O)"),
    ("3", "[O;D2]-;!@[#0,#6,#1]"),
    ("4", "[C;!D1;!$(C=*)]-;!@[#6]"),
    ("5", "[N;!D1;!$(N=*);!$(N-[!#6;!#16;!#0;!#1]);!$([N;R]@[C;R]=O)]"),
    ("6", "[C;D3;!R](=O)-;!@[#0,#6,#7,#8]"),
    ("7a", "[C;D2,D3]-[#6]"),
    ("7b", "[C;D2,D3]-[#6]"),
    ("8", "[C;!R;!D1;!$(C!-*)]"),
    ("9", "[n;+0;$(n(:[c,n,o,s]):[c,n,o,s])]"),
    ("10", "[N;R;$(N(@C(=O))@[C,N,O,S])]"),
    ("11", "[S;D2](-;!@[#0,#6])"),
    ("12", "[S;D4]([#6,#0])(=O)(=O)"),
    ("13", "[C;$(C(-;@[C,N,O,S])-;@[N,O,S])]"),
    ("14", "[c;$(c(:[c,n,o,s]):[n,o,s])]"),
    ("14b", "[c;$(c(:[c,n,o,s]):[n,o,s])]"),
    ("15", "[C;$(C(-;@C)-;@C)]"),
    ("16", "[c;$(c(:c):c)]"),
    ("16b", "[c;$(c(:c):c)]"),
];

const RULES: &[(&str, &str, &str)] = &[
    ("1", "3", "-"),
    ("1", "5", "-"),
    ("1", "10", "-"),
    ("3", "4", "-"),
    ("3", "13", "-"),
    ("3", "14", "-"),
    ("3", "15", "-"),
    ("3", "16", "-"),
    ("4", "5", "-"),
    ("4", "11", "-"),
    ("5", "12", "-"),
    ("5", "14", "-"),
    ("5", "16", "-"),
    ("5", "13", "-"),
    ("5", "15", "-"),
    ("6", "13", "-"),
    ("6", "14", "-"),
    ("6", "15", "-"),
    ("6", "16", "-"),
    ("7a", "7b", "="),
    ("8", "9", "-"),
    ("8", "10", "-"),
    ("8", "13", "-"),
    ("8", "14", "-"),
    ("8", "15", "-"),
    ("8", "16", "-"),
    ("9", "13", "-"),
    ("9", "14", "-"),
    ("9", "15", "-"),
    ("9", "16", "-"),
    ("10", "13", "-"),
    ("10", "14", "-"),
    ("10", "15", "-"),
    ("10", "16", "-"),
    ("11", "13", "-"),
    ("11", "14", "-"),
    ("11", "15", "-"),
    ("11", "16", "-"),
    ("13", "14", "-"),
    ("13", "15", "-"),
    ("13", "16", "-"),
    ("14", "14", "-"),
    ("14", "15", "-"),
    ("14", "16", "-"),
    ("15", "16", "-"),
    ("16", "16", "-"),
];

struct Rule {
    labels: (&'static str, &'static str),
    pattern: SmartsPattern,
}

fn rules() -> &'static [Rule] {
    static RULES_CELL: OnceLock<Vec<Rule>> = OnceLock::new();
    RULES_CELL.get_or_init(|| {
        let env: BTreeMap<&str, &str> = ENVIRONMENTS.iter().copied().collect();
        RULES
            .iter()
            .map(|&(a, b, bond)| {
                let text = format!("[$({})]{};!@[$({})]", env[a], bond, env[b]);
                Rule {
                    labels: (a.trim_end_matches(['a', 'b']), b.trim_end_matches(['a', 'b'])),
                    pattern: parse_extended(&text).expect("BRICS rule compiles"),
                }
            })
            .collect()
    })
}

/// A bond that BRICS would cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BricsBond {
    pub bond: usize,
    /// Endpoints in the order the first matching rule saw them.
    pub atoms: (usize, usize),
    /// Environment labels of the first matching rule, e.g. `("1", "3")`.
    pub labels: (&'static str, &'static str),
}

/// Every cleavable bond of `mol`, in bond-index order.
pub fn brics_cleavable_bonds(mol: &Molecule) -> Vec<BricsBond> {
    let mut found: BTreeMap<usize, BricsBond> = BTreeMap::new();
    for rule in rules() {
        for_each_mapping(mol, &rule.pattern, |m| {
            let (a, b) = (m[0], m[1]);
            let bond = mol
                .neighbors(a)
                .iter()
                .find(|&&(n, _)| n == b)
                .map(|&(_, idx)| idx)
                .expect("matched atoms are bonded");
            found.entry(bond).or_insert(BricsBond {
                bond,
                atoms: (a, b),
                labels: rule.labels,
            });
            true
        });
    }
    found.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Motif {
    /// 1-based ordinal; the graph motif has id `k + 1`.
    pub id: usize,
    /// Sorted atom indices.
    pub atoms: Vec<usize>,
    pub is_graph_motif: bool,
}

/// Splits `mol` at its cleavable bonds. Returns the `k` connected
/// components ordered by smallest atom index, followed by a graph motif
/// holding every atom.
pub fn fragment(mol: &Molecule) -> Vec<Motif> {
    let n = mol.atom_count();
    let mut cut = vec![false; mol.bond_count()];
    for b in brics_cleavable_bonds(mol) {
        cut[b.bond] = true;
    }
    let mut component = vec![usize::MAX; n];
    let mut motifs: Vec<Motif> = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = motifs.len();
        component[start] = id;
        let mut stack = vec![start];
        let mut atoms = Vec::new();
        while let Some(u) = stack.pop() {
            atoms.push(u);
            for &(v, bond) in mol.neighbors(u) {
                if !cut[bond] && component[v] == usize::MAX {
                    component[v] = id;
                    stack.push(v);
                }
            }
        }
        atoms.sort_unstable();
        motifs.push(Motif {
            id: id + 1,
            atoms,
            is_graph_motif: false,
        });
    }
    motifs.push(Motif {
        id: motifs.len() + 1,
        atoms: (0..n).collect(),
        is_graph_motif: true,
    });
    motifs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn parts(smiles: &str) -> Vec<Vec<usize>> {
        let motifs = fragment(&parse_smiles(smiles).unwrap());
        assert!(motifs.last().unwrap().is_graph_motif);
        motifs[..motifs.len() - 1].iter().map(|m| m.atoms.clone()).collect()
    }

    #[test]
    fn every_rule_compiles() {
        assert_eq!(rules().len(), RULES.len());
    }

    #[test]
    fn nothing_to_cut() {
        assert!(brics_cleavable_bonds(&parse_smiles("CC").unwrap()).is_empty());
        assert_eq!(parts("CCO"), vec![vec![0, 1, 2]]);
        assert_eq!(parts("c1ccccc1"), vec![vec![0, 1, 2, 3, 4, 5]]);
        assert!(brics_cleavable_bonds(&parse_smiles("c1ccccc1C").unwrap()).is_empty());
    }

    #[test]
    fn ethyl_propanoate() {
        let mol = parse_smiles("CCOC(=O)CC").unwrap();
        let bonds = brics_cleavable_bonds(&mol);
        let keys: Vec<(usize, usize)> = bonds.iter().map(|b| mol.bonds()[b.bond].key()).collect();
        // ester C-O and O-CH2
        assert_eq!(keys, vec![(1, 2), (2, 3)]);
        assert_eq!(parts("CCOC(=O)CC"), vec![vec![0, 1], vec![2], vec![3, 4, 5, 6]]);
    }

    #[test]
    fn reference_examples() {
        // dipropyl-like ether: both C-O bonds
        let mol = parse_smiles("CCCOCC").unwrap();
        assert_eq!(brics_cleavable_bonds(&mol).len(), 2);
        let mol = parse_smiles("CCCOCCC(=O)c1ccccc1").unwrap();
        let labels: Vec<_> = brics_cleavable_bonds(&mol).iter().map(|b| b.labels).collect();
        assert_eq!(labels, vec![("3", "4"), ("3", "4"), ("6", "16")]);
        let mol = parse_smiles("CC=CC").unwrap();
        let bonds = brics_cleavable_bonds(&mol);
        assert_eq!(bonds.len(), 1);
        assert_eq!(bonds[0].labels, ("7", "7"));
        assert!(brics_cleavable_bonds(&parse_smiles("O=C1NCCC1").unwrap()).is_empty());
        assert!(brics_cleavable_bonds(&parse_smiles("CC1(C)CCCCC1").unwrap()).is_empty());
    }
}
