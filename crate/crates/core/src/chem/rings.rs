//! Ring membership through bridge detection.
//!
//! A bond lies on a cycle iff it is not a bridge; an atom lies on a cycle iff
//! it touches a ring bond.

use super::Molecule;

/// Recomputes `in_ring` on every atom and bond of `mol`.
pub fn ring_flags(mol: &mut Molecule) {
    let n = mol.atom_count();
    let m = mol.bond_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; m];
    let mut timer = 0usize;

    // iterative DFS: (vertex, bond used to enter, next adjacency position)
    let mut stack: Vec<(usize, Option<usize>, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((root, None, 0));
        while let Some(frame) = stack.last_mut() {
            let (u, parent_bond, pos) = *frame;
            if pos < mol.neighbors(u).len() {
                frame.2 += 1;
                let (v, bond) = mol.neighbors(u)[pos];
                if Some(bond) == parent_bond {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, Some(bond), 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let (Some(bond), Some(&(parent, _, _))) = (parent_bond, stack.last()) {
                    low[parent] = low[parent].min(low[u]);
                    if low[u] > disc[parent] {
                        is_bridge[bond] = true;
                    }
                }
            }
        }
    }

    let bond_flags: Vec<bool> = is_bridge.iter().map(|b| !b).collect();
    let mut atom_flags = vec![false; n];
    for (bond, &ring) in mol.bonds().iter().zip(&bond_flags) {
        if ring {
            atom_flags[bond.a] = true;
            atom_flags[bond.b] = true;
        }
    }
    mol.set_ring_flags(atom_flags, bond_flags);
}

#[cfg(test)]
mod tests {
    use crate::chem::parse_smiles;

    fn ring_atoms(smiles: &str) -> (Vec<bool>, Vec<bool>) {
        let mol = parse_smiles(smiles).unwrap();
        (
            mol.atoms().iter().map(|a| a.in_ring).collect(),
            mol.bonds().iter().map(|b| b.in_ring).collect(),
        )
    }

    #[test]
    fn cyclopropane_is_all_ring() {
        let (atoms, bonds) = ring_atoms("C1CC1");
        assert!(atoms.iter().all(|&r| r));
        assert_eq!(bonds.len(), 3);
        assert!(bonds.iter().all(|&r| r));
    }

    #[test]
    fn ethanol_has_no_rings() {
        let (atoms, bonds) = ring_atoms("CCO");
        assert!(!atoms.iter().any(|&r| r));
        assert!(!bonds.iter().any(|&r| r));
    }

    #[test]
    fn ethylcyclopropane() {
        let (atoms, bonds) = ring_atoms("C1CC1CC");
        assert_eq!(atoms, vec![true, true, true, false, false]);
        assert_eq!(bonds.iter().filter(|&&r| r).count(), 3);
    }

    #[test]
    fn bridge_between_two_rings() {
        let (atoms, bonds) = ring_atoms("C1CC1C1CC1");
        assert!(atoms.iter().all(|&r| r));
        assert_eq!(bonds.iter().filter(|&&r| !r).count(), 1);
    }
}
