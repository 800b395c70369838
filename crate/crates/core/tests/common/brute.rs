//! Brute-force substructure enumeration: every injective assignment of
//! pattern atoms to molecule atoms, filtered by the pattern's constraints.

use std::collections::BTreeSet;

use molhier::chem::{BondOrder, Molecule};
use molhier::smarts::{AtomExpr, AtomPrimitive, BondExpr, BondPrimitive, SmartsPattern};

fn total_h(mol: &Molecule, i: usize) -> usize {
    mol.hydrogen_count(i) as usize
        + mol
            .neighbors(i)
            .iter()
            .filter(|&&(n, _)| mol.atom(n).element == 1)
            .count()
}

fn atom_holds(mol: &Molecule, e: &AtomExpr, i: usize) -> bool {
    let a = mol.atom(i);
    match e {
        AtomExpr::Primitive(p) => match p {
            AtomPrimitive::Wildcard => true,
            AtomPrimitive::Element { number, aromatic } => {
                a.element == *number && a.aromatic == *aromatic
            }
            AtomPrimitive::AtomicNumber(z) => a.element == *z,
            AtomPrimitive::Aromatic => a.aromatic,
            AtomPrimitive::Aliphatic => !a.aromatic,
            AtomPrimitive::Degree(d) => mol.degree(i) == *d as usize,
            AtomPrimitive::HydrogenCount(h) => total_h(mol, i) == *h as usize,
            AtomPrimitive::InRing => a.in_ring,
            AtomPrimitive::NotInRing => !a.in_ring,
            AtomPrimitive::Charge(c) => a.formal_charge == *c,
            AtomPrimitive::Recursive(_) => unreachable!("registry patterns are not recursive"),
        },
        AtomExpr::Not(x) => !atom_holds(mol, x, i),
        AtomExpr::And(v) => v.iter().all(|x| atom_holds(mol, x, i)),
        AtomExpr::Or(v) => v.iter().any(|x| atom_holds(mol, x, i)),
    }
}

fn bond_holds(e: &BondExpr, order: BondOrder, ring: bool) -> bool {
    match e {
        BondExpr::Primitive(p) => match p {
            BondPrimitive::Single => order == BondOrder::Single,
            BondPrimitive::Double => order == BondOrder::Double,
            BondPrimitive::Triple => order == BondOrder::Triple,
            BondPrimitive::Aromatic => order == BondOrder::Aromatic,
            BondPrimitive::Any => true,
            BondPrimitive::Ring => ring,
        },
        BondExpr::Not(x) => !bond_holds(x, order, ring),
        BondExpr::And(v) => v.iter().all(|x| bond_holds(x, order, ring)),
        BondExpr::Or(v) => v.iter().any(|x| bond_holds(x, order, ring)),
    }
}

/// Enumerates the full cartesian product of per-atom candidates and keeps
/// injective assignments that satisfy every pattern bond.
pub fn brute_force(mol: &Molecule, pattern: &SmartsPattern) -> BTreeSet<Vec<usize>> {
    let candidates: Vec<Vec<usize>> = pattern
        .atoms()
        .iter()
        .enumerate()
        .map(|(p, e)| {
            (0..mol.atom_count())
                .filter(|&i| atom_holds(mol, e, i))
                .filter(|&i| !(pattern.is_attachment() && p == 0 && mol.atom(i).element == 1))
                .collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    if candidates.iter().any(|c| c.is_empty()) {
        return out;
    }
    let mut idx = vec![0usize; candidates.len()];
    loop {
        let assignment: Vec<usize> = idx.iter().zip(&candidates).map(|(&k, c)| c[k]).collect();
        let distinct = assignment.iter().collect::<BTreeSet<_>>().len() == assignment.len();
        let bonded = pattern.bonds().iter().all(|b| {
            mol.bond_between(assignment[b.a], assignment[b.b])
                .is_some_and(|mb| bond_holds(&b.expr, mb.order, mb.in_ring))
        });
        if distinct && bonded {
            let skip = usize::from(pattern.is_attachment());
            let mut key = assignment[skip..].to_vec();
            key.sort_unstable();
            out.insert(key);
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < candidates[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
