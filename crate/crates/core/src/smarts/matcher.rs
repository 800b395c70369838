//! Backtracking substructure search.
//!
//! Pattern atoms are visited in breadth-first order from atom 0 so that every
//! atom after the first has an already-placed parent; candidates are drawn
//! from the parent's image's neighbours. Recursive atom primitives are
//! evaluated lazily and cached per (pattern, atom).

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use super::{AtomExpr, AtomPrimitive, BondExpr, BondPrimitive, SmartsPattern};
use crate::chem::{Bond, BondOrder, Molecule};

struct Step {
    atom: usize,
    /// Parent pattern atom and the pattern bond joining them.
    parent: Option<(usize, usize)>,
    /// Pattern bonds to atoms placed earlier, other than the parent bond.
    closures: Vec<(usize, usize)>,
}

fn plan(pattern: &SmartsPattern) -> Vec<Step> {
    let n = pattern.atom_count();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, b) in pattern.bonds().iter().enumerate() {
        adjacency[b.a].push((b.b, i));
        adjacency[b.b].push((b.a, i));
    }
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, bond) in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, bond));
                    queue.push_back(v);
                }
            }
        }
    }
    let mut rank = vec![0; n];
    for (i, &a) in order.iter().enumerate() {
        rank[a] = i;
    }
    order
        .iter()
        .map(|&atom| {
            let parent_bond = parent[atom].map(|(_, b)| b);
            let closures = adjacency[atom]
                .iter()
                .filter(|&&(v, b)| rank[v] < rank[atom] && Some(b) != parent_bond)
                .copied()
                .collect();
            Step {
                atom,
                parent: parent[atom],
                closures,
            }
        })
        .collect()
}

struct Matcher<'m> {
    mol: &'m Molecule,
    cache: RefCell<HashMap<(*const SmartsPattern, usize), bool>>,
}

impl<'m> Matcher<'m> {
    fn new(mol: &'m Molecule) -> Self {
        Matcher {
            mol,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn total_h(&self, atom: usize) -> usize {
        let attached = self
            .mol
            .neighbors(atom)
            .iter()
            .filter(|&&(n, _)| self.mol.atom(n).element == 1)
            .count();
        self.mol.hydrogen_count(atom) as usize + attached
    }

    fn primitive(&self, p: &AtomPrimitive, atom: usize) -> bool {
        let a = self.mol.atom(atom);
        match p {
            AtomPrimitive::Wildcard => true,
            AtomPrimitive::Element { number, aromatic } => {
                a.element == *number && a.aromatic == *aromatic
            }
            AtomPrimitive::AtomicNumber(z) => a.element == *z,
            AtomPrimitive::Aromatic => a.aromatic,
            AtomPrimitive::Aliphatic => !a.aromatic,
            AtomPrimitive::Degree(d) => self.mol.degree(atom) == *d as usize,
            AtomPrimitive::HydrogenCount(h) => self.total_h(atom) == *h as usize,
            AtomPrimitive::InRing => a.in_ring,
            AtomPrimitive::NotInRing => !a.in_ring,
            AtomPrimitive::Charge(c) => a.formal_charge == *c,
            AtomPrimitive::Recursive(inner) => {
                let key = (&**inner as *const SmartsPattern, atom);
                if let Some(&hit) = self.cache.borrow().get(&key) {
                    return hit;
                }
                let hit = self.anchored(inner, atom);
                self.cache.borrow_mut().insert(key, hit);
                hit
            }
        }
    }

    fn atom_expr(&self, e: &AtomExpr, atom: usize) -> bool {
        match e {
            AtomExpr::Primitive(p) => self.primitive(p, atom),
            AtomExpr::Not(inner) => !self.atom_expr(inner, atom),
            AtomExpr::And(v) => v.iter().all(|x| self.atom_expr(x, atom)),
            AtomExpr::Or(v) => v.iter().any(|x| self.atom_expr(x, atom)),
        }
    }

    fn atom_ok(&self, pattern: &SmartsPattern, p: usize, atom: usize) -> bool {
        if pattern.is_attachment() && p == 0 && self.mol.atom(atom).element == 1 {
            return false;
        }
        self.atom_expr(&pattern.atoms()[p], atom)
    }

    fn anchored(&self, pattern: &SmartsPattern, atom: usize) -> bool {
        let mut found = false;
        self.search(pattern, Some(atom), &mut |_| {
            found = true;
            false
        });
        found
    }

    /// Enumerates mappings; `visit` returns false to stop.
    fn search(
        &self,
        pattern: &SmartsPattern,
        anchor: Option<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) {
        let steps = plan(pattern);
        let mut mapping = vec![usize::MAX; pattern.atom_count()];
        let mut used = vec![false; self.mol.atom_count()];
        self.extend(pattern, &steps, 0, anchor, &mut mapping, &mut used, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        pattern: &SmartsPattern,
        steps: &[Step],
        depth: usize,
        anchor: Option<usize>,
        mapping: &mut Vec<usize>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let Some(step) = steps.get(depth) else {
            return visit(mapping);
        };
        let candidates: Vec<usize> = match step.parent {
            Some((parent, bond)) => self
                .mol
                .neighbors(mapping[parent])
                .iter()
                .filter(|&&(_, b)| bond_expr(&pattern.bonds()[bond].expr, &self.mol.bonds()[b]))
                .map(|&(n, _)| n)
                .collect(),
            None if depth == 0 && anchor.is_some() => vec![anchor.unwrap()],
            None => (0..self.mol.atom_count()).collect(),
        };
        for atom in candidates {
            if used[atom] || !self.atom_ok(pattern, step.atom, atom) {
                continue;
            }
            let closed = step.closures.iter().all(|&(other, bond)| {
                self.mol
                    .bond_between(atom, mapping[other])
                    .is_some_and(|b| bond_expr(&pattern.bonds()[bond].expr, b))
            });
            if !closed {
                continue;
            }
            mapping[step.atom] = atom;
            used[atom] = true;
            let keep_going = self.extend(pattern, steps, depth + 1, anchor, mapping, used, visit);
            used[atom] = false;
            mapping[step.atom] = usize::MAX;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

fn bond_primitive(p: BondPrimitive, bond: &Bond) -> bool {
    match p {
        BondPrimitive::Single => bond.order == BondOrder::Single,
        BondPrimitive::Double => bond.order == BondOrder::Double,
        BondPrimitive::Triple => bond.order == BondOrder::Triple,
        BondPrimitive::Aromatic => bond.order == BondOrder::Aromatic,
        BondPrimitive::Any => true,
        BondPrimitive::Ring => bond.in_ring,
    }
}

pub(crate) fn bond_expr(e: &BondExpr, bond: &Bond) -> bool {
    match e {
        BondExpr::Primitive(p) => bond_primitive(*p, bond),
        BondExpr::Not(inner) => !bond_expr(inner, bond),
        BondExpr::And(v) => v.iter().all(|x| bond_expr(x, bond)),
        BondExpr::Or(v) => v.iter().any(|x| bond_expr(x, bond)),
    }
}

/// Calls `visit` with every injective mapping (indexed by pattern atom) of
/// `pattern` into `mol`. Enumeration stops early when `visit` returns false.
pub fn for_each_mapping(
    mol: &Molecule,
    pattern: &SmartsPattern,
    mut visit: impl FnMut(&[usize]) -> bool,
) {
    Matcher::new(mol).search(pattern, None, &mut visit);
}

/// True when some mapping sends pattern atom 0 to `atom`.
pub fn matches_at(mol: &Molecule, pattern: &SmartsPattern, atom: usize) -> bool {
    Matcher::new(mol).anchored(pattern, atom)
}

/// Distinct matches of `pattern` in `mol`, as sorted atom-index sets.
///
/// Attachment patterns are deduplicated by the atoms matched to their
/// non-wildcard positions; other patterns by the full matched set.
pub fn find_matches(mol: &Molecule, pattern: &SmartsPattern) -> Vec<Vec<usize>> {
    let mut out = BTreeSet::new();
    let skip = usize::from(pattern.is_attachment());
    for_each_mapping(mol, pattern, |m| {
        let mut key = m[skip..].to_vec();
        key.sort_unstable();
        out.insert(key);
        true
    });
    out.into_iter().collect()
}
