//! SMARTS patterns: compilation, substructure matching and the
//! functional-group registry.
//!
//! Two grammars share one parser. [`parse_smarts`] accepts only the
//! primitives used by the functional-group table (element symbols, `#n`,
//! `,` and `;` inside brackets, `D<n>`, `H<n>`, `R0`, charges, `*`,
//! explicit `- = #` bonds, ring closures and branches). The extended
//! grammar additionally understands `!`, `&`, recursive `$(...)`, aromatic
//! symbols, `a`/`A`, `R`, and the `: ~ @` bond primitives; it is used
//! internally for the BRICS environments.

mod matcher;
mod parse;
mod registry;

pub use matcher::{find_matches, for_each_mapping, matches_at};
pub use parse::{parse_smarts, SmartsError};
pub use registry::{
    detect_functional_groups, FunctionalGroup, FunctionalGroupRegistry, GroupCounts,
    RegistryError, BUILTIN_REGISTRY,
};

pub(crate) use parse::parse_extended;

/// A single atom test.
#[derive(Debug, Clone, PartialEq)]
pub enum AtomPrimitive {
    /// `*`
    Wildcard,
    /// An element symbol; uppercase symbols are aliphatic, lowercase aromatic.
    Element { number: u8, aromatic: bool },
    /// `#n`
    AtomicNumber(u8),
    /// `a`
    Aromatic,
    /// `A`
    Aliphatic,
    /// `D<n>`: number of heavy-atom neighbours.
    Degree(u8),
    /// `H<n>`: total attached hydrogens.
    HydrogenCount(u8),
    /// `R`
    InRing,
    /// `R0`
    NotInRing,
    /// `+n` / `-n`
    Charge(i8),
    /// `$(...)`: the atom anchors a match of the inner pattern.
    Recursive(Box<SmartsPattern>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomExpr {
    Primitive(AtomPrimitive),
    Not(Box<AtomExpr>),
    And(Vec<AtomExpr>),
    Or(Vec<AtomExpr>),
}

impl AtomExpr {
    pub fn is_wildcard(&self) -> bool {
        matches!(self, AtomExpr::Primitive(AtomPrimitive::Wildcard))
    }

    /// Visits every primitive in the expression tree.
    pub fn primitives(&self) -> Vec<&AtomPrimitive> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a AtomExpr, out: &mut Vec<&'a AtomPrimitive>) {
            match e {
                AtomExpr::Primitive(p) => out.push(p),
                AtomExpr::Not(inner) => walk(inner, out),
                AtomExpr::And(v) | AtomExpr::Or(v) => v.iter().for_each(|x| walk(x, out)),
            }
        }
        walk(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondPrimitive {
    Single,
    Double,
    Triple,
    Aromatic,
    /// `~`
    Any,
    /// `@`
    Ring,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BondExpr {
    Primitive(BondPrimitive),
    Not(Box<BondExpr>),
    And(Vec<BondExpr>),
    Or(Vec<BondExpr>),
}

impl BondExpr {
    /// An unwritten SMARTS bond: single or aromatic.
    pub fn implicit() -> Self {
        BondExpr::Or(vec![
            BondExpr::Primitive(BondPrimitive::Single),
            BondExpr::Primitive(BondPrimitive::Aromatic),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternBond {
    pub a: usize,
    pub b: usize,
    pub expr: BondExpr,
    /// True when the bond was written as a ring closure.
    pub ring_closure: bool,
}

/// A compiled SMARTS pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SmartsPattern {
    atoms: Vec<AtomExpr>,
    bonds: Vec<PatternBond>,
    attachment: bool,
    source: String,
}

impl SmartsPattern {
    pub(crate) fn new(atoms: Vec<AtomExpr>, bonds: Vec<PatternBond>, source: String) -> Self {
        let attachment = atoms.len() > 1
            && atoms[0].is_wildcard()
            && atoms[1..].iter().all(|a| !a.is_wildcard());
        SmartsPattern {
            atoms,
            bonds,
            attachment,
            source,
        }
    }

    pub fn atoms(&self) -> &[AtomExpr] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[PatternBond] {
        &self.bonds
    }

    /// True when atom 0 is the only wildcard and marks the attachment point.
    pub fn is_attachment(&self) -> bool {
        self.attachment
    }

    pub fn ring_closures(&self) -> usize {
        self.bonds.iter().filter(|b| b.ring_closure).count()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }
}
