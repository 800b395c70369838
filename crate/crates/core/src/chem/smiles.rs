//! SMILES reader for the organic subset plus bracket atoms.
//!
//! Supported: organic-subset atoms (`B C N O P S F Cl Br I`) and their
//! aromatic forms, bracket atoms with isotope / chirality / H count /
//! charge / atom class, branches, ring closures (`1`..`9`, `%nn`), bond
//! symbols `- = # : / \` and `.` component separators. Every error carries
//! the byte offset where it was detected.

use std::collections::{BTreeMap, HashSet};

use super::elements;
use super::{Atom, Bond, BondOrder, BondStereo, Chirality, Molecule, MoleculeError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmilesError {
    #[error("empty SMILES string")]
    Empty,
    #[error("unbalanced parenthesis at byte {offset}")]
    UnbalancedParenthesis { offset: usize },
    #[error("unmatched ring-closure {label} at byte {offset}")]
    UnmatchedRingClosure { label: u32, offset: usize },
    #[error("unknown element `{token}` at byte {offset}")]
    UnknownElement { token: String, offset: usize },
    #[error("bracket atom at byte {offset} has {total} bonds plus hydrogens (more than 8)")]
    ValenceImpossible { offset: usize, total: u32 },
    #[error("unexpected `{ch}` at byte {offset}")]
    UnexpectedCharacter { ch: char, offset: usize },
    #[error("bond symbol at byte {offset} is not followed by an atom")]
    DanglingBond { offset: usize },
    #[error("malformed bracket atom at byte {offset}: {reason}")]
    InvalidBracket { offset: usize, reason: &'static str },
    #[error("ring closure {label} at byte {offset} would duplicate a bond or close on itself")]
    InvalidRingBond { label: u32, offset: usize },
    #[error("ring closure {label} at byte {offset} has conflicting bond symbols")]
    ConflictingRingBond { label: u32, offset: usize },
    #[error("invalid molecular graph: {0}")]
    Structure(#[from] MoleculeError),
}

impl SmilesError {
    /// Byte offset of the offending token, when the error has one.
    pub fn offset(&self) -> Option<usize> {
        match *self {
            SmilesError::UnbalancedParenthesis { offset }
            | SmilesError::UnmatchedRingClosure { offset, .. }
            | SmilesError::UnknownElement { offset, .. }
            | SmilesError::ValenceImpossible { offset, .. }
            | SmilesError::UnexpectedCharacter { offset, .. }
            | SmilesError::DanglingBond { offset }
            | SmilesError::InvalidBracket { offset, .. }
            | SmilesError::InvalidRingBond { offset, .. }
            | SmilesError::ConflictingRingBond { offset, .. } => Some(offset),
            SmilesError::Empty | SmilesError::Structure(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondSymbol {
    Single,
    Double,
    Triple,
    Aromatic,
    Up,
    Down,
}

impl BondSymbol {
    fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            b'-' => BondSymbol::Single,
            b'=' => BondSymbol::Double,
            b'#' => BondSymbol::Triple,
            b':' => BondSymbol::Aromatic,
            b'/' => BondSymbol::Up,
            b'\\' => BondSymbol::Down,
            _ => return None,
        })
    }

    fn order(self) -> BondOrder {
        match self {
            BondSymbol::Single | BondSymbol::Up | BondSymbol::Down => BondOrder::Single,
            BondSymbol::Double => BondOrder::Double,
            BondSymbol::Triple => BondOrder::Triple,
            BondSymbol::Aromatic => BondOrder::Aromatic,
        }
    }

    fn stereo(self) -> Option<BondStereo> {
        match self {
            BondSymbol::Up => Some(BondStereo::Up),
            BondSymbol::Down => Some(BondStereo::Down),
            _ => None,
        }
    }
}

struct RingOpening {
    atom: usize,
    symbol: Option<BondSymbol>,
    offset: usize,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    atom_offsets: Vec<usize>,
    bracketed: Vec<bool>,
    bonds: Vec<Bond>,
    bond_keys: HashSet<(usize, usize)>,
    prev: Option<usize>,
    pending: Option<(BondSymbol, usize)>,
    branches: Vec<(usize, usize)>,
    rings: BTreeMap<u32, RingOpening>,
}

/// Parses a SMILES string into a [`Molecule`] with ring flags computed.
pub fn parse_smiles(text: &str) -> Result<Molecule, SmilesError> {
    let mut parser = Parser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        atom_offsets: Vec::new(),
        bracketed: Vec::new(),
        bonds: Vec::new(),
        bond_keys: HashSet::new(),
        prev: None,
        pending: None,
        branches: Vec::new(),
        rings: BTreeMap::new(),
    };
    parser.run()?;
    parser.finish()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn unexpected(&self, offset: usize) -> SmilesError {
        let ch = self.text[offset..].chars().next().unwrap_or('\0');
        SmilesError::UnexpectedCharacter { ch, offset }
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(b) = self.peek() {
            let offset = self.pos;
            match b {
                b'(' => {
                    let Some(prev) = self.prev else {
                        return Err(self.unexpected(offset));
                    };
                    if let Some((_, at)) = self.pending {
                        return Err(SmilesError::DanglingBond { offset: at });
                    }
                    self.branches.push((prev, offset));
                    self.pos += 1;
                }
                b')' => {
                    if let Some((_, at)) = self.pending {
                        return Err(SmilesError::DanglingBond { offset: at });
                    }
                    let Some((atom, _)) = self.branches.pop() else {
                        return Err(SmilesError::UnbalancedParenthesis { offset });
                    };
                    self.prev = Some(atom);
                    self.pos += 1;
                }
                b'.' => {
                    if let Some((_, at)) = self.pending {
                        return Err(SmilesError::DanglingBond { offset: at });
                    }
                    if self.prev.is_none() || !self.branches.is_empty() {
                        return Err(self.unexpected(offset));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom, offset, true);
                }
                _ => {
                    if let Some(symbol) = BondSymbol::from_byte(b) {
                        if self.pending.is_some() {
                            return Err(self.unexpected(offset));
                        }
                        if self.prev.is_none() {
                            return Err(SmilesError::DanglingBond { offset });
                        }
                        self.pending = Some((symbol, offset));
                        self.pos += 1;
                    } else if b.is_ascii_alphabetic() || b == b'*' {
                        let atom = self.organic_atom()?;
                        self.add_atom(atom, offset, false);
                    } else {
                        return Err(self.unexpected(offset));
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Molecule, SmilesError> {
        if let Some((_, offset)) = self.pending {
            return Err(SmilesError::DanglingBond { offset });
        }
        if let Some(&(_, offset)) = self.branches.last() {
            return Err(SmilesError::UnbalancedParenthesis { offset });
        }
        if let Some((&label, open)) = self.rings.iter().next() {
            return Err(SmilesError::UnmatchedRingClosure {
                label,
                offset: open.offset,
            });
        }
        if self.atoms.is_empty() {
            return Err(SmilesError::Empty);
        }
        // bracket atoms: explicit H plus bond orders may not exceed 8
        let mut half = vec![0u32; self.atoms.len()];
        for bond in &self.bonds {
            half[bond.a] += bond.order.half_units();
            half[bond.b] += bond.order.half_units();
        }
        for (i, atom) in self.atoms.iter().enumerate() {
            if !self.bracketed[i] {
                continue;
            }
            let total = atom.explicit_h.unwrap_or(0) as u32 + half[i] / 2;
            if total > 8 {
                return Err(SmilesError::ValenceImpossible {
                    offset: self.atom_offsets[i],
                    total,
                });
            }
        }
        Ok(Molecule::from_parts(self.atoms, self.bonds, self.text)?)
    }

    fn add_atom(&mut self, mut atom: Atom, offset: usize, bracketed: bool) {
        let index = self.atoms.len();
        atom.index = index;
        let aromatic = atom.aromatic;
        self.atoms.push(atom);
        self.atom_offsets.push(offset);
        self.bracketed.push(bracketed);
        if let Some(prev) = self.prev {
            let symbol = self.pending.take().map(|(s, _)| s);
            let prev_aromatic = self.atoms[prev].aromatic;
            self.push_bond(prev, index, symbol, prev_aromatic && aromatic);
        }
        self.prev = Some(index);
    }

    fn push_bond(&mut self, a: usize, b: usize, symbol: Option<BondSymbol>, both_aromatic: bool) {
        let order = match symbol {
            Some(s) => s.order(),
            None if both_aromatic => BondOrder::Aromatic,
            None => BondOrder::Single,
        };
        self.bond_keys.insert((a.min(b), a.max(b)));
        self.bonds.push(Bond {
            a,
            b,
            order,
            stereo: symbol.and_then(BondSymbol::stereo),
            in_ring: false,
        });
    }

    fn ring_closure(&mut self) -> Result<(), SmilesError> {
        let offset = self.pos;
        let label = if self.bytes[self.pos] == b'%' {
            let digits = self.bytes.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    ((d[0] - b'0') as u32) * 10 + (d[1] - b'0') as u32
                }
                _ => return Err(self.unexpected(offset)),
            }
        } else {
            self.pos += 1;
            (self.bytes[offset] - b'0') as u32
        };
        let Some(atom) = self.prev else {
            return Err(self.unexpected(offset));
        };
        let symbol = self.pending.take().map(|(s, _)| s);
        match self.rings.remove(&label) {
            Some(open) => {
                let resolved = match (open.symbol, symbol) {
                    (Some(x), Some(y)) if x.order() != y.order() => {
                        return Err(SmilesError::ConflictingRingBond { label, offset });
                    }
                    (x, y) => y.or(x),
                };
                let key = (open.atom.min(atom), open.atom.max(atom));
                if open.atom == atom || self.bond_keys.contains(&key) {
                    return Err(SmilesError::InvalidRingBond { label, offset });
                }
                let both_aromatic = self.atoms[open.atom].aromatic && self.atoms[atom].aromatic;
                self.push_bond(open.atom, atom, resolved, both_aromatic);
            }
            None => {
                self.rings.insert(
                    label,
                    RingOpening {
                        atom,
                        symbol,
                        offset,
                    },
                );
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let offset = self.pos;
        let b = self.bytes[offset];
        let next = self.bytes.get(offset + 1).copied();
        let (symbol, len, aromatic) = match (b, next) {
            (b'C', Some(b'l')) => ("Cl", 2, false),
            (b'B', Some(b'r')) => ("Br", 2, false),
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => {
                (&self.text[offset..offset + 1], 1, false)
            }
            (b'b' | b'c' | b'n' | b'o' | b'p' | b's', _) => {
                (&self.text[offset..offset + 1], 1, true)
            }
            _ => {
                let end = self.text[offset + 1..]
                    .find(|c: char| !c.is_ascii_lowercase())
                    .map_or(self.text.len(), |e| offset + 1 + e);
                return Err(SmilesError::UnknownElement {
                    token: self.text[offset..end.max(offset + 1)].to_string(),
                    offset,
                });
            }
        };
        let canonical = if aromatic {
            symbol.to_ascii_uppercase()
        } else {
            symbol.to_string()
        };
        let element = elements::atomic_number(&canonical).expect("organic subset symbol");
        self.pos += len;
        Ok(Atom {
            index: 0,
            element,
            formal_charge: 0,
            aromatic,
            explicit_h: None,
            isotope: None,
            chirality: None,
            in_ring: false,
        })
    }

    fn read_number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            self.text[start..self.pos].parse().ok()
        }
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let open = self.pos;
        self.pos += 1;
        let isotope = match self.read_number() {
            Some(n) if n > u16::MAX as u32 => {
                return Err(SmilesError::InvalidBracket {
                    offset: open,
                    reason: "isotope out of range",
                })
            }
            n => n.map(|n| n as u16),
        };

        let sym_start = self.pos;
        let rest = &self.text[sym_start..];
        let (element, aromatic, len) = if rest.starts_with(|c: char| c.is_ascii_uppercase()) {
            let two = rest.get(..2).filter(|s| {
                s.as_bytes()[1].is_ascii_lowercase() && elements::atomic_number(s).is_some()
            });
            match two {
                Some(s) => (elements::atomic_number(s).unwrap(), false, 2),
                None => match elements::atomic_number(&rest[..1]) {
                    Some(z) => (z, false, 1),
                    None => {
                        return Err(SmilesError::UnknownElement {
                            token: rest[..1].to_string(),
                            offset: sym_start,
                        })
                    }
                },
            }
        } else if rest.starts_with(|c: char| c.is_ascii_lowercase()) {
            let candidates = ["se", "as", "te", "b", "c", "n", "o", "p", "s"];
            match candidates.iter().find(|c| rest.starts_with(**c)) {
                Some(c) => {
                    let mut upper = c.to_string();
                    upper[..1].make_ascii_uppercase();
                    let z = elements::atomic_number(&upper).unwrap();
                    (z, true, c.len())
                }
                None => {
                    let end = rest.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(rest.len());
                    return Err(SmilesError::UnknownElement {
                        token: rest[..end.max(1)].to_string(),
                        offset: sym_start,
                    });
                }
            }
        } else if rest.starts_with('*') {
            return Err(SmilesError::UnknownElement {
                token: "*".to_string(),
                offset: sym_start,
            });
        } else {
            return Err(SmilesError::InvalidBracket {
                offset: open,
                reason: "missing element symbol",
            });
        };
        if aromatic && !elements::aromatic_allowed(element) {
            return Err(SmilesError::UnknownElement {
                token: rest[..len].to_string(),
                offset: sym_start,
            });
        }
        self.pos += len;

        let mut chirality = None;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            chirality = Some(if self.peek() == Some(b'@') {
                self.pos += 1;
                Chirality::Clockwise
            } else {
                Chirality::CounterClockwise
            });
        }

        let mut hydrogens = 0u32;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = self.read_number().unwrap_or(1);
            if hydrogens > 9 {
                return Err(SmilesError::InvalidBracket {
                    offset: open,
                    reason: "hydrogen count above 9",
                });
            }
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.read_number() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
            if !(-15..=15).contains(&charge) {
                return Err(SmilesError::InvalidBracket {
                    offset: open,
                    reason: "charge out of range",
                });
            }
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.read_number().is_none() {
                return Err(SmilesError::InvalidBracket {
                    offset: open,
                    reason: "atom class without number",
                });
            }
        }

        if self.peek() != Some(b']') {
            return Err(SmilesError::InvalidBracket {
                offset: open,
                reason: "unexpected token before `]`",
            });
        }
        self.pos += 1;

        Ok(Atom {
            index: 0,
            element,
            formal_charge: charge as i8,
            aromatic,
            explicit_h: Some(hydrogens as u8),
            isotope,
            chirality,
            in_ring: false,
        })
    }
}
