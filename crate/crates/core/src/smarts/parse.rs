use std::collections::BTreeMap;

use super::{AtomExpr, AtomPrimitive, BondExpr, BondPrimitive, PatternBond, SmartsPattern};
use crate::chem::elements;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmartsError {
    #[error("unsupported SMARTS primitive `{token}` at byte {offset}")]
    Unsupported { token: String, offset: usize },
    #[error("malformed SMARTS at byte {offset}: {reason}")]
    Syntax { offset: usize, reason: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dialect {
    FunctionalGroup,
    Extended,
}

/// Compiles a pattern written in the functional-group subset of SMARTS.
pub fn parse_smarts(text: &str) -> Result<SmartsPattern, SmartsError> {
    Parser::new(text, 0, Dialect::FunctionalGroup).pattern(None)
}

/// Compiles a pattern in the extended grammar (recursion, negation,
/// aromaticity and ring-bond primitives).
pub(crate) fn parse_extended(text: &str) -> Result<SmartsPattern, SmartsError> {
    Parser::new(text, 0, Dialect::Extended).pattern(None)
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    dialect: Dialect,
}

struct RingOpen {
    atom: usize,
    bond: Option<BondExpr>,
    offset: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, pos: usize, dialect: Dialect) -> Self {
        Parser {
            text,
            bytes: text.as_bytes(),
            pos,
            dialect,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn extended(&self) -> bool {
        self.dialect == Dialect::Extended
    }

    fn unsupported(&self, offset: usize, len: usize) -> SmartsError {
        let end = (offset + len).min(self.text.len());
        SmartsError::Unsupported {
            token: self.text[offset..end].to_string(),
            offset,
        }
    }

    fn require_extended(&self, offset: usize, len: usize) -> Result<(), SmartsError> {
        if self.extended() {
            Ok(())
        } else {
            Err(self.unsupported(offset, len))
        }
    }

    fn syntax(&self, offset: usize, reason: &'static str) -> SmartsError {
        SmartsError::Syntax { offset, reason }
    }

    /// Parses a full pattern. With `terminator`, stops before that byte
    /// (used for the body of `$(...)`).
    fn pattern(&mut self, terminator: Option<u8>) -> Result<SmartsPattern, SmartsError> {
        let start = self.pos;
        let mut atoms: Vec<AtomExpr> = Vec::new();
        let mut bonds: Vec<PatternBond> = Vec::new();
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondExpr, usize)> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut rings: BTreeMap<u32, RingOpen> = BTreeMap::new();

        while let Some(b) = self.peek() {
            if Some(b) == terminator && branches.is_empty() {
                break;
            }
            let offset = self.pos;
            match b {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(self.syntax(offset, "branch without a preceding atom"));
                    };
                    if pending.is_some() {
                        return Err(self.syntax(offset, "bond before branch"));
                    }
                    branches.push((p, offset));
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(self.syntax(offset, "bond without a following atom"));
                    }
                    let Some((atom, _)) = branches.pop() else {
                        return Err(self.syntax(offset, "unbalanced parenthesis"));
                    };
                    prev = Some(atom);
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let label = self.ring_label()?;
                    let Some(atom) = prev else {
                        return Err(self.syntax(offset, "ring closure without an atom"));
                    };
                    let bond = pending.take().map(|(e, _)| e);
                    match rings.remove(&label) {
                        Some(open) => {
                            if open.atom == atom {
                                return Err(self.syntax(offset, "ring closure on the same atom"));
                            }
                            bonds.push(PatternBond {
                                a: open.atom,
                                b: atom,
                                expr: bond.or(open.bond).unwrap_or_else(BondExpr::implicit),
                                ring_closure: true,
                            });
                        }
                        None => {
                            rings.insert(label, RingOpen { atom, bond, offset });
                        }
                    }
                }
                b'[' | b'*' => {
                    let expr = self.atom()?;
                    Self::attach(&mut atoms, &mut bonds, &mut prev, &mut pending, expr);
                }
                b'.' => return Err(self.unsupported(offset, 1)),
                _ if b.is_ascii_alphabetic() => {
                    let expr = self.atom()?;
                    Self::attach(&mut atoms, &mut bonds, &mut prev, &mut pending, expr);
                }
                _ => {
                    if pending.is_some() {
                        return Err(self.syntax(offset, "two consecutive bonds"));
                    }
                    if prev.is_none() {
                        return Err(self.syntax(offset, "bond without a preceding atom"));
                    }
                    let expr = self.bond_expr()?;
                    pending = Some((expr, offset));
                }
            }
        }
        if let Some((_, offset)) = pending {
            return Err(self.syntax(offset, "bond without a following atom"));
        }
        if let Some(&(_, offset)) = branches.last() {
            return Err(self.syntax(offset, "unbalanced parenthesis"));
        }
        if let Some(open) = rings.values().next() {
            return Err(self.syntax(open.offset, "unmatched ring closure"));
        }
        if atoms.is_empty() {
            return Err(self.syntax(start, "empty pattern"));
        }
        Ok(SmartsPattern::new(
            atoms,
            bonds,
            self.text[start..self.pos].to_string(),
        ))
    }

    fn attach(
        atoms: &mut Vec<AtomExpr>,
        bonds: &mut Vec<PatternBond>,
        prev: &mut Option<usize>,
        pending: &mut Option<(BondExpr, usize)>,
        expr: AtomExpr,
    ) {
        let index = atoms.len();
        atoms.push(expr);
        if let Some(p) = *prev {
            let bond = pending.take().map(|(e, _)| e).unwrap_or_else(BondExpr::implicit);
            bonds.push(PatternBond {
                a: p,
                b: index,
                expr: bond,
                ring_closure: false,
            });
        }
        *prev = Some(index);
    }

    fn ring_label(&mut self) -> Result<u32, SmartsError> {
        let offset = self.pos;
        if self.bytes[offset] == b'%' {
            match self.bytes.get(offset + 1..offset + 3) {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(((d[0] - b'0') * 10 + (d[1] - b'0')) as u32)
                }
                _ => Err(self.syntax(offset, "`%` must be followed by two digits")),
            }
        } else {
            self.pos += 1;
            Ok((self.bytes[offset] - b'0') as u32)
        }
    }

    /// An atom outside or inside brackets.
    fn atom(&mut self) -> Result<AtomExpr, SmartsError> {
        let offset = self.pos;
        match self.bytes[offset] {
            b'*' => {
                self.pos += 1;
                Ok(AtomExpr::Primitive(AtomPrimitive::Wildcard))
            }
            b'[' => {
                self.pos += 1;
                let inner_start = self.pos;
                // `[H]` alone is a hydrogen atom rather than an H-count test
                if self.text[inner_start..].starts_with("H]") {
                    self.pos += 2;
                    return Ok(AtomExpr::Primitive(AtomPrimitive::AtomicNumber(1)));
                }
                let expr = self.low_and()?;
                if self.peek() != Some(b']') {
                    return match self.peek() {
                        None => Err(self.syntax(offset, "unterminated bracket atom")),
                        Some(_) => Err(self.unsupported(self.pos, 1)),
                    };
                }
                self.pos += 1;
                Ok(expr)
            }
            _ => {
                let rest = &self.text[offset..];
                let organic = [
                    ("Cl", 17, false),
                    ("Br", 35, false),
                    ("B", 5, false),
                    ("C", 6, false),
                    ("N", 7, false),
                    ("O", 8, false),
                    ("P", 15, false),
                    ("S", 16, false),
                    ("F", 9, false),
                    ("I", 53, false),
                    ("b", 5, true),
                    ("c", 6, true),
                    ("n", 7, true),
                    ("o", 8, true),
                    ("p", 15, true),
                    ("s", 16, true),
                ];
                if let Some(&(sym, number, aromatic)) =
                    organic.iter().find(|(s, _, _)| rest.starts_with(s))
                {
                    if aromatic {
                        self.require_extended(offset, sym.len())?;
                    }
                    self.pos += sym.len();
                    return Ok(AtomExpr::Primitive(AtomPrimitive::Element { number, aromatic }));
                }
                match self.bytes[offset] {
                    b'a' | b'A' => {
                        self.require_extended(offset, 1)?;
                        self.pos += 1;
                        Ok(AtomExpr::Primitive(if self.bytes[offset] == b'a' {
                            AtomPrimitive::Aromatic
                        } else {
                            AtomPrimitive::Aliphatic
                        }))
                    }
                    _ => Err(self.unsupported(offset, 1)),
                }
            }
        }
    }

    fn low_and(&mut self) -> Result<AtomExpr, SmartsError> {
        let mut terms = vec![self.or_expr()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            terms.push(self.or_expr()?);
        }
        Ok(collapse(terms, AtomExpr::And))
    }

    fn or_expr(&mut self) -> Result<AtomExpr, SmartsError> {
        let mut terms = vec![self.and_expr()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            terms.push(self.and_expr()?);
        }
        Ok(collapse(terms, AtomExpr::Or))
    }

    fn and_expr(&mut self) -> Result<AtomExpr, SmartsError> {
        let mut terms = vec![self.unary()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.require_extended(self.pos, 1)?;
                    self.pos += 1;
                    terms.push(self.unary()?);
                }
                Some(b';' | b',' | b']' | b')') | None => break,
                Some(_) => terms.push(self.unary()?),
            }
        }
        Ok(collapse(terms, AtomExpr::And))
    }

    fn unary(&mut self) -> Result<AtomExpr, SmartsError> {
        if self.peek() == Some(b'!') {
            self.require_extended(self.pos, 1)?;
            self.pos += 1;
            return Ok(AtomExpr::Not(Box::new(self.unary()?)));
        }
        self.primitive().map(AtomExpr::Primitive)
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        (self.pos > start)
            .then(|| self.text[start..self.pos].parse().ok())
            .flatten()
    }

    fn small(&self, n: u32, offset: usize) -> Result<u8, SmartsError> {
        u8::try_from(n).map_err(|_| self.syntax(offset, "count out of range"))
    }

    fn primitive(&mut self) -> Result<AtomPrimitive, SmartsError> {
        let offset = self.pos;
        let Some(b) = self.peek() else {
            return Err(self.syntax(offset, "unterminated bracket atom"));
        };
        match b {
            b'*' => {
                self.pos += 1;
                Ok(AtomPrimitive::Wildcard)
            }
            b'#' => {
                self.pos += 1;
                let n = self
                    .number()
                    .ok_or_else(|| self.syntax(offset, "`#` without atomic number"))?;
                Ok(AtomPrimitive::AtomicNumber(self.small(n, offset)?))
            }
            b'D' => {
                self.pos += 1;
                let n = self.number().unwrap_or(1);
                Ok(AtomPrimitive::Degree(self.small(n, offset)?))
            }
            b'H' => {
                self.pos += 1;
                let n = self.number().unwrap_or(1);
                Ok(AtomPrimitive::HydrogenCount(self.small(n, offset)?))
            }
            b'R' => {
                self.pos += 1;
                match self.number() {
                    Some(0) => Ok(AtomPrimitive::NotInRing),
                    None => {
                        self.require_extended(offset, 1)?;
                        Ok(AtomPrimitive::InRing)
                    }
                    Some(_) => Err(self.unsupported(offset, self.pos - offset)),
                }
            }
            b'+' | b'-' => {
                self.pos += 1;
                let unit: i32 = if b == b'+' { 1 } else { -1 };
                let charge = match self.number() {
                    Some(n) => unit * n as i32,
                    None => {
                        let mut c = unit;
                        while self.peek() == Some(b) {
                            self.pos += 1;
                            c += unit;
                        }
                        c
                    }
                };
                i8::try_from(charge)
                    .map(AtomPrimitive::Charge)
                    .map_err(|_| self.syntax(offset, "charge out of range"))
            }
            b'$' => {
                self.require_extended(offset, 1)?;
                if self.bytes.get(offset + 1) != Some(&b'(') {
                    return Err(self.syntax(offset, "`$` must open a recursive pattern"));
                }
                self.pos += 2;
                let mut inner = Parser::new(self.text, self.pos, self.dialect);
                let pattern = inner.pattern(Some(b')'))?;
                if inner.peek() != Some(b')') {
                    return Err(self.syntax(offset, "unterminated recursive pattern"));
                }
                self.pos = inner.pos + 1;
                Ok(AtomPrimitive::Recursive(Box::new(pattern)))
            }
            b'a' | b'A' => {
                let next = self.bytes.get(offset + 1).copied();
                let symbol = match b {
                    b'a' => next == Some(b's'),
                    _ => next.is_some_and(|c| c.is_ascii_lowercase()),
                };
                if symbol {
                    return self.element_symbol(offset);
                }
                self.require_extended(offset, 1)?;
                self.pos += 1;
                Ok(if b == b'a' {
                    AtomPrimitive::Aromatic
                } else {
                    AtomPrimitive::Aliphatic
                })
            }
            _ if b.is_ascii_alphabetic() => self.element_symbol(offset),
            _ => Err(self.unsupported(offset, 1)),
        }
    }

    fn element_symbol(&mut self, offset: usize) -> Result<AtomPrimitive, SmartsError> {
        let rest = &self.text[offset..];
        let first = rest.as_bytes()[0];
        if first.is_ascii_uppercase() {
            let two = rest
                .get(..2)
                .filter(|s| s.as_bytes()[1].is_ascii_lowercase())
                .and_then(|s| elements::atomic_number(s).map(|z| (z, 2)));
            let one = elements::atomic_number(&rest[..1]).map(|z| (z, 1));
            match two.or(one) {
                Some((number, len)) => {
                    self.pos += len;
                    Ok(AtomPrimitive::Element {
                        number,
                        aromatic: false,
                    })
                }
                None => Err(self.unsupported(offset, 1)),
            }
        } else {
            let aromatic = [("se", 34), ("as", 33), ("b", 5), ("c", 6), ("n", 7), ("o", 8), ("p", 15), ("s", 16)];
            match aromatic.iter().find(|(s, _)| rest.starts_with(s)) {
                Some(&(sym, number)) => {
                    self.require_extended(offset, sym.len())?;
                    self.pos += sym.len();
                    Ok(AtomPrimitive::Element {
                        number,
                        aromatic: true,
                    })
                }
                None => Err(self.unsupported(offset, 1)),
            }
        }
    }

    fn bond_expr(&mut self) -> Result<BondExpr, SmartsError> {
        if !self.extended() {
            let offset = self.pos;
            let prim = match self.bytes[offset] {
                b'-' => BondPrimitive::Single,
                b'=' => BondPrimitive::Double,
                b'#' => BondPrimitive::Triple,
                _ => return Err(self.unsupported(offset, 1)),
            };
            self.pos += 1;
            return Ok(BondExpr::Primitive(prim));
        }
        self.bond_low_and()
    }

    fn bond_low_and(&mut self) -> Result<BondExpr, SmartsError> {
        let mut terms = vec![self.bond_or()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            terms.push(self.bond_or()?);
        }
        Ok(collapse(terms, BondExpr::And))
    }

    fn bond_or(&mut self) -> Result<BondExpr, SmartsError> {
        let mut terms = vec![self.bond_and()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            terms.push(self.bond_and()?);
        }
        Ok(collapse(terms, BondExpr::Or))
    }

    fn bond_and(&mut self) -> Result<BondExpr, SmartsError> {
        let mut terms = vec![self.bond_unary()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    terms.push(self.bond_unary()?);
                }
                Some(b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!') => {
                    terms.push(self.bond_unary()?)
                }
                _ => break,
            }
        }
        Ok(collapse(terms, BondExpr::And))
    }

    fn bond_unary(&mut self) -> Result<BondExpr, SmartsError> {
        let offset = self.pos;
        let prim = match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                return Ok(BondExpr::Not(Box::new(self.bond_unary()?)));
            }
            Some(b'-') => BondPrimitive::Single,
            Some(b'=') => BondPrimitive::Double,
            Some(b'#') => BondPrimitive::Triple,
            Some(b':') => BondPrimitive::Aromatic,
            Some(b'~') => BondPrimitive::Any,
            Some(b'@') => BondPrimitive::Ring,
            Some(_) => return Err(self.unsupported(offset, 1)),
            None => return Err(self.syntax(offset, "bond without a following atom")),
        };
        self.pos += 1;
        Ok(BondExpr::Primitive(prim))
    }
}

fn collapse<T>(mut terms: Vec<T>, join: fn(Vec<T>) -> T) -> T {
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        join(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carboxylic_acid_pattern() {
        let p = parse_smarts("*-C(=O)[O;D1]").unwrap();
        assert_eq!(p.atom_count(), 4);
        assert!(p.is_attachment());
        assert_eq!(
            p.atoms()[3],
            AtomExpr::And(vec![
                AtomExpr::Primitive(AtomPrimitive::Element {
                    number: 8,
                    aromatic: false
                }),
                AtomExpr::Primitive(AtomPrimitive::Degree(1)),
            ])
        );
        // C-[O] is unwritten: single or aromatic
        assert_eq!(p.bonds()[2].expr, BondExpr::implicit());
        assert_eq!(p.bonds()[0].expr, BondExpr::Primitive(BondPrimitive::Single));
        assert_eq!(p.bonds()[1].expr, BondExpr::Primitive(BondPrimitive::Double));
    }

    #[test]
    fn cyclopropyl_ring_closure() {
        let p = parse_smarts("*-[C;D3]1-[C;D2]-[C;D2]1").unwrap();
        assert_eq!(p.atom_count(), 4);
        assert_eq!(p.ring_closures(), 1);
        assert_eq!(p.bonds().len(), 4);
        let closure = p.bonds().iter().find(|b| b.ring_closure).unwrap();
        assert_eq!((closure.a, closure.b), (1, 3));
    }

    #[test]
    fn rejects_unknown_primitive() {
        assert_eq!(
            parse_smarts("*-[Q]"),
            Err(SmartsError::Unsupported {
                token: "Q".into(),
                offset: 3
            })
        );
    }

    #[test]
    fn functional_group_dialect_rejects_extended_syntax() {
        for (text, token) in [
            ("*-[$(C=O)]", "$"),
            ("*-[!C]", "!"),
            ("*-c", "c"),
            ("*-[C;R]", "R"),
            ("*:C", ":"),
            ("*~C", "~"),
            ("*-[C&D2]", "&"),
            ("*-[C;R2]", "R2"),
            ("C.C", "."),
        ] {
            match parse_smarts(text) {
                Err(SmartsError::Unsupported { token: t, .. }) => assert_eq!(t, token, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn halogen_or_list_and_hydrogen_default() {
        let p = parse_smarts("*-[#9,#17,#35,#53]").unwrap();
        assert!(matches!(&p.atoms()[1], AtomExpr::Or(v) if v.len() == 4));
        let p = parse_smarts("*-[C;D2]#[C;D1;H]").unwrap();
        assert!(p.atoms()[2]
            .primitives()
            .contains(&&AtomPrimitive::HydrogenCount(1)));
        let p = parse_smarts("*-[S;D4](=O)(=O)-[Cl]").unwrap();
        assert_eq!(
            p.atoms()[4],
            AtomExpr::Primitive(AtomPrimitive::Element {
                number: 17,
                aromatic: false
            })
        );
    }

    #[test]
    fn extended_grammar_parses_brics_environments() {
        let p = parse_extended("[N;!D1;!$(N=*);!$(N-[!#6;!#16;!#0;!#1]);!$([N;R]@[C;R]=O)]").unwrap();
        assert_eq!(p.atom_count(), 1);
        let p = parse_extended("[$([O;D2]-;!@[#0,#6,#1])]-;!@[$([C;!D1;!$(C=*)]-;!@[#6])]").unwrap();
        assert_eq!(p.atom_count(), 2);
        assert!(matches!(&p.bonds()[0].expr, BondExpr::And(v) if v.len() == 2));
        let p = parse_extended("[n;+0;$(n(:[c,n,o,s]):[c,n,o,s])]").unwrap();
        assert!(p.atoms()[0].primitives().contains(&&AtomPrimitive::Charge(0)));
        let p = parse_extended("[C;!R;!D1;!$(C!-*)]").unwrap();
        assert_eq!(p.atom_count(), 1);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_smarts("*-C("), Err(SmartsError::Syntax { .. })));
        assert!(matches!(parse_smarts("*-C1CC"), Err(SmartsError::Syntax { .. })));
        assert!(matches!(parse_smarts("*-"), Err(SmartsError::Syntax { .. })));
        assert!(matches!(parse_smarts("*-[C"), Err(SmartsError::Syntax { .. })));
        assert!(matches!(parse_smarts(""), Err(SmartsError::Syntax { .. })));
    }
}
