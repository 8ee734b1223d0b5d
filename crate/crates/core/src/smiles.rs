//! Subset SMILES reader and canonical, kekulized writer.
//!
//! Supported input: organic-subset atoms (`B C N O P S F Cl Br I` and aromatic
//! `b c n o p s`), bracket atoms, bonds `- = # :`, branches, ring closures
//! `0-9` and `%nn`. Charges, isotopes and stereo marks are dropped with a
//! warning. Disconnected input (`.`) is rejected. Parsing stops at the first
//! whitespace so `SMILES name` lines are accepted.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::molgraph::{BondOrder, CanonicalRank, Element, MolError, Molecule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct SmilesError {
    pub offset: usize,
    pub kind: SmilesErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesErrorKind {
    #[error("empty input")]
    Empty,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unknown atom symbol {0:?}")]
    UnknownAtom(String),
    #[error("unterminated bracket atom")]
    UnterminatedBracket,
    #[error("unbalanced parentheses")]
    UnbalancedParentheses,
    #[error("bond or branch without a preceding atom")]
    DanglingBond,
    #[error("ring closure {0} is never closed")]
    UnpairedRingClosure(u32),
    #[error("conflicting bond orders on ring closure {0}")]
    RingBondConflict(u32),
    #[error("ring closure {0} joins an atom to itself or duplicates a bond")]
    InvalidRingClosure(u32),
    #[error("disconnected input ('.') is not supported")]
    Dot,
    #[error("aromatic system cannot be kekulized")]
    Unkekulizable,
    #[error("atom exceeds its maximum valence")]
    ValenceOverflow,
}

/// Lossy features dropped while reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseWarning {
    ChargeDropped { offset: usize },
    StereoDropped { offset: usize },
    IsotopeDropped { offset: usize },
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseWarning::ChargeDropped { offset } => write!(f, "charge dropped at byte {offset}"),
            ParseWarning::StereoDropped { offset } => write!(f, "stereo mark dropped at byte {offset}"),
            ParseWarning::IsotopeDropped { offset } => write!(f, "isotope dropped at byte {offset}"),
        }
    }
}

pub fn parse(text: &str) -> Result<Molecule, SmilesError> {
    let (mol, warnings) = parse_with_warnings(text)?;
    for w in &warnings {
        log::warn!("{text}: {w}");
    }
    Ok(mol)
}

pub fn parse_with_warnings(text: &str) -> Result<(Molecule, Vec<ParseWarning>), SmilesError> {
    let mut parser = Parser::new(text);
    parser.run()?;
    let mol = parser.build()?;
    Ok((mol, parser.warnings))
}

#[derive(Debug)]
struct RawAtom {
    element: Element,
    aromatic: bool,
    /// Explicit hydrogen count from a bracket atom.
    bracket_h: Option<u8>,
    offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondSym {
    Single,
    Double,
    Triple,
    Aromatic,
}

#[derive(Debug)]
struct RawBond {
    a: usize,
    b: usize,
    /// `None` for an implicit bond.
    sym: Option<BondSym>,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<RawBond>,
    warnings: Vec<ParseWarning>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let text = text.trim_start();
        let end = text
            .find(char::is_whitespace)
            .unwrap_or(text.len());
        let text = &text[..end];
        Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
            atoms: Vec::new(),
            bonds: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn err(&self, offset: usize, kind: SmilesErrorKind) -> SmilesError {
        SmilesError { offset, kind }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        if self.bytes.is_empty() {
            return Err(self.err(0, SmilesErrorKind::Empty));
        }
        let mut prev: Option<usize> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut pending: Option<(BondSym, usize)> = None;
        let mut rings: HashMap<u32, (usize, Option<BondSym>, usize)> = HashMap::new();

        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let p = prev.ok_or(self.err(start, SmilesErrorKind::DanglingBond))?;
                    branches.push((p, start));
                    self.pos += 1;
                }
                b')' => {
                    let (p, _) = branches
                        .pop()
                        .ok_or(self.err(start, SmilesErrorKind::UnbalancedParentheses))?;
                    if pending.is_some() {
                        return Err(self.err(start, SmilesErrorKind::DanglingBond));
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.err(start, SmilesErrorKind::DanglingBond));
                    }
                    let sym = match c {
                        b'=' => BondSym::Double,
                        b'#' => BondSym::Triple,
                        b':' => BondSym::Aromatic,
                        b'-' => BondSym::Single,
                        _ => {
                            self.warnings.push(ParseWarning::StereoDropped { offset: start });
                            BondSym::Single
                        }
                    };
                    pending = Some((sym, start));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let atom = prev.ok_or(self.err(start, SmilesErrorKind::DanglingBond))?;
                    let digit = self.ring_digit()?;
                    let sym = pending.take().map(|(s, _)| s);
                    match rings.remove(&digit) {
                        Some((other, other_sym, _)) => {
                            let sym = match (sym, other_sym) {
                                (Some(x), Some(y)) if x != y => {
                                    return Err(
                                        self.err(start, SmilesErrorKind::RingBondConflict(digit))
                                    )
                                }
                                (x, y) => x.or(y),
                            };
                            if other == atom || self.has_bond(atom, other) {
                                return Err(
                                    self.err(start, SmilesErrorKind::InvalidRingClosure(digit))
                                );
                            }
                            self.bonds.push(RawBond {
                                a: other,
                                b: atom,
                                sym,
                            });
                        }
                        None => {
                            rings.insert(digit, (atom, sym, start));
                        }
                    }
                }
                b'.' => return Err(self.err(start, SmilesErrorKind::Dot)),
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.attach(atom, &mut prev, &mut pending);
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.attach(atom, &mut prev, &mut pending);
                }
            }
        }
        if let Some((_, offset)) = branches.pop() {
            return Err(self.err(offset, SmilesErrorKind::UnbalancedParentheses));
        }
        if let Some((_, offset)) = pending {
            return Err(self.err(offset, SmilesErrorKind::DanglingBond));
        }
        if let Some((&digit, &(_, _, offset))) = rings.iter().min_by_key(|(_, v)| v.2) {
            return Err(self.err(offset, SmilesErrorKind::UnpairedRingClosure(digit)));
        }
        Ok(())
    }

    fn has_bond(&self, a: usize, b: usize) -> bool {
        self.bonds
            .iter()
            .any(|bd| (bd.a == a && bd.b == b) || (bd.a == b && bd.b == a))
    }

    fn attach(
        &mut self,
        atom: RawAtom,
        prev: &mut Option<usize>,
        pending: &mut Option<(BondSym, usize)>,
    ) {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        if let Some(p) = *prev {
            self.bonds.push(RawBond {
                a: p,
                b: idx,
                sym: pending.take().map(|(s, _)| s),
            });
        }
        *prev = Some(idx);
    }

    fn ring_digit(&mut self) -> Result<u32, SmilesError> {
        let start = self.pos;
        if self.peek() == Some(b'%') {
            let digits = self.bytes.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(((d[0] - b'0') * 10 + (d[1] - b'0')) as u32)
                }
                _ => Err(self.err(start, SmilesErrorKind::UnexpectedChar('%'))),
            }
        } else {
            let d = self.bytes[self.pos] - b'0';
            self.pos += 1;
            Ok(d as u32)
        }
    }

    fn organic_atom(&mut self) -> Result<RawAtom, SmilesError> {
        let start = self.pos;
        let rest = &self.text[start..];
        let (symbol, len, aromatic) = if rest.starts_with("Cl") {
            ("Cl", 2, false)
        } else if rest.starts_with("Br") {
            ("Br", 2, false)
        } else {
            let c = rest.chars().next().expect("non-empty");
            match c {
                'B' => ("B", 1, false),
                'C' => ("C", 1, false),
                'N' => ("N", 1, false),
                'O' => ("O", 1, false),
                'P' => ("P", 1, false),
                'S' => ("S", 1, false),
                'F' => ("F", 1, false),
                'I' => ("I", 1, false),
                'b' => ("B", 1, true),
                'c' => ("C", 1, true),
                'n' => ("N", 1, true),
                'o' => ("O", 1, true),
                'p' => ("P", 1, true),
                's' => ("S", 1, true),
                c if c.is_ascii_alphabetic() => {
                    return Err(self.err(start, SmilesErrorKind::UnknownAtom(c.to_string())))
                }
                c => return Err(self.err(start, SmilesErrorKind::UnexpectedChar(c))),
            }
        };
        self.pos += len;
        Ok(RawAtom {
            element: Element::from_symbol(symbol).expect("organic subset symbol"),
            aromatic,
            bracket_h: None,
            offset: start,
        })
    }

    fn bracket_atom(&mut self) -> Result<RawAtom, SmilesError> {
        let start = self.pos;
        let close = self.text[start..]
            .find(']')
            .ok_or(self.err(start, SmilesErrorKind::UnterminatedBracket))?;
        let body = &self.text[start + 1..start + close];
        self.pos = start + close + 1;
        let at = |i: usize| start + 1 + i;
        let b = body.as_bytes();
        let mut i = 0;

        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i > 0 {
            self.warnings.push(ParseWarning::IsotopeDropped { offset: at(0) });
        }

        let sym_start = i;
        if i < b.len() && b[i].is_ascii_alphabetic() {
            i += 1;
            // Two-letter symbols start uppercase; aromatic ones are single lowercase letters here.
            if b[sym_start].is_ascii_uppercase() && i < b.len() && b[i].is_ascii_lowercase() {
                i += 1;
            }
        }
        let symbol = &body[sym_start..i];
        let (element, aromatic) = match symbol {
            "b" | "c" | "n" | "o" | "p" | "s" => {
                (Element::from_symbol(&symbol.to_ascii_uppercase()), true)
            }
            _ => (Element::from_symbol(symbol), false),
        };
        let element = element.ok_or_else(|| {
            self.err(at(sym_start), SmilesErrorKind::UnknownAtom(symbol.to_string()))
        })?;

        if i < b.len() && b[i] == b'@' {
            self.warnings.push(ParseWarning::StereoDropped { offset: at(i) });
            while i < b.len() && (b[i] == b'@' || (b[i].is_ascii_uppercase() && b[i] != b'H')) {
                i += 1;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }

        let mut h = 0u8;
        if i < b.len() && b[i] == b'H' {
            i += 1;
            h = 1;
            if i < b.len() && b[i].is_ascii_digit() {
                h = b[i] - b'0';
                i += 1;
            }
        }

        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            self.warnings.push(ParseWarning::ChargeDropped { offset: at(i) });
            let sign = b[i];
            i += 1;
            while i < b.len() && (b[i] == sign || b[i].is_ascii_digit()) {
                i += 1;
            }
        }

        if i < b.len() && b[i] == b':' {
            i += 1;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i != b.len() {
            let c = body[i..].chars().next().expect("non-empty remainder");
            return Err(self.err(at(i), SmilesErrorKind::UnexpectedChar(c)));
        }
        Ok(RawAtom {
            element,
            aromatic,
            bracket_h: Some(h),
            offset: start,
        })
    }

    fn build(&self) -> Result<Molecule, SmilesError> {
        let n = self.atoms.len();
        let mut orders: Vec<Option<BondOrder>> = Vec::with_capacity(self.bonds.len());
        let mut aromatic_bond = vec![false; self.bonds.len()];
        for (k, bond) in self.bonds.iter().enumerate() {
            let both_aromatic = self.atoms[bond.a].aromatic && self.atoms[bond.b].aromatic;
            let order = match bond.sym {
                Some(BondSym::Single) => Some(BondOrder::Single),
                Some(BondSym::Double) => Some(BondOrder::Double),
                Some(BondSym::Triple) => Some(BondOrder::Triple),
                Some(BondSym::Aromatic) => None,
                None if both_aromatic => None,
                None => Some(BondOrder::Single),
            };
            aromatic_bond[k] = order.is_none();
            orders.push(order);
        }

        // Valence already committed per atom: fixed bonds, one per aromatic bond,
        // and explicit hydrogens.
        let mut used = vec![0u8; n];
        let mut has_multiple = vec![false; n];
        for (k, bond) in self.bonds.iter().enumerate() {
            let v = orders[k].map_or(1, BondOrder::value);
            used[bond.a] += v;
            used[bond.b] += v;
            if v > 1 {
                has_multiple[bond.a] = true;
                has_multiple[bond.b] = true;
            }
        }
        // Atoms that must receive one double bond, and atoms that may (pyrrole-type N).
        let mut required = vec![false; n];
        let mut optional = vec![false; n];
        for (i, atom) in self.atoms.iter().enumerate() {
            if !atom.aromatic || has_multiple[i] {
                continue;
            }
            let committed = used[i] + atom.bracket_h.unwrap_or(0);
            if committed >= atom.element.max_valence() {
                continue;
            }
            let has_aromatic_bond = self
                .bonds
                .iter()
                .enumerate()
                .any(|(k, b)| aromatic_bond[k] && (b.a == i || b.b == i));
            if !has_aromatic_bond {
                continue;
            }
            match atom.element {
                Element::C => required[i] = true,
                Element::N | Element::P | Element::B if atom.bracket_h.is_none() => {
                    optional[i] = true
                }
                Element::N | Element::P => required[i] = true,
                _ => {}
            }
        }
        let aromatic_edges: Vec<(usize, usize, usize)> = self
            .bonds
            .iter()
            .enumerate()
            .filter(|(k, _)| aromatic_bond[*k])
            .map(|(k, b)| (k, b.a, b.b))
            .collect();
        let matched = kekule_match(n, &aromatic_edges, &required, &optional).ok_or_else(|| {
            let offset = (0..n)
                .find(|&i| required[i])
                .map_or(0, |i| self.atoms[i].offset);
            self.err(offset, SmilesErrorKind::Unkekulizable)
        })?;
        for k in matched {
            orders[k] = Some(BondOrder::Double);
        }

        let atoms: Vec<Element> = self.atoms.iter().map(|a| a.element).collect();
        let bonds: Vec<(usize, usize, BondOrder)> = self
            .bonds
            .iter()
            .zip(&orders)
            .map(|(b, o)| (b.a, b.b, o.unwrap_or(BondOrder::Single)))
            .collect();
        Molecule::from_parts(atoms, &bonds).map_err(|e| match e {
            MolError::ValenceOverflow { atom } => {
                self.err(self.atoms[atom].offset, SmilesErrorKind::ValenceOverflow)
            }
            MolError::Disconnected => self.err(0, SmilesErrorKind::Dot),
            _ => self.err(0, SmilesErrorKind::ValenceOverflow),
        })
    }
}

/// Chooses aromatic bonds to become double so that every required atom gets
/// exactly one and optional atoms at most one. Returns the chosen bond ids.
fn kekule_match(
    n: usize,
    edges: &[(usize, usize, usize)],
    required: &[bool],
    optional: &[bool],
) -> Option<Vec<usize>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &(k, a, b) in edges {
        let ok = |x: usize| required[x] || optional[x];
        if ok(a) && ok(b) {
            adj[a].push((b, k));
            adj[b].push((a, k));
        }
    }
    let mut mate = vec![usize::MAX; n];
    let mut chosen = Vec::new();
    if assign(&adj, required, &mut mate, &mut chosen) {
        Some(chosen)
    } else {
        None
    }
}

fn assign(
    adj: &[Vec<(usize, usize)>],
    required: &[bool],
    mate: &mut [usize],
    chosen: &mut Vec<usize>,
) -> bool {
    // Most constrained unmatched required atom first.
    let mut pick: Option<(usize, usize)> = None;
    for v in 0..adj.len() {
        if !required[v] || mate[v] != usize::MAX {
            continue;
        }
        let options = adj[v].iter().filter(|&&(w, _)| mate[w] == usize::MAX).count();
        if pick.is_none_or(|(_, best)| options < best) {
            pick = Some((v, options));
        }
    }
    let Some((v, options)) = pick else {
        return true;
    };
    if options == 0 {
        return false;
    }
    // Prefer required partners so optional atoms keep their hydrogen when possible.
    let mut partners: Vec<(usize, usize)> = adj[v]
        .iter()
        .copied()
        .filter(|&(w, _)| mate[w] == usize::MAX)
        .collect();
    partners.sort_by_key(|&(w, _)| !required[w]);
    for (w, k) in partners {
        mate[v] = w;
        mate[w] = v;
        chosen.push(k);
        if assign(adj, required, mate, chosen) {
            return true;
        }
        chosen.pop();
        mate[v] = usize::MAX;
        mate[w] = usize::MAX;
    }
    false
}

/// Canonical SMILES: kekulized, organic-subset symbols only, deterministic for
/// isomorphic inputs. The empty molecule writes as `""`.
pub fn write_canonical(mol: &Molecule) -> String {
    if mol.is_empty() {
        return String::new();
    }
    write_with_rank(mol, &mol.canonical_rank())
}

/// Writes `mol` with a depth-first walk from rank 0, visiting neighbors in
/// ascending rank. Ring-closure digits are the lowest free ones.
pub fn write_with_rank(mol: &Molecule, rank: &CanonicalRank) -> String {
    let n = mol.atom_count();
    if n == 0 {
        return String::new();
    }
    let start = rank.order()[0];
    let sorted_nbrs: Vec<Vec<(usize, BondOrder)>> = (0..n)
        .map(|v| {
            let mut list = mol.neighbors(v).to_vec();
            list.sort_by_key(|&(w, _)| rank.rank[w]);
            list
        })
        .collect();

    // Pass 1: spanning tree children and ring closures (ancestor, descendant).
    let mut visited = vec![false; n];
    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, BondOrder)>> = vec![Vec::new(); n];
    let mut opens: Vec<Vec<(usize, BondOrder)>> = vec![Vec::new(); n];
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
    visited[start] = true;
    while let Some(&mut (v, ref mut slot)) = stack.last_mut() {
        if *slot >= sorted_nbrs[v].len() {
            stack.pop();
            continue;
        }
        let (w, order) = sorted_nbrs[v][*slot];
        *slot += 1;
        if !visited[w] {
            visited[w] = true;
            parent[w] = v;
            children[v].push((w, order));
            stack.push((w, 0));
        } else if w != parent[v] && !opens[w].iter().any(|&(x, _)| x == v) && !opens[v].iter().any(|&(x, _)| x == w) {
            // w is an ancestor still on the stack: open at w, close at v.
            if stack.iter().any(|&(x, _)| x == w) {
                opens[w].push((v, order));
                closes[v].push(w);
            }
        }
    }

    // Pass 2: emit.
    let mut out = String::with_capacity(2 * n);
    let mut digits: HashMap<(usize, usize), u32> = HashMap::new();
    let mut in_use: Vec<bool> = vec![false; 100];
    emit(
        start,
        mol,
        &children,
        &opens,
        &closes,
        &mut digits,
        &mut in_use,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn emit(
    v: usize,
    mol: &Molecule,
    children: &[Vec<(usize, BondOrder)>],
    opens: &[Vec<(usize, BondOrder)>],
    closes: &[Vec<usize>],
    digits: &mut HashMap<(usize, usize), u32>,
    in_use: &mut [bool],
    out: &mut String,
) {
    out.push_str(mol.element(v).symbol());
    let mut freed = Vec::new();
    for &ancestor in &closes[v] {
        let d = digits.remove(&(ancestor, v)).expect("closure opened earlier");
        push_digit(out, d);
        freed.push(d);
    }
    for &(descendant, order) in &opens[v] {
        let d = (1..100u32)
            .find(|&d| !in_use[d as usize] && !freed.contains(&d))
            .expect("fewer than 99 open ring closures");
        in_use[d as usize] = true;
        digits.insert((v, descendant), d);
        out.push_str(bond_symbol(order));
        push_digit(out, d);
    }
    for d in freed {
        in_use[d as usize] = false;
    }
    let kids = &children[v];
    for (idx, &(w, order)) in kids.iter().enumerate() {
        let last = idx + 1 == kids.len();
        if !last {
            out.push('(');
        }
        out.push_str(bond_symbol(order));
        emit(w, mol, children, opens, closes, digits, in_use, out);
        if !last {
            out.push(')');
        }
    }
}

fn bond_symbol(order: BondOrder) -> &'static str {
    match order {
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
    }
}

fn push_digit(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push('%');
        out.push_str(&format!("{d:02}"));
    }
}
