use crate::chem::{Atom, BondOrder, Element, MolGraph, Molecule};
use crate::error::{ChemError, Result};

/// Parses a SMILES string into a perceived molecule.
pub fn parse_smiles(text: &str) -> Result<Molecule> {
    parse_graph(text)?.perceive()
}

/// Parses a SMILES string without running perception.
pub fn parse_graph(text: &str) -> Result<MolGraph> {
    Parser::new(text).run()
}

#[derive(Clone, Copy)]
enum PendingBond {
    Implicit,
    Explicit(BondOrder),
}

struct RingOpen {
    atom: usize,
    bond: PendingBond,
    pos: usize,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    g: MolGraph,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            s: text.as_bytes(),
            pos: 0,
            g: MolGraph::new(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(ChemError::syntax(self.pos, msg))
    }

    fn run(mut self) -> Result<MolGraph> {
        if self.s.is_empty() {
            return self.err("empty SMILES");
        }
        let mut prev: Option<usize> = None;
        let mut branch_stack: Vec<Option<usize>> = Vec::new();
        let mut pending = PendingBond::Implicit;
        let mut bond_set = false;
        let mut rings: Vec<Option<RingOpen>> = (0..100).map(|_| None).collect();

        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() || bond_set {
                        return self.err("branch without preceding atom");
                    }
                    branch_stack.push(prev);
                    self.pos += 1;
                    if self.peek() == Some(b')') {
                        return self.err("empty branch");
                    }
                }
                b')' => {
                    let Some(p) = branch_stack.pop() else {
                        return self.err("unbalanced ')'");
                    };
                    if bond_set {
                        return self.err("dangling bond before ')'");
                    }
                    prev = p;
                    self.pos += 1;
                }
                b'.' => {
                    if bond_set {
                        return self.err("bond before '.'");
                    }
                    if !branch_stack.is_empty() {
                        return self.err("'.' inside branch");
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if bond_set {
                        return self.err("consecutive bond symbols");
                    }
                    if prev.is_none() {
                        return self.err("bond without preceding atom");
                    }
                    pending = PendingBond::Explicit(match c {
                        b'-' => BondOrder::Single,
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => {
                            self.g.stereo_dropped = true;
                            BondOrder::Single
                        }
                    });
                    bond_set = true;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let start = self.pos;
                    let Some(atom) = prev else {
                        return self.err("ring closure without preceding atom");
                    };
                    let num = if c == b'%' {
                        let d = self.s.get(self.pos + 1..self.pos + 3);
                        match d {
                            Some(d) if d.iter().all(u8::is_ascii_digit) => {
                                self.pos += 3;
                                ((d[0] - b'0') * 10 + (d[1] - b'0')) as usize
                            }
                            _ => return self.err("'%' must be followed by two digits"),
                        }
                    } else {
                        self.pos += 1;
                        (c - b'0') as usize
                    };
                    match rings[num].take() {
                        None => {
                            rings[num] = Some(RingOpen {
                                atom,
                                bond: pending,
                                pos: start,
                            });
                        }
                        Some(open) => {
                            if open.atom == atom {
                                return Err(ChemError::syntax(start, "ring closure to same atom"));
                            }
                            let order = match (open.bond, pending) {
                                (PendingBond::Explicit(a), PendingBond::Explicit(b)) if a != b => {
                                    return Err(ChemError::syntax(
                                        start,
                                        format!("conflicting bond orders on ring bond {num}"),
                                    ))
                                }
                                (PendingBond::Explicit(a), _) | (_, PendingBond::Explicit(a)) => a,
                                _ => self.implicit_order(open.atom, atom),
                            };
                            if self.g.bond_between(open.atom, atom).is_some() {
                                return Err(ChemError::syntax(start, "duplicate bond via ring closure"));
                            }
                            self.g.add_bond(open.atom, atom, order);
                        }
                    }
                    pending = PendingBond::Implicit;
                    bond_set = false;
                }
                _ => {
                    let atom = self.atom()?;
                    let idx = self.g.add_atom(atom);
                    if let Some(p) = prev {
                        let order = match pending {
                            PendingBond::Explicit(o) => o,
                            PendingBond::Implicit => self.implicit_order(p, idx),
                        };
                        self.g.add_bond(p, idx, order);
                    } else if bond_set {
                        return self.err("bond without preceding atom");
                    }
                    prev = Some(idx);
                    pending = PendingBond::Implicit;
                    bond_set = false;
                }
            }
        }
        if bond_set {
            return self.err("dangling bond at end of input");
        }
        if !branch_stack.is_empty() {
            return self.err("unclosed branch '('");
        }
        if let Some((num, open)) = rings.iter().enumerate().find_map(|(k, r)| r.as_ref().map(|r| (k, r))) {
            return Err(ChemError::syntax(open.pos, format!("unclosed ring bond {num}")));
        }
        Ok(self.g)
    }

    fn implicit_order(&self, a: usize, b: usize) -> BondOrder {
        if self.g.atoms[a].aromatic && self.g.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let c = self.peek().unwrap();
        if c == b'[' {
            return self.bracket_atom();
        }
        let (sym, aromatic, len) = match c {
            b'C' if self.s.get(self.pos + 1) == Some(&b'l') => ("Cl", false, 2),
            b'B' if self.s.get(self.pos + 1) == Some(&b'r') => ("Br", false, 2),
            b'B' => ("B", false, 1),
            b'C' => ("C", false, 1),
            b'N' => ("N", false, 1),
            b'O' => ("O", false, 1),
            b'P' => ("P", false, 1),
            b'S' => ("S", false, 1),
            b'F' => ("F", false, 1),
            b'I' => ("I", false, 1),
            b'*' => ("*", false, 1),
            b'b' => ("B", true, 1),
            b'c' => ("C", true, 1),
            b'n' => ("N", true, 1),
            b'o' => ("O", true, 1),
            b'p' => ("P", true, 1),
            b's' => ("S", true, 1),
            _ => return self.err(format!("unexpected character '{}'", c as char)),
        };
        self.pos += len;
        let mut atom = Atom::new(Element::from_symbol(sym).unwrap());
        atom.aromatic = aromatic;
        Ok(atom)
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.s[start..self.pos]).ok()?.parse().ok()
    }

    fn bracket_atom(&mut self) -> Result<Atom> {
        self.pos += 1; // '['
        let isotope = self.number();
        let (element, aromatic) = self.bracket_symbol()?;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        atom.isotope = isotope.map(|i| i as u16);
        if isotope == Some(0) {
            return self.err("isotope must be positive");
        }
        // chirality
        if self.peek() == Some(b'@') {
            self.g.stereo_dropped = true;
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            }
            for tag in [b"TH", b"AL", b"SP", b"TB", b"OH"] {
                if self.s[self.pos..].starts_with(tag) {
                    self.pos += 2;
                    self.number();
                    break;
                }
            }
        }
        let mut h = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            h = self.number().unwrap_or(1) as u8;
        }
        atom.explicit_h = Some(h);
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let unit: i32 = if sign == b'+' { 1 } else { -1 };
            let mut mag = 1i32;
            if let Some(n) = self.number() {
                mag = n as i32;
            } else {
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    mag += 1;
                }
            }
            if mag > 15 {
                return self.err("charge out of range");
            }
            atom.charge = (unit * mag) as i8;
        }
        if self.peek() == Some(b':') {
            self.pos += 1;
            match self.number() {
                Some(0) | None => return self.err("atom map must be a positive integer"),
                Some(n) => atom.map = Some(n),
            }
        }
        if self.peek() != Some(b']') {
            return self.err("expected ']'");
        }
        self.pos += 1;
        if atom.is_dummy() && atom.charge != 0 {
            return self.err("dummy atoms cannot carry a charge");
        }
        if atom.is_dummy() {
            atom.explicit_h = Some(0);
        }
        Ok(atom)
    }

    fn bracket_symbol(&mut self) -> Result<(Element, bool)> {
        let rest = &self.s[self.pos..];
        if rest.first() == Some(&b'*') {
            self.pos += 1;
            return Ok((Element::DUMMY, false));
        }
        for (sym, elem) in [("se", "Se"), ("as", "As"), ("te", "Te")] {
            if rest.starts_with(sym.as_bytes()) {
                self.pos += 2;
                return Ok((Element::from_symbol(elem).unwrap(), true));
            }
        }
        match rest.first() {
            Some(&c) if matches!(c, b'b' | b'c' | b'n' | b'o' | b'p' | b's') => {
                self.pos += 1;
                let up = (c as char).to_ascii_uppercase().to_string();
                Ok((Element::from_symbol(&up).unwrap(), true))
            }
            Some(&c) if c.is_ascii_uppercase() => {
                if let Some(&l) = rest.get(1) {
                    if l.is_ascii_lowercase() {
                        let two = std::str::from_utf8(&rest[..2]).unwrap();
                        if let Some(e) = Element::from_symbol(two) {
                            self.pos += 2;
                            return Ok((e, false));
                        }
                    }
                }
                let one = (c as char).to_string();
                match Element::from_symbol(&one) {
                    Some(e) => {
                        self.pos += 1;
                        Ok((e, false))
                    }
                    None => self.err(format!("unknown element '{one}'")),
                }
            }
            _ => self.err("expected element symbol"),
        }
    }
}
