use super::{BondQuery, Pattern, QueryAtom, QueryBond};
use crate::chem::Element;
use crate::error::{ChemError, Result};

/// Parses a query in the supported SMARTS subset.
pub fn parse_pattern(text: &str) -> Result<Pattern> {
    let s = text.as_bytes();
    if s.is_empty() {
        return Err(ChemError::syntax(0, "empty pattern"));
    }
    let mut atoms: Vec<QueryAtom> = Vec::new();
    let mut bonds: Vec<QueryBond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut stack: Vec<usize> = Vec::new();
    let mut pending: Option<BondQuery> = None;
    let mut rings: Vec<Option<(usize, Option<BondQuery>, usize)>> = vec![None; 100];
    let mut pos = 0;

    let unsupported = |pos: usize, what: &str| -> ChemError {
        ChemError::UnsupportedPrimitive {
            pos,
            what: what.to_string(),
        }
    };

    while pos < s.len() {
        let c = s[pos];
        match c {
            b'(' => {
                let Some(p) = prev else {
                    return Err(ChemError::syntax(pos, "branch without preceding atom"));
                };
                if pending.is_some() {
                    return Err(ChemError::syntax(pos, "bond before '('"));
                }
                stack.push(p);
                pos += 1;
            }
            b')' => {
                let Some(p) = stack.pop() else {
                    return Err(ChemError::syntax(pos, "unbalanced ')'"));
                };
                if pending.is_some() {
                    return Err(ChemError::syntax(pos, "dangling bond before ')'"));
                }
                prev = Some(p);
                pos += 1;
            }
            b'.' => return Err(ChemError::syntax(pos, "patterns must be connected")),
            b'-' | b'=' | b'#' | b':' | b'~' | b'/' | b'\\' => {
                if prev.is_none() || pending.is_some() {
                    return Err(ChemError::syntax(pos, "misplaced bond symbol"));
                }
                pending = Some(match c {
                    b'=' => BondQuery::Double,
                    b'#' => BondQuery::Triple,
                    b':' => BondQuery::Aromatic,
                    b'~' => BondQuery::Any,
                    _ => BondQuery::Single,
                });
                pos += 1;
            }
            b'@' => return Err(unsupported(pos, "ring bond primitive '@'")),
            b'!' | b',' | b'&' | b';' => {
                return Err(unsupported(pos, &format!("bond logic '{}'", c as char)))
            }
            b'0'..=b'9' | b'%' => {
                let start = pos;
                let Some(atom) = prev else {
                    return Err(ChemError::syntax(pos, "ring closure without preceding atom"));
                };
                let num = if c == b'%' {
                    match s.get(pos + 1..pos + 3) {
                        Some(d) if d.iter().all(u8::is_ascii_digit) => {
                            pos += 3;
                            ((d[0] - b'0') * 10 + (d[1] - b'0')) as usize
                        }
                        _ => return Err(ChemError::syntax(pos, "'%' must be followed by two digits")),
                    }
                } else {
                    pos += 1;
                    (c - b'0') as usize
                };
                match rings[num].take() {
                    None => rings[num] = Some((atom, pending, start)),
                    Some((other, ob, _)) => {
                        let q = match (ob, pending) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(ChemError::syntax(start, "conflicting ring bond symbols"))
                            }
                            (Some(a), _) | (_, Some(a)) => a,
                            _ => BondQuery::Unspecified,
                        };
                        if other == atom || bonds.iter().any(|b| {
                            (b.a == other && b.b == atom) || (b.a == atom && b.b == other)
                        }) {
                            return Err(ChemError::syntax(start, "invalid ring closure"));
                        }
                        bonds.push(QueryBond { a: other, b: atom, query: q });
                    }
                }
                pending = None;
            }
            _ => {
                let (atom, len) = if c == b'[' {
                    let Some(close) = s[pos..].iter().position(|&x| x == b']') else {
                        return Err(ChemError::syntax(pos, "expected ']'"));
                    };
                    (bracket(&s[pos + 1..pos + close], pos + 1)?, close + 1)
                } else {
                    organic(s, pos)?
                };
                let idx = atoms.len();
                atoms.push(atom);
                if let Some(p) = prev {
                    bonds.push(QueryBond {
                        a: p,
                        b: idx,
                        query: pending.take().unwrap_or(BondQuery::Unspecified),
                    });
                } else if pending.is_some() {
                    return Err(ChemError::syntax(pos, "bond without preceding atom"));
                }
                prev = Some(idx);
                pos += len;
            }
        }
    }
    if pending.is_some() {
        return Err(ChemError::syntax(s.len(), "dangling bond at end of pattern"));
    }
    if !stack.is_empty() {
        return Err(ChemError::syntax(s.len(), "unclosed branch '('"));
    }
    if let Some((_, _, p)) = rings.iter().flatten().next() {
        return Err(ChemError::syntax(*p, "unclosed ring bond"));
    }
    let mut seen = std::collections::HashSet::new();
    for a in &atoms {
        if let Some(m) = a.map {
            if !seen.insert(m) {
                return Err(ChemError::syntax(0, format!("duplicate atom map {m}")));
            }
        }
    }
    Ok(Pattern::new(atoms, bonds))
}

fn organic(s: &[u8], pos: usize) -> Result<(QueryAtom, usize)> {
    let two = s.get(pos..pos + 2);
    let (e, aromatic, len) = match s[pos] {
        b'C' if two == Some(b"Cl") => (Element::CL, false, 2),
        b'B' if two == Some(b"Br") => (Element::BR, false, 2),
        b'*' => return Ok((wildcard(), 1)),
        c @ (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I') => (single(c), false, 1),
        c @ (b'b' | b'c' | b'n' | b'o' | b'p' | b's') => (single(c.to_ascii_uppercase()), true, 1),
        b'a' | b'A' => {
            return Err(ChemError::UnsupportedPrimitive {
                pos,
                what: "generic aromatic/aliphatic atom".into(),
            })
        }
        c => return Err(ChemError::syntax(pos, format!("unexpected character '{}'", c as char))),
    };
    Ok((element_atom(e, aromatic), len))
}

fn single(c: u8) -> Element {
    Element::from_symbol(std::str::from_utf8(&[c]).unwrap()).unwrap()
}

fn wildcard() -> QueryAtom {
    QueryAtom {
        element: None,
        aromatic: None,
        hydrogens: None,
        in_ring: None,
        charge: None,
        isotope: None,
        map: None,
    }
}

fn element_atom(e: Element, aromatic: bool) -> QueryAtom {
    QueryAtom {
        element: Some(e),
        aromatic: Some(aromatic),
        hydrogens: None,
        in_ring: None,
        charge: Some(0),
        isotope: None,
        map: None,
    }
}

/// Parses the inside of a bracket atom; `base` is the offset of `body` in the input.
fn bracket(body: &[u8], base: usize) -> Result<QueryAtom> {
    for (k, &c) in body.iter().enumerate() {
        let what = match c {
            b',' => "disjunction ','",
            b'&' => "high-precedence conjunction '&'",
            b'$' => "recursive SMARTS",
            b'#' => "atomic number primitive",
            _ => continue,
        };
        return Err(ChemError::UnsupportedPrimitive {
            pos: base + k,
            what: what.into(),
        });
    }
    // trailing atom map
    let mut end = body.len();
    let mut map = None;
    if let Some(colon) = body.iter().rposition(|&c| c == b':') {
        let digits = &body[colon + 1..];
        if digits.is_empty() || !digits.iter().all(u8::is_ascii_digit) {
            return Err(ChemError::syntax(base + colon, "atom map must be a positive integer"));
        }
        let n: u32 = std::str::from_utf8(digits).unwrap().parse().map_err(|_| {
            ChemError::syntax(base + colon, "atom map out of range")
        })?;
        if n == 0 {
            return Err(ChemError::syntax(base + colon, "atom map must be a positive integer"));
        }
        map = Some(n);
        end = colon;
    }
    let mut atom: Option<QueryAtom> = None;
    let mut hydrogens = None;
    let mut in_ring = None;
    let mut charge = None;
    let mut offset = 0;
    for (k, prim) in body[..end].split(|&c| c == b';').enumerate() {
        let p = base + offset;
        offset += prim.len() + 1;
        if prim.is_empty() {
            return Err(ChemError::syntax(p, "empty primitive"));
        }
        if k == 0 {
            if let Some(parsed) = atom_primitive(prim, p)? {
                hydrogens = parsed.1;
                charge = parsed.2;
                atom = Some(parsed.0);
                continue;
            }
        }
        match prim {
            b"R" => in_ring = Some(true),
            b"!R" | b"R0" => in_ring = Some(false),
            [b'H', rest @ ..] if rest.iter().all(u8::is_ascii_digit) => {
                hydrogens = Some(digits_or(rest, 1, p)? as u8)
            }
            [sign @ (b'+' | b'-'), rest @ ..] => charge = Some(parse_charge(*sign, rest, p)?),
            _ => {
                return Err(ChemError::UnsupportedPrimitive {
                    pos: p,
                    what: String::from_utf8_lossy(prim).into_owned(),
                })
            }
        }
    }
    let mut atom = atom.ok_or_else(|| ChemError::syntax(base, "bracket atom needs an element or '*'"))?;
    if hydrogens.is_some() {
        atom.hydrogens = hydrogens;
    }
    if charge.is_some() {
        atom.charge = charge;
    }
    atom.in_ring = in_ring;
    atom.map = map;
    Ok(atom)
}

type Primitive = (QueryAtom, Option<u8>, Option<i8>);

/// `[isotope] symbol [H[n]] [charge]`; returns `None` when `prim` is not led by a symbol.
fn atom_primitive(prim: &[u8], p: usize) -> Result<Option<Primitive>> {
    let mut i = 0;
    while i < prim.len() && prim[i].is_ascii_digit() {
        i += 1;
    }
    let isotope = if i > 0 {
        Some(digits_or(&prim[..i], 0, p)? as u16)
    } else {
        None
    };
    let rest = &prim[i..];
    let (mut atom, len) = match rest.first() {
        Some(b'*') => (wildcard(), 1),
        Some(b's') if rest.get(1) == Some(&b'e') => (element_atom(Element::SE, true), 2),
        Some(b'a') if rest.get(1) == Some(&b's') => {
            (element_atom(Element::from_symbol("As").unwrap(), true), 2)
        }
        Some(&c @ (b'b' | b'c' | b'n' | b'o' | b'p' | b's')) => {
            (element_atom(single(c.to_ascii_uppercase()), true), 1)
        }
        Some(&c) if c.is_ascii_uppercase() => {
            // `R` alone is the ring primitive, not an element
            if c == b'R' && !rest.get(1).is_some_and(u8::is_ascii_lowercase) {
                return Ok(None);
            }
            let two = rest.get(..2).and_then(|t| {
                if t[1].is_ascii_lowercase() {
                    Element::from_symbol(std::str::from_utf8(t).ok()?)
                } else {
                    None
                }
            });
            match two {
                Some(e) => (element_atom(e, false), 2),
                None => match Element::from_symbol(std::str::from_utf8(&rest[..1]).unwrap()) {
                    Some(e) => (element_atom(e, false), 1),
                    None if matches!(c, b'D' | b'X' | b'A') => {
                        return Err(ChemError::UnsupportedPrimitive {
                            pos: p + i,
                            what: (c as char).to_string(),
                        })
                    }
                    None => {
                        return Err(ChemError::syntax(p + i, format!("unknown element '{}'", c as char)))
                    }
                },
            }
        }
        _ => {
            if isotope.is_some() {
                return Err(ChemError::syntax(p + i, "expected element symbol"));
            }
            return Ok(None);
        }
    };
    atom.isotope = isotope;
    let mut j = len;
    let mut hydrogens = None;
    let mut charge = None;
    if rest.get(j) == Some(&b'@') {
        return Err(ChemError::UnsupportedPrimitive {
            pos: p + i + j,
            what: "chirality".into(),
        });
    }
    if rest.get(j) == Some(&b'H') {
        j += 1;
        let s = j;
        while j < rest.len() && rest[j].is_ascii_digit() {
            j += 1;
        }
        hydrogens = Some(digits_or(&rest[s..j], 1, p)? as u8);
    }
    if let Some(&sign @ (b'+' | b'-')) = rest.get(j) {
        charge = Some(parse_charge(sign, &rest[j + 1..], p + i + j)?);
        j = rest.len();
    }
    if j != rest.len() {
        return Err(ChemError::UnsupportedPrimitive {
            pos: p + i + j,
            what: String::from_utf8_lossy(&rest[j..]).into_owned(),
        });
    }
    if atom.element.is_none() && charge.is_some_and(|c| c != 0) {
        return Err(ChemError::syntax(p, "wildcards cannot carry a charge"));
    }
    Ok(Some((atom, hydrogens, charge)))
}

fn digits_or(d: &[u8], default: u32, p: usize) -> Result<u32> {
    if d.is_empty() {
        return Ok(default);
    }
    std::str::from_utf8(d)
        .unwrap()
        .parse()
        .map_err(|_| ChemError::syntax(p, "number out of range"))
}

fn parse_charge(sign: u8, rest: &[u8], p: usize) -> Result<i8> {
    let unit: i32 = if sign == b'+' { 1 } else { -1 };
    let mag = if rest.iter().all(|&c| c == sign) {
        rest.len() as i32 + 1
    } else if rest.iter().all(u8::is_ascii_digit) {
        digits_or(rest, 1, p)? as i32
    } else {
        return Err(ChemError::syntax(p, "malformed charge"));
    };
    if mag > 15 {
        return Err(ChemError::syntax(p, "charge out of range"));
    }
    Ok((unit * mag) as i8)
}
