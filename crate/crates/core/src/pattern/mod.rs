//! A SMARTS subset for fragment queries, and substructure matching.
//!
//! Supported primitives: element symbols (aliphatic and aromatic), `*`,
//! bracket atoms with isotope, hydrogen count, charge and map, `R` / `!R`
//! ring constraints joined with `;`, and the bond symbols `- = # : ~`.

mod matcher;
mod parse;

pub use matcher::{find_embeddings, find_matches, verify_match, Match};
pub use parse::parse_pattern;

use crate::chem::{Atom, BondOrder, Element, MolGraph, Molecule};
use crate::error::{ChemError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryAtom {
    /// `None` is the wildcard `*`.
    pub element: Option<Element>,
    /// `Some(true)` for lowercase symbols, `Some(false)` for uppercase.
    pub aromatic: Option<bool>,
    pub hydrogens: Option<u8>,
    /// `Some(true)` for `R`, `Some(false)` for `!R`.
    pub in_ring: Option<bool>,
    /// Required formal charge; wildcards leave it open.
    pub charge: Option<i8>,
    pub isotope: Option<u16>,
    pub map: Option<u32>,
}

impl QueryAtom {
    pub fn is_wildcard(&self) -> bool {
        self.element.is_none()
    }

    pub(crate) fn matches(&self, mol: &Molecule, i: usize) -> bool {
        let a = mol.atom(i);
        match self.element {
            None => {
                if a.element.is_hydrogen() {
                    return false;
                }
            }
            Some(e) => {
                if a.element != e {
                    return false;
                }
            }
        }
        if self.aromatic.is_some_and(|ar| ar != a.aromatic) {
            return false;
        }
        if self.hydrogens.is_some_and(|h| h != a.hydrogens) {
            return false;
        }
        if self.in_ring.is_some_and(|r| r != mol.atom_in_ring(i)) {
            return false;
        }
        if self.charge.is_some_and(|c| c != a.charge) {
            return false;
        }
        if self.isotope.is_some_and(|iso| Some(iso) != a.isotope) {
            return false;
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondQuery {
    Single,
    Double,
    Triple,
    Aromatic,
    /// No symbol written: single or aromatic.
    Unspecified,
    /// `~`
    Any,
}

impl BondQuery {
    pub(crate) fn matches(self, order: BondOrder) -> bool {
        match self {
            BondQuery::Single => order == BondOrder::Single,
            BondQuery::Double => order == BondOrder::Double,
            BondQuery::Triple => order == BondOrder::Triple,
            BondQuery::Aromatic => order == BondOrder::Aromatic,
            BondQuery::Unspecified => matches!(order, BondOrder::Single | BondOrder::Aromatic),
            BondQuery::Any => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryBond {
    pub a: usize,
    pub b: usize,
    pub query: BondQuery,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub atoms: Vec<QueryAtom>,
    pub bonds: Vec<QueryBond>,
    pub(crate) adj: Vec<Vec<(usize, usize)>>,
}

impl Pattern {
    pub(crate) fn new(atoms: Vec<QueryAtom>, bonds: Vec<QueryBond>) -> Pattern {
        let mut adj = vec![Vec::new(); atoms.len()];
        for (k, b) in bonds.iter().enumerate() {
            adj[b.a].push((b.b, k));
            adj[b.b].push((b.a, k));
        }
        Pattern { atoms, bonds, adj }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    /// Mapped wildcard atoms as `(map, query index)`, sorted by map.
    pub fn anchors(&self) -> Vec<(u32, usize)> {
        let mut v: Vec<(u32, usize)> = self
            .atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_wildcard())
            .filter_map(|(i, a)| a.map.map(|m| (m, i)))
            .collect();
        v.sort_unstable();
        v
    }

    /// Molecule with the same constitution; query-only constraints are
    /// dropped and unconstrained hydrogen counts come from the valence model.
    pub fn to_molecule(&self) -> Result<Molecule> {
        let mut g = MolGraph::new();
        for q in &self.atoms {
            let mut a = match q.element {
                None => Atom::dummy(q.map),
                Some(e) => Atom::new(e),
            };
            a.aromatic = q.aromatic.unwrap_or(false);
            a.charge = q.charge.unwrap_or(0);
            a.explicit_h = q.hydrogens;
            a.isotope = q.isotope;
            a.map = q.map;
            g.add_atom(a);
        }
        for b in &self.bonds {
            let order = match b.query {
                BondQuery::Single => BondOrder::Single,
                BondQuery::Double => BondOrder::Double,
                BondQuery::Triple => BondOrder::Triple,
                BondQuery::Aromatic => BondOrder::Aromatic,
                BondQuery::Unspecified => {
                    if g.atoms[b.a].aromatic && g.atoms[b.b].aromatic {
                        BondOrder::Aromatic
                    } else {
                        BondOrder::Single
                    }
                }
                BondQuery::Any => {
                    return Err(ChemError::Fragment(
                        "`~` bonds have no molecular equivalent".into(),
                    ))
                }
            };
            g.add_bond(b.a, b.b, order);
        }
        g.perceive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn count(smi: &str, pat: &str) -> usize {
        find_matches(&parse_smiles(smi).unwrap(), &parse_pattern(pat).unwrap()).len()
    }

    #[test]
    fn methoxy_on_anisole() {
        let mol = parse_smiles("COc1ccccc1").unwrap();
        let pat = parse_pattern("[*:1]OC").unwrap();
        let m = find_matches(&mol, &pat);
        assert_eq!(m.len(), 1);
        let anchor = m[0].atom_for_map(&pat, 1).unwrap();
        assert!(mol.atom(anchor).aromatic);
    }

    #[test]
    fn benzene_on_toluene_collapses() {
        let mol = parse_smiles("Cc1ccccc1").unwrap();
        let pat = parse_pattern("c1ccccc1").unwrap();
        assert_eq!(find_embeddings(&mol, &pat).len(), 12);
        assert_eq!(find_matches(&mol, &pat).len(), 1);
    }

    #[test]
    fn absent_pattern() {
        assert_eq!(count("CCO", "[*:1]Cl"), 0);
    }

    #[test]
    fn ring_constraints() {
        assert_eq!(count("CC(=O)NC", "[*:1][C;!R](=O)[N;!R][*:2]"), 1);
        assert_eq!(count("O=C1CCCN1", "[*:1][C;!R](=O)[N;!R][*:2]"), 0);
        assert_eq!(count("O=C1CCCN1", "[C;R](=O)[N;R]"), 1);
    }

    #[test]
    fn hydrogen_counts_and_charges() {
        assert_eq!(count("c1cc[nH]c1", "[nH]"), 1);
        assert_eq!(count("CCC", "[CH2]"), 1);
        assert_eq!(count("CCC", "[C;H3]"), 2);
        assert_eq!(count("C[N+](=O)[O-]", "[O-]"), 1);
        assert_eq!(count("C[N+](=O)[O-]", "O"), 1);
    }

    #[test]
    fn bond_semantics() {
        // unspecified bonds take single or aromatic, never double
        assert_eq!(count("c1ccccc1", "cc"), 6);
        assert_eq!(count("C=C", "CC"), 0);
        assert_eq!(count("C=C", "C~C"), 1);
        assert_eq!(count("c1ccccc1", "c:c"), 6);
        assert_eq!(count("c1ccccc1", "c-c"), 0);
    }

    #[test]
    fn wildcard_skips_hydrogen_atoms() {
        assert_eq!(count("[H][H]", "*"), 0);
        assert_eq!(count("C", "*"), 1);
    }

    #[test]
    fn unsupported_and_malformed() {
        for bad in ["[C,N]", "[CD2]", "[CX3]", "[$(CO)]", "[#6]", "C@C", "[C&R]", "a"] {
            assert!(
                matches!(parse_pattern(bad), Err(ChemError::UnsupportedPrimitive { .. })),
                "{bad}"
            );
        }
        for bad in ["[C;!R", "C1CC", "C.C", "", "[*:1]C[*:1]", "C(", "C="] {
            assert!(matches!(parse_pattern(bad), Err(ChemError::Syntax { .. })), "{bad}");
        }
    }

    #[test]
    fn anchors_and_conversion() {
        let p = parse_pattern("[*:2]c1ccc([*:1])cc1").unwrap();
        assert_eq!(p.anchors().iter().map(|a| a.0).collect::<Vec<_>>(), vec![1, 2]);
        let m = p.to_molecule().unwrap();
        assert_eq!(m.atom_count(), 8);
        assert!(m.atoms().iter().filter(|a| !a.is_dummy()).all(|a| a.aromatic));
    }

    /// Exhaustive enumeration of injective maps, filtered by `verify_match`.
    fn brute_force(mol: &Molecule, pat: &Pattern) -> Vec<Match> {
        fn rec(mol: &Molecule, pat: &Pattern, cur: &mut Vec<usize>, out: &mut Vec<Match>) {
            if cur.len() == pat.len() {
                let m = Match { atoms: cur.clone() };
                if verify_match(mol, pat, &m) {
                    out.push(m);
                }
                return;
            }
            for i in 0..mol.atom_count() {
                if !cur.contains(&i) {
                    cur.push(i);
                    rec(mol, pat, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(mol, pat, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn agrees_with_brute_force() {
        let mols = ["CC(=O)Nc1ccc(O)cc1", "C1CC1C(F)(F)F", "c1ccc2[nH]ccc2c1", "OC(=O)CCN"];
        let pats = ["[*:1]C(=O)[*:2]", "c1ccccc1", "[*:1]C(F)(F)F", "C~C", "[*:1]O", "[c;R][*:1]", "CN"];
        for s in mols {
            let mol = parse_smiles(s).unwrap();
            for p in pats {
                let pat = parse_pattern(p).unwrap();
                assert_eq!(find_embeddings(&mol, &pat), brute_force(&mol, &pat), "{s} / {p}");
            }
        }
    }
}
