//! Molecular graph data model.

use super::element::Element;
use super::perceive;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Valence contribution, counting aromatic bonds as one.
    pub fn valence(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    pub fn from_valence(v: u32) -> Option<BondOrder> {
        match v {
            1 => Some(BondOrder::Single),
            2 => Some(BondOrder::Double),
            3 => Some(BondOrder::Triple),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub charge: i8,
    /// Hydrogen count fixed by the input; overrides the valence model.
    pub explicit_h: Option<u8>,
    pub isotope: Option<u16>,
    pub map: Option<u32>,
    /// Total hydrogen count, assigned by perception.
    pub hydrogens: u8,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            aromatic: false,
            charge: 0,
            explicit_h: None,
            isotope: None,
            map: None,
            hydrogens: 0,
        }
    }

    pub fn dummy(map: Option<u32>) -> Atom {
        Atom {
            map,
            ..Atom::new(Element::DUMMY)
        }
    }

    pub fn is_dummy(&self) -> bool {
        self.element.is_dummy()
    }

    /// Copy of the atom whose hydrogen count is frozen at its perceived value.
    pub fn pinned(&self) -> Atom {
        Atom {
            explicit_h: Some(self.hydrogens),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Bond {
        Bond { a, b, order }
    }

    pub fn other(&self, i: usize) -> usize {
        if self.a == i {
            self.b
        } else {
            self.a
        }
    }
}

/// An unperceived atom/bond list. Call [`MolGraph::perceive`] to obtain a
/// [`Molecule`].
#[derive(Debug, Clone, Default)]
pub struct MolGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    pub stereo_dropped: bool,
}

impl MolGraph {
    pub fn new() -> MolGraph {
        MolGraph::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> usize {
        self.bonds.push(Bond::new(a, b, order));
        self.bonds.len() - 1
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.bonds
            .iter()
            .position(|bd| (bd.a == a && bd.b == b) || (bd.a == b && bd.b == a))
    }

    pub fn perceive(self) -> Result<Molecule> {
        perceive::perceive(self)
    }

    /// Removes the listed atoms and reindexes. Returns the old→new index map.
    /// When `cap_h` is set, surviving neighbors gain hydrogens for every
    /// removed bond (requires pinned hydrogen counts).
    pub fn remove_atoms(&mut self, remove: &[bool], cap_h: bool) -> Vec<Option<usize>> {
        let mut map = vec![None; self.atoms.len()];
        let mut next = 0;
        for (i, slot) in map.iter_mut().enumerate() {
            if !remove[i] {
                *slot = Some(next);
                next += 1;
            }
        }
        if cap_h {
            for bd in &self.bonds {
                let (ra, rb) = (remove[bd.a], remove[bd.b]);
                if ra != rb {
                    let keep = if ra { bd.b } else { bd.a };
                    let atom = &mut self.atoms[keep];
                    if !atom.is_dummy() {
                        let h = atom.explicit_h.unwrap_or(atom.hydrogens);
                        atom.explicit_h = Some(h + bd.order.valence() as u8);
                    }
                }
            }
        }
        let atoms = std::mem::take(&mut self.atoms);
        self.atoms = atoms
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !remove[*i])
            .map(|(_, a)| a)
            .collect();
        self.bonds = self
            .bonds
            .iter()
            .filter_map(|bd| Some(Bond::new(map[bd.a]?, map[bd.b]?, bd.order)))
            .collect();
        map
    }
}

/// A perceived molecule: rings, aromaticity and hydrogen counts assigned.
/// Immutable; edits go through [`Molecule::to_graph`].
#[derive(Debug, Clone)]
pub struct Molecule {
    pub(crate) atoms: Vec<Atom>,
    pub(crate) bonds: Vec<Bond>,
    pub(crate) adj: Vec<Vec<(usize, usize)>>,
    pub(crate) rings: Vec<Vec<usize>>,
    pub(crate) atom_in_ring: Vec<bool>,
    pub(crate) bond_in_ring: Vec<bool>,
    pub(crate) stereo_dropped: bool,
}

impl Molecule {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `(neighbor, bond index)` pairs of atom `i`, in bond insertion order.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Neighbors that are not hydrogen atoms (dummies count as heavy).
    pub fn heavy_degree(&self, i: usize) -> usize {
        self.adj[i]
            .iter()
            .filter(|(n, _)| !self.atoms[*n].element.is_hydrogen())
            .count()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a].iter().find(|(n, _)| *n == b).map(|(_, bd)| *bd)
    }

    /// Smallest-set-of-smallest-rings basis, each ring as an atom cycle.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn atom_in_ring(&self, i: usize) -> bool {
        self.atom_in_ring[i]
    }

    pub fn bond_in_ring(&self, i: usize) -> bool {
        self.bond_in_ring[i]
    }

    pub fn stereo_dropped(&self) -> bool {
        self.stereo_dropped
    }

    /// Bond-order sum, aromatic bonds counting one each.
    pub fn explicit_valence(&self, i: usize) -> u32 {
        self.adj[i]
            .iter()
            .map(|(_, b)| self.bonds[*b].order.valence())
            .sum()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms
            .iter()
            .filter(|a| !a.element.is_hydrogen())
            .count()
    }

    /// Connected components as sorted atom index lists, ordered by first atom.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut k = 0;
            while k < comp.len() {
                let u = comp[k];
                k += 1;
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Editable copy with hydrogen counts pinned to their perceived values.
    pub fn to_graph(&self) -> MolGraph {
        MolGraph {
            atoms: self.atoms.iter().map(Atom::pinned).collect(),
            bonds: self.bonds.clone(),
            stereo_dropped: self.stereo_dropped,
        }
    }

    /// Like `to_graph`, but with aromatic bonds replaced by a Kekulé
    /// assignment and aromatic flags cleared, so perception starts afresh.
    pub fn kekule_graph(&self) -> Result<MolGraph> {
        let bonds = perceive::kekulize(&self.atoms, &self.bonds, &self.adj)?;
        Ok(MolGraph {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    aromatic: false,
                    ..a.pinned()
                })
                .collect(),
            bonds,
            stereo_dropped: self.stereo_dropped,
        })
    }

    /// Induced subgraph over `keep` (in the given order), hydrogen counts
    /// pinned, bonds leaving the subset dropped.
    pub fn subgraph(&self, keep: &[usize]) -> MolGraph {
        let mut index = vec![usize::MAX; self.atoms.len()];
        let mut g = MolGraph::new();
        g.stereo_dropped = self.stereo_dropped;
        for (k, &i) in keep.iter().enumerate() {
            index[i] = k;
            g.add_atom(self.atoms[i].pinned());
        }
        for bd in &self.bonds {
            if index[bd.a] != usize::MAX && index[bd.b] != usize::MAX {
                g.add_bond(index[bd.a], index[bd.b], bd.order);
            }
        }
        g
    }

    /// Copy with every atom map removed (dummies keep theirs when `keep_dummy_maps`).
    pub fn without_maps(&self, keep_dummy_maps: bool) -> Molecule {
        let mut m = self.clone();
        for a in &mut m.atoms {
            if !(keep_dummy_maps && a.is_dummy()) {
                a.map = None;
            }
        }
        m
    }

    /// Dummy atoms as `(map, atom index)`, sorted by map (unmapped last).
    pub fn dummies(&self) -> Vec<(Option<u32>, usize)> {
        let mut d: Vec<_> = self
            .atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_dummy())
            .map(|(i, a)| (a.map, i))
            .collect();
        d.sort_by_key(|(m, i)| (m.unwrap_or(u32::MAX), *i));
        d
    }
}

/// Structural equality: same atoms (ignoring how hydrogen counts were
/// supplied) and same bonds in the same order.
impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        let key = |a: &Atom| (a.element, a.aromatic, a.charge, a.isotope, a.map, a.hydrogens);
        self.atoms.len() == other.atoms.len()
            && self.atoms.iter().zip(&other.atoms).all(|(x, y)| key(x) == key(y))
            && self.bonds == other.bonds
    }
}
