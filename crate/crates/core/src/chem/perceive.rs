//! Perception: ring membership, hydrogen assignment, kekulization and
//! Hückel aromaticity.

use super::element::Element;
use super::mol::{Atom, Bond, BondOrder, MolGraph, Molecule};
use super::rings;
use crate::error::{ChemError, Result};

pub fn perceive(graph: MolGraph) -> Result<Molecule> {
    let MolGraph {
        mut atoms,
        mut bonds,
        stereo_dropped,
    } = graph;
    let n = atoms.len();
    validate(n, &bonds)?;

    let adj = build_adj(n, &bonds);
    let in_ring = rings::ring_bonds(n, &bonds, &adj);

    // Aromatic bonds are only meaningful inside rings between aromatic atoms.
    for (i, bd) in bonds.iter_mut().enumerate() {
        if bd.order == BondOrder::Aromatic
            && (!in_ring[i] || !atoms[bd.a].aromatic || !atoms[bd.b].aromatic)
        {
            bd.order = BondOrder::Single;
        }
    }
    for (i, a) in atoms.iter().enumerate() {
        if a.aromatic && !adj[i].iter().any(|(_, b)| bonds[*b].order == BondOrder::Aromatic) {
            return Err(ChemError::Kekulization(format!(
                "atom {i} ({}) is marked aromatic outside an aromatic ring",
                a.element
            )));
        }
    }

    for (i, atom) in atoms.iter_mut().enumerate() {
        atom.hydrogens = derive_hydrogens(i, atom, &adj, &bonds)?;
    }

    let (atoms, bonds) = fold_explicit_hydrogens(atoms, bonds);
    let n = atoms.len();
    let adj = build_adj(n, &bonds);
    let in_ring = rings::ring_bonds(n, &bonds, &adj);

    let kekule = kekulize(&atoms, &bonds, &adj)?;
    check_valences(&atoms, &kekule, &adj)?;

    let rings = rings::sssr(n, &kekule, &adj, &in_ring);
    let mut aromatic: Vec<bool> = atoms.iter().map(|a| a.aromatic).collect();
    for i in huckel_atoms(&atoms, &kekule, &adj, &in_ring, &rings) {
        aromatic[i] = true;
    }

    let mut final_bonds = kekule.clone();
    for ring in &rings {
        if ring.iter().all(|&a| aromatic[a]) {
            for k in 0..ring.len() {
                let (x, y) = (ring[k], ring[(k + 1) % ring.len()]);
                if let Some(&(_, b)) = adj[x].iter().find(|(w, _)| *w == y) {
                    final_bonds[b].order = BondOrder::Aromatic;
                }
            }
        }
    }
    let mut atoms = atoms;
    for i in 0..n {
        let has_arom = adj[i]
            .iter()
            .any(|(_, b)| final_bonds[*b].order == BondOrder::Aromatic);
        atoms[i].aromatic = aromatic[i] && has_arom;
    }
    let atom_in_ring = (0..n)
        .map(|i| adj[i].iter().any(|(_, b)| in_ring[*b]))
        .collect();

    Ok(Molecule {
        atoms,
        bonds: final_bonds,
        adj,
        rings,
        atom_in_ring,
        bond_in_ring: in_ring,
        stereo_dropped,
    })
}

pub(crate) fn build_adj(n: usize, bonds: &[Bond]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); n];
    for (i, b) in bonds.iter().enumerate() {
        adj[b.a].push((b.b, i));
        adj[b.b].push((b.a, i));
    }
    adj
}

fn validate(n: usize, bonds: &[Bond]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for b in bonds {
        if b.a >= n || b.b >= n {
            return Err(ChemError::Graph(format!(
                "bond {}-{} references a missing atom",
                b.a, b.b
            )));
        }
        if b.a == b.b {
            return Err(ChemError::Graph(format!("self-bond on atom {}", b.a)));
        }
        if !seen.insert((b.a.min(b.b), b.a.max(b.b))) {
            return Err(ChemError::Graph(format!(
                "duplicate bond {}-{}",
                b.a, b.b
            )));
        }
    }
    Ok(())
}

/// Hydrogen count an organic-subset atom receives from the default valence
/// model, given its bond-order sum (aromatic bonds counting one).
pub fn default_hydrogens(element: Element, aromatic: bool, charge: i8, bond_sum: u32) -> Option<u8> {
    if element.is_dummy() {
        return Some(0);
    }
    let Some(vals) = element.valences(charge) else {
        return Some(0);
    };
    let v = vals.iter().map(|v| *v as u32).find(|v| *v >= bond_sum)?;
    let free = v - bond_sum;
    if aromatic {
        Some(free.saturating_sub(1) as u8)
    } else {
        Some(free as u8)
    }
}

fn derive_hydrogens(
    i: usize,
    atom: &Atom,
    adj: &[Vec<(usize, usize)>],
    bonds: &[Bond],
) -> Result<u8> {
    let bond_sum: u32 = adj[i].iter().map(|(_, b)| bonds[*b].order.valence()).sum();
    if let Some(h) = atom.explicit_h {
        return Ok(h);
    }
    default_hydrogens(atom.element, atom.aromatic, atom.charge, bond_sum).ok_or_else(|| {
        ChemError::Valence {
            atom: i,
            element: atom.element.to_string(),
            valence: bond_sum,
        }
    })
}

/// Removes plain `[H]` atoms bonded to a single heavy atom, moving them into
/// the neighbor's hydrogen count.
fn fold_explicit_hydrogens(mut atoms: Vec<Atom>, bonds: Vec<Bond>) -> (Vec<Atom>, Vec<Bond>) {
    let n = atoms.len();
    let adj = build_adj(n, &bonds);
    let mut remove = vec![false; n];
    for i in 0..n {
        let a = &atoms[i];
        if a.element.is_hydrogen()
            && a.isotope.is_none()
            && a.map.is_none()
            && a.charge == 0
            && a.hydrogens == 0
            && adj[i].len() == 1
        {
            let (nb, b) = adj[i][0];
            if !atoms[nb].element.is_hydrogen()
                && !atoms[nb].is_dummy()
                && bonds[b].order == BondOrder::Single
            {
                remove[i] = true;
            }
        }
    }
    if !remove.iter().any(|x| *x) {
        return (atoms, bonds);
    }
    for b in &bonds {
        if remove[b.a] {
            atoms[b.b].hydrogens += 1;
        } else if remove[b.b] {
            atoms[b.a].hydrogens += 1;
        }
    }
    let mut g = MolGraph {
        atoms,
        bonds,
        stereo_dropped: false,
    };
    for (i, a) in g.atoms.iter_mut().enumerate() {
        if !remove[i] && a.explicit_h.is_some() {
            a.explicit_h = Some(a.hydrogens);
        }
    }
    g.remove_atoms(&remove, false);
    (g.atoms, g.bonds)
}

/// Assigns alternating single/double orders to aromatic bonds.
pub(crate) fn kekulize(
    atoms: &[Atom],
    bonds: &[Bond],
    adj: &[Vec<(usize, usize)>],
) -> Result<Vec<Bond>> {
    let n = atoms.len();
    let mut needs = vec![false; n];
    for i in 0..n {
        let a = &atoms[i];
        if !a.aromatic {
            continue;
        }
        let Some(vals) = a.element.valences(a.charge) else {
            continue;
        };
        let t: u32 = adj[i]
            .iter()
            .map(|(_, b)| bonds[*b].order.valence())
            .sum::<u32>()
            + a.hydrogens as u32;
        let Some(v) = vals.iter().map(|v| *v as u32).find(|v| *v >= t) else {
            return Err(ChemError::Valence {
                atom: i,
                element: a.element.to_string(),
                valence: t,
            });
        };
        needs[i] = v > t;
    }
    let mut mate = vec![usize::MAX; n];
    let todo: Vec<usize> = (0..n).filter(|&i| needs[i]).collect();
    if !todo.is_empty() {
        let cand: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                if !needs[i] {
                    return Vec::new();
                }
                adj[i]
                    .iter()
                    .filter(|(w, b)| needs[*w] && bonds[*b].order == BondOrder::Aromatic)
                    .map(|(w, _)| *w)
                    .collect()
            })
            .collect();
        let mut budget = 200_000usize;
        if !match_all(&todo, &cand, &mut mate, &mut budget) {
            return Err(ChemError::Kekulization(
                "aromatic system admits no alternating single/double assignment".into(),
            ));
        }
    }
    let mut out = bonds.to_vec();
    for b in out.iter_mut() {
        if b.order == BondOrder::Aromatic {
            b.order = if mate[b.a] == b.b {
                BondOrder::Double
            } else {
                BondOrder::Single
            };
        }
    }
    Ok(out)
}

/// Perfect matching of `todo` atoms by backtracking, most constrained first.
fn match_all(todo: &[usize], cand: &[Vec<usize>], mate: &mut [usize], budget: &mut usize) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let mut best: Option<(usize, usize)> = None;
    for &i in todo {
        if mate[i] != usize::MAX {
            continue;
        }
        let free = cand[i].iter().filter(|w| mate[**w] == usize::MAX).count();
        if free == 0 {
            return false;
        }
        if best.is_none_or(|(_, f)| free < f) {
            best = Some((i, free));
        }
    }
    let Some((i, _)) = best else { return true };
    for &w in &cand[i] {
        if mate[w] != usize::MAX {
            continue;
        }
        mate[i] = w;
        mate[w] = i;
        if match_all(todo, cand, mate, budget) {
            return true;
        }
        mate[i] = usize::MAX;
        mate[w] = usize::MAX;
    }
    false
}

fn check_valences(atoms: &[Atom], bonds: &[Bond], adj: &[Vec<(usize, usize)>]) -> Result<()> {
    for (i, a) in atoms.iter().enumerate() {
        let Some(vals) = a.element.valences(a.charge) else {
            continue;
        };
        let t: u32 = adj[i]
            .iter()
            .map(|(_, b)| bonds[*b].order.valence())
            .sum::<u32>()
            + a.hydrogens as u32;
        let max = *vals.iter().max().unwrap() as u32;
        if t > max {
            return Err(ChemError::Valence {
                atom: i,
                element: a.element.to_string(),
                valence: t,
            });
        }
    }
    Ok(())
}

/// π-electron contribution of a ring atom in a kekulé structure, or `None`
/// when the atom cannot take part in an aromatic ring.
fn pi_electrons(i: usize, atoms: &[Atom], bonds: &[Bond], adj: &[Vec<(usize, usize)>], in_ring: &[bool]) -> Option<u32> {
    let a = &atoms[i];
    let e = a.element;
    if !(e == Element::C || e == Element::N || e == Element::O || e == Element::S) {
        return None;
    }
    let mut doubles = Vec::new();
    for &(w, b) in &adj[i] {
        match bonds[b].order {
            BondOrder::Double => doubles.push((w, b)),
            BondOrder::Triple => return None,
            _ => {}
        }
    }
    let coord = adj[i].len() + a.hydrogens as usize;
    match doubles.as_slice() {
        [] => {
            let lone_pair = match (e, a.charge) {
                (Element::N, 0) => coord == 3,
                (Element::O, 0) | (Element::S, 0) => coord == 2,
                (Element::N, -1) => coord == 2,
                (Element::C, -1) => coord == 3,
                _ => false,
            };
            if lone_pair {
                Some(2)
            } else if e == Element::C && a.charge == 1 && coord == 3 {
                Some(0)
            } else {
                None
            }
        }
        [(w, b)] => {
            if in_ring[*b] {
                Some(1)
            } else {
                let partner = atoms[*w].element;
                let electronegative =
                    partner == Element::O || partner == Element::N || partner == Element::S;
                (e == Element::C && electronegative).then_some(0)
            }
        }
        _ => None,
    }
}

fn huckel_atoms(
    atoms: &[Atom],
    bonds: &[Bond],
    adj: &[Vec<(usize, usize)>],
    in_ring: &[bool],
    rings: &[Vec<usize>],
) -> Vec<usize> {
    let n = atoms.len();
    let pi: Vec<Option<u32>> = (0..n)
        .map(|i| {
            if adj[i].iter().any(|(_, b)| in_ring[*b]) {
                pi_electrons(i, atoms, bonds, adj, in_ring)
            } else {
                None
            }
        })
        .collect();
    let ok = |set: &[usize]| -> bool {
        let mut sum = 0;
        for &a in set {
            match pi[a] {
                Some(e) => sum += e,
                None => return false,
            }
        }
        sum % 4 == 2
    };
    let mut out = vec![false; n];
    let mut ring_arom = vec![false; rings.len()];
    for (k, r) in rings.iter().enumerate() {
        if ok(r) {
            ring_arom[k] = true;
            for &a in r {
                out[a] = true;
            }
        }
    }
    // Fused pairs (e.g. azulene) where neither ring qualifies alone.
    for i in 0..rings.len() {
        for j in (i + 1)..rings.len() {
            if ring_arom[i] && ring_arom[j] {
                continue;
            }
            let shared = rings[i].iter().filter(|a| rings[j].contains(a)).count();
            if shared < 2 {
                continue;
            }
            let mut union: Vec<usize> = rings[i].clone();
            for &a in &rings[j] {
                if !union.contains(&a) {
                    union.push(a);
                }
            }
            if ok(&union) {
                for &a in &union {
                    out[a] = true;
                }
            }
        }
    }
    (0..n).filter(|&i| out[i]).collect()
}
