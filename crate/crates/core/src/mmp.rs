//! Matched molecular pairs: bond cutting, pair indexing, edit-type
//! classification, Murcko scaffolds and atom-mapped reaction diffs.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::chem::{canonical_smiles, Atom, BondOrder, MolGraph, Molecule};
use crate::edit::{EditAction, Fragment};
use crate::error::{ChemError, Result};
use crate::smiles::parse_smiles;

/// One way of cutting a molecule. For a single cut `core` is the larger
/// piece; for a double cut it is the piece between the two cut bonds.
#[derive(Debug, Clone)]
pub struct CutResult {
    pub core: Fragment,
    pub side_fragments: Vec<Fragment>,
    /// Cut bonds as atom index pairs (lower first); bond `k` carries dummy map `k + 1`.
    pub cut_bonds: Vec<(usize, usize)>,
}

fn real_heavy(mol: &Molecule) -> usize {
    mol.atoms()
        .iter()
        .filter(|a| !a.is_dummy() && !a.element.is_hydrogen())
        .count()
}

/// Acyclic single bonds between real heavy atoms, sorted by endpoints.
fn cuttable_bonds(mol: &Molecule) -> Vec<(usize, usize, usize)> {
    let mut v: Vec<(usize, usize, usize)> = mol
        .bonds()
        .iter()
        .enumerate()
        .filter(|(k, b)| {
            let ok = |i: usize| !mol.atom(i).is_dummy() && !mol.atom(i).element.is_hydrogen();
            !mol.bond_in_ring(*k) && b.order == BondOrder::Single && ok(b.a) && ok(b.b)
        })
        .map(|(k, b)| (b.a.min(b.b), b.a.max(b.b), k))
        .collect();
    v.sort_unstable();
    v
}

/// Component label of every atom once the `cut` bonds are removed.
fn split(mol: &Molecule, cut: &[usize]) -> Vec<usize> {
    let n = mol.atom_count();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, b) in mol.neighbors(u) {
                if label[v] == usize::MAX && !cut.contains(&b) {
                    label[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// The atoms `atoms` of `mol` as a molecule, with a dummy `[*:map]` bonded
/// to each listed inside atom. Maps on real atoms are dropped.
fn piece(mol: &Molecule, atoms: &[usize], stubs: &[(usize, u32, BondOrder)]) -> Result<Molecule> {
    let mut g = mol.subgraph(atoms);
    for a in g.atoms.iter_mut().filter(|a| !a.is_dummy()) {
        a.map = None;
    }
    for &(inside, map, order) in stubs {
        let k = atoms.iter().position(|&i| i == inside).expect("stub atom inside piece");
        let d = g.add_atom(Atom::dummy(Some(map)));
        g.add_bond(k, d, order);
    }
    g.perceive()
}

fn atoms_with(label: &[usize], l: usize) -> Vec<usize> {
    (0..label.len()).filter(|&i| label[i] == l).collect()
}

/// Every single cut and, with `max_cuts >= 2`, every pair of cuts.
pub fn fragment_mol(mol: &Molecule, max_cuts: usize) -> Vec<CutResult> {
    let bonds = cuttable_bonds(mol);
    let mut out = Vec::new();
    for &(u, v, b) in &bonds {
        let label = split(mol, &[b]);
        let (Ok(pu), Ok(pv)) = (
            piece(mol, &atoms_with(&label, label[u]), &[(u, 1, BondOrder::Single)]),
            piece(mol, &atoms_with(&label, label[v]), &[(v, 1, BondOrder::Single)]),
        ) else {
            continue;
        };
        let (Ok(fu), Ok(fv)) = (Fragment::from_molecule(&pu), Fragment::from_molecule(&pv)) else {
            continue;
        };
        let u_is_core = match real_heavy(&pu).cmp(&real_heavy(&pv)) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => fu.text() <= fv.text(),
        };
        let (core, side) = if u_is_core { (fu, fv) } else { (fv, fu) };
        out.push(CutResult {
            core,
            side_fragments: vec![side],
            cut_bonds: vec![(u, v)],
        });
    }
    if max_cuts < 2 {
        return out;
    }
    for (x, &(u1, v1, b1)) in bonds.iter().enumerate() {
        for &(u2, v2, b2) in &bonds[x + 1..] {
            let label = split(mol, &[b1, b2]);
            // the middle piece holds one endpoint of each cut bond
            let middle = [label[u1], label[v1]]
                .into_iter()
                .find(|&l| l == label[u2] || l == label[v2])
                .expect("two bridges leave a middle piece");
            let (m1, o1) = if label[u1] == middle { (u1, v1) } else { (v1, u1) };
            let (m2, o2) = if label[u2] == middle { (u2, v2) } else { (v2, u2) };
            let single = BondOrder::Single;
            let parts = (
                piece(mol, &atoms_with(&label, middle), &[(m1, 1, single), (m2, 2, single)]),
                piece(mol, &atoms_with(&label, label[o1]), &[(o1, 1, single)]),
                piece(mol, &atoms_with(&label, label[o2]), &[(o2, 2, single)]),
            );
            let (Ok(c), Ok(s1), Ok(s2)) = parts else {
                continue;
            };
            let frags = (
                Fragment::from_molecule(&c),
                Fragment::from_molecule(&s1),
                Fragment::from_molecule(&s2),
            );
            if let (Ok(core), Ok(s1), Ok(s2)) = frags {
                out.push(CutResult {
                    core,
                    side_fragments: vec![s1, s2],
                    cut_bonds: vec![(u1, v1), (u2, v2)],
                });
            }
        }
    }
    out
}

/// Joins fragments on matching dummy maps, each map used by exactly two dummies.
pub fn join_fragments(parts: &[&Molecule]) -> Result<Molecule> {
    let mut g = MolGraph::new();
    let mut stubs: BTreeMap<u32, Vec<(usize, usize, BondOrder)>> = BTreeMap::new();
    for m in parts {
        let base = g.atoms.len();
        for a in m.to_graph().atoms {
            g.add_atom(a);
        }
        for b in m.bonds() {
            g.add_bond(base + b.a, base + b.b, b.order);
        }
        for (map, d) in m.dummies() {
            let map = map.ok_or_else(|| ChemError::Fragment("unmapped dummy".into()))?;
            let &(nb, bond) = m
                .neighbors(d)
                .first()
                .ok_or_else(|| ChemError::Fragment("isolated dummy".into()))?;
            stubs.entry(map).or_default().push((base + d, base + nb, m.bond(bond).order));
        }
    }
    let mut remove = vec![false; g.atoms.len()];
    for (map, ends) in stubs {
        let [(d1, n1, o1), (d2, n2, o2)] = ends[..] else {
            return Err(ChemError::Fragment(format!("map {map} is not used by exactly two dummies")));
        };
        if o1 != o2 {
            return Err(ChemError::Fragment(format!("map {map} joins bonds of different order")));
        }
        g.add_bond(n1, n2, o1);
        remove[d1] = true;
        remove[d2] = true;
    }
    g.remove_atoms(&remove, false);
    g.perceive()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Terminal,
    Core,
    Other,
}

/// Two molecules of one group that differ by swapping `frag_a` for `frag_b`
/// on the shared context `core` (dot-separated for multi-cut contexts).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub group_id: String,
    pub mol_a: String,
    pub mol_b: String,
    pub core: String,
    pub frag_a: String,
    pub frag_b: String,
    pub arity: usize,
    pub classification: Classification,
    /// Set for three or more attachment points.
    #[serde(default)]
    pub experimental: bool,
}

fn swap_maps(mol: &Molecule) -> Molecule {
    let mut m = mol.clone();
    for a in m.atoms.iter_mut().filter(|a| a.is_dummy()) {
        a.map = match a.map {
            Some(1) => Some(2),
            Some(2) => Some(1),
            other => other,
        };
    }
    m
}

/// Index key (context) and value (varying piece) for a cut, with dummy
/// labels chosen so that equal contexts produce equal keys.
fn key_value(cut: &CutResult) -> Option<(String, String)> {
    if cut.side_fragments.len() == 1 {
        return Some((cut.core.text().to_string(), cut.side_fragments[0].text().to_string()));
    }
    let core = cut.core.molecule()?;
    let s1 = cut.side_fragments[0].molecule()?;
    let s2 = cut.side_fragments[1].molecule()?;
    let label = |swap: bool| {
        let f = |m: &Molecule| canonical_smiles(&if swap { swap_maps(m) } else { m.clone() });
        let mut ctx = [f(s1), f(s2)];
        ctx.sort();
        (ctx.join("."), f(core))
    };
    Some(label(false).min(label(true)))
}

/// All matched pairs within each group of `(smiles, group_id)` records.
/// Pairs come out group by group, in input order of `mol_a`, then `mol_b`.
pub fn pair_index(records: &[(String, String)]) -> Vec<MatchedPair> {
    let mut groups: Vec<(String, Vec<Molecule>)> = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (smi, gid) in records {
        let Ok(mol) = parse_smiles(smi) else {
            continue;
        };
        if !seen.insert((gid.clone(), canonical_smiles(&mol))) {
            continue;
        }
        match groups.iter_mut().find(|(g, _)| g == gid) {
            Some((_, v)) => v.push(mol),
            None => groups.push((gid.clone(), vec![mol])),
        }
    }
    let mut out = Vec::new();
    for (gid, mols) in &groups {
        let canon: Vec<String> = mols.iter().map(canonical_smiles).collect();
        let mut index: BTreeMap<String, Vec<(usize, String, usize)>> = BTreeMap::new();
        for (mi, m) in mols.iter().enumerate() {
            for cut in fragment_mol(m, 2) {
                if let Some((k, v)) = key_value(&cut) {
                    index.entry(k).or_default().push((mi, v, cut.cut_bonds.len()));
                }
            }
        }
        let mut pairs: BTreeMap<(usize, usize, usize, String), MatchedPair> = BTreeMap::new();
        for (key, vals) in &index {
            for (x, (ma, va, arity)) in vals.iter().enumerate() {
                for (mb, vb, _) in &vals[x + 1..] {
                    if ma == mb || va == vb {
                        continue;
                    }
                    let ((ma, va), (mb, vb)) = if ma < mb { ((ma, va), (mb, vb)) } else { ((mb, vb), (ma, va)) };
                    let slot = (*ma, *mb, *arity, key.clone());
                    if pairs.contains_key(&slot) {
                        continue;
                    }
                    let mut p = MatchedPair {
                        group_id: gid.clone(),
                        mol_a: canon[*ma].clone(),
                        mol_b: canon[*mb].clone(),
                        core: key.clone(),
                        frag_a: va.clone(),
                        frag_b: vb.clone(),
                        arity: *arity,
                        classification: Classification::Other,
                        experimental: *arity >= 3,
                    };
                    p.classification = classify_pair(&p);
                    pairs.insert(slot, p);
                }
            }
        }
        out.extend(pairs.into_values());
    }
    out
}

/// Ring systems plus the atoms linking them; empty for acyclic input.
pub fn murcko_scaffold(mol: &Molecule) -> Molecule {
    let n = mol.atom_count();
    let mut removed = vec![false; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if removed[i] || mol.atom_in_ring(i) {
                continue;
            }
            let live = mol.neighbors(i).iter().filter(|(v, _)| !removed[*v]).count();
            if live <= 1 {
                removed[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let prune = |mut g: MolGraph| {
        g.remove_atoms(&removed, true);
        g.perceive()
    };
    prune(mol.to_graph())
        .or_else(|_| mol.kekule_graph().and_then(prune))
        .unwrap_or_else(|_| MolGraph::new().perceive().expect("empty graph perceives"))
}

fn non_ring_heavy_with_dummies(mol: &Molecule) -> usize {
    (0..mol.atom_count())
        .filter(|&i| !mol.atom(i).element.is_hydrogen() && !mol.atom_in_ring(i))
        .count()
}

fn arity_of(mol: &Molecule) -> usize {
    mol.atoms().iter().filter(|a| a.is_dummy()).count()
}

/// Terminal, core or other replacement, judged from `mol_a`'s side.
///
/// Fragment-to-molecule ratios count the fragment's real atoms only; the
/// non-ring atom limit counts attachment dummies.
pub fn classify_pair(pair: &MatchedPair) -> Classification {
    let parsed = (
        parse_smiles(&pair.mol_a),
        parse_smiles(&pair.frag_a),
        parse_smiles(&pair.frag_b),
    );
    let (Ok(mol_a), Ok(fa), Ok(fb)) = parsed else {
        return Classification::Other;
    };
    let (ka, kb) = (arity_of(&fa), arity_of(&fb));
    let (ha, hm) = (real_heavy(&fa), real_heavy(&mol_a));
    if ka != kb {
        return Classification::Other;
    }
    if ka >= 2 {
        let scaffold = |m: &Molecule| canonical_smiles(&murcko_scaffold(m).without_maps(false));
        let core = scaffold(&fa) != scaffold(&fb)
            && !fa.rings().is_empty()
            && !fb.rings().is_empty()
            && non_ring_heavy_with_dummies(&fa) <= 5
            && non_ring_heavy_with_dummies(&fb) <= 5
            && 2 * ha < hm;
        return if core { Classification::Core } else { Classification::Other };
    }
    if ka == 1 && 10 * ha <= 3 * hm {
        return Classification::Terminal;
    }
    Classification::Other
}

/// A reaction whose atoms carry maps tying reactant atoms to product atoms.
#[derive(Debug, Clone)]
pub struct MappedReaction {
    pub reactant: Molecule,
    pub product: Molecule,
}

fn check_unique_maps(mol: &Molecule, side: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for a in mol.atoms() {
        if let Some(m) = a.map {
            if !seen.insert(m) {
                return Err(ChemError::ReactionParse(format!("map {m} repeated on the {side} side")));
            }
        }
    }
    Ok(())
}

impl MappedReaction {
    /// Reads `reactants>>products` or `reactants>agents>products`.
    pub fn parse(text: &str) -> Result<MappedReaction> {
        let parts: Vec<&str> = text.trim().split('>').collect();
        let [r, _, p] = parts[..] else {
            return Err(ChemError::ReactionParse(format!("expected 'reactants>>products': {text}")));
        };
        let reactant = parse_smiles(r).map_err(|e| ChemError::ReactionParse(format!("reactants: {e}")))?;
        let product = parse_smiles(p).map_err(|e| ChemError::ReactionParse(format!("products: {e}")))?;
        check_unique_maps(&reactant, "reactant")?;
        check_unique_maps(&product, "product")?;
        Ok(MappedReaction { reactant, product })
    }
}

/// A single-site edit read off a mapped reaction.
#[derive(Debug, Clone)]
pub struct ReactionEdit {
    /// The conserved part, with `[*:1]` where the changed group sits.
    pub core: Fragment,
    pub action: EditAction,
    /// Map number of the core atom carrying the changed group.
    pub anchor_map: u32,
}

fn map_index(mol: &Molecule, atoms: &[usize]) -> HashMap<u32, usize> {
    atoms
        .iter()
        .filter_map(|&i| mol.atom(i).map.map(|m| (m, i)))
        .collect()
}

fn main_component(mol: &Molecule, other: &HashSet<u32>) -> (Vec<usize>, usize) {
    mol.components()
        .into_iter()
        .map(|c| {
            let shared = c
                .iter()
                .filter(|&&i| mol.atom(i).map.is_some_and(|m| other.contains(&m)))
                .count();
            (c, shared)
        })
        .fold((Vec::new(), 0), |best, cur| if cur.1 > best.1 { cur } else { best })
}

fn connected(mol: &Molecule, atoms: &HashSet<usize>) -> bool {
    let Some(&start) = atoms.iter().min() else {
        return false;
    };
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &(v, _) in mol.neighbors(u) {
            if atoms.contains(&v) && seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.len() == atoms.len()
}

/// Bonds from `region` into `core`: (core atom, region atom, order).
fn boundary(mol: &Molecule, region: &HashSet<usize>, core: &HashSet<usize>) -> Vec<(usize, usize, BondOrder)> {
    let mut v: Vec<_> = region
        .iter()
        .flat_map(|&i| {
            mol.neighbors(i)
                .iter()
                .filter(|(c, _)| core.contains(c))
                .map(move |&(c, b)| (c, i, mol.bond(b).order))
        })
        .collect();
    v.sort_unstable();
    v
}

fn sorted(set: &HashSet<usize>) -> Vec<usize> {
    let mut v: Vec<usize> = set.iter().copied().collect();
    v.sort_unstable();
    v
}

/// The edit a mapped reaction performs, when it changes exactly one group
/// hanging off a conserved core; `None` for identity or multi-site changes.
pub fn diff_mapped_reaction(rxn: &MappedReaction) -> Result<Option<ReactionEdit>> {
    let (r, p) = (&rxn.reactant, &rxn.product);
    let all_p: HashSet<u32> = p.atoms().iter().filter_map(|a| a.map).collect();
    let (r_atoms, shared_r) = main_component(r, &all_p);
    if shared_r == 0 {
        return Err(ChemError::UnmappedAtoms("no atom map is shared by reactant and product".into()));
    }
    let rmap = map_index(r, &r_atoms);
    let r_maps: HashSet<u32> = rmap.keys().copied().collect();
    let (p_atoms, _) = main_component(p, &r_maps);
    let pmap = map_index(p, &p_atoms);
    let shared: HashSet<u32> = rmap.keys().filter(|m| pmap.contains_key(m)).copied().collect();

    let env = |mol: &Molecule, i: usize, index: &HashMap<u32, usize>| {
        let mut e: Vec<(u32, BondOrder)> = mol
            .neighbors(i)
            .iter()
            .filter_map(|&(v, b)| {
                let m = mol.atom(v).map?;
                (shared.contains(&m) && index.get(&m) == Some(&v)).then_some((m, mol.bond(b).order))
            })
            .collect();
        e.sort_unstable();
        e
    };
    let conserved: HashSet<u32> = shared
        .iter()
        .copied()
        .filter(|m| {
            let (i, j) = (rmap[m], pmap[m]);
            let (a, b) = (r.atom(i), p.atom(j));
            a.element == b.element
                && a.charge == b.charge
                && a.isotope == b.isotope
                && env(r, i, &rmap) == env(p, j, &pmap)
        })
        .collect();

    // largest connected block of conserved atoms (ties: lowest map)
    let mut best: Vec<u32> = Vec::new();
    let mut visited: HashSet<u32> = HashSet::new();
    let mut ordered: Vec<u32> = conserved.iter().copied().collect();
    ordered.sort_unstable();
    for &m in &ordered {
        if !visited.insert(m) {
            continue;
        }
        let mut comp = vec![m];
        let mut k = 0;
        while k < comp.len() {
            let i = rmap[&comp[k]];
            k += 1;
            for &(v, _) in r.neighbors(i) {
                if let Some(mv) = r.atom(v).map {
                    if conserved.contains(&mv) && rmap.get(&mv) == Some(&v) && visited.insert(mv) {
                        comp.push(mv);
                    }
                }
            }
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    if best.is_empty() {
        return Ok(None);
    }
    let core_r: HashSet<usize> = best.iter().map(|m| rmap[m]).collect();
    let core_p: HashSet<usize> = best.iter().map(|m| pmap[m]).collect();
    let region_r: HashSet<usize> = r_atoms.iter().copied().filter(|i| !core_r.contains(i)).collect();
    let region_p: HashSet<usize> = p_atoms.iter().copied().filter(|i| !core_p.contains(i)).collect();
    if region_r.is_empty() || region_p.is_empty() || !connected(r, &region_r) || !connected(p, &region_p) {
        return Ok(None);
    }
    let (br, bp) = (boundary(r, &region_r, &core_r), boundary(p, &region_p, &core_p));
    let ([(cr, ir, or)], [(cp, ip, op)]) = (&br[..], &bp[..]) else {
        return Ok(None);
    };
    let anchor_map = r.atom(*cr).map.expect("core atoms are mapped");
    if p.atom(*cp).map != Some(anchor_map) {
        return Ok(None);
    }
    let original = piece(r, &sorted(&region_r), &[(*ir, 1, *or)])?;
    let replacement = piece(p, &sorted(&region_p), &[(*ip, 1, *op)])?;
    if canonical_smiles(&original) == canonical_smiles(&replacement) {
        return Ok(None);
    }
    let core = piece(r, &sorted(&core_r), &[(*cr, 1, *or)])?;
    Ok(Some(ReactionEdit {
        core: Fragment::from_molecule(&core)?,
        action: EditAction::new(
            Fragment::from_molecule(&original)?,
            None,
            Fragment::from_molecule(&replacement)?,
        )?,
        anchor_map,
    }))
}
