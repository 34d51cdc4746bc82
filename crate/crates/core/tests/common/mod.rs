//! Helpers shared by the integration test targets: fixture loading and
//! brute-force reference implementations used as oracles.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use moledit::chem::{Atom, BondOrder, MolGraph};
use moledit::{canonical_smiles, parse_smiles, Molecule};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Non-blank, non-comment lines split on tabs.
pub fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').map(|c| c.trim().to_string()).collect())
        .collect()
}

pub fn canon(smiles: &str) -> String {
    canonical_smiles(&parse_smiles(smiles).unwrap_or_else(|e| panic!("{smiles}: {e}")))
}

pub fn smi_molecules(name: &str) -> Vec<(String, Molecule)> {
    rows(&fixture(name))
        .into_iter()
        .map(|r| {
            let m = parse_smiles(&r[0]).unwrap_or_else(|e| panic!("{}: {e}", r[0]));
            (r[0].clone(), m)
        })
        .collect()
}

type Label = (u8, i8, Option<u16>, bool, u8);

fn label(a: &Atom) -> Label {
    (a.element.atomic_number(), a.charge, a.isotope, a.aromatic, a.hydrogens)
}

fn bond_matrix(m: &Molecule) -> Vec<Vec<Option<BondOrder>>> {
    let n = m.atom_count();
    let mut adj = vec![vec![None; n]; n];
    for b in m.bonds() {
        adj[b.a][b.b] = Some(b.order);
        adj[b.b][b.a] = Some(b.order);
    }
    adj
}

/// Exhaustive labelled-graph isomorphism test by backtracking over atom
/// assignments. Meant for small molecules only.
pub fn isomorphic(a: &Molecule, b: &Molecule) -> bool {
    let n = a.atom_count();
    if n != b.atom_count() || a.bonds().len() != b.bonds().len() {
        return false;
    }
    let la: Vec<Label> = a.atoms().iter().map(label).collect();
    let lb: Vec<Label> = b.atoms().iter().map(label).collect();
    let (mut sa, mut sb) = (la.clone(), lb.clone());
    sa.sort();
    sb.sort();
    if sa != sb {
        return false;
    }
    let (ma, mb) = (bond_matrix(a), bond_matrix(b));
    let deg_a: Vec<usize> = (0..n).map(|i| a.degree(i)).collect();
    let deg_b: Vec<usize> = (0..n).map(|i| b.degree(i)).collect();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    type Matrix = Vec<Vec<Option<BondOrder>>>;
    type Ctx = (Vec<Label>, Vec<Label>, Vec<usize>, Vec<usize>, Matrix, Matrix);

    fn extend(
        k: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ctx: &Ctx,
    ) -> bool {
        let (la, lb, da, db, ma, mb) = ctx;
        let n = la.len();
        if k == n {
            return true;
        }
        for cand in 0..n {
            if used[cand] || la[k] != lb[cand] || da[k] != db[cand] {
                continue;
            }
            if (0..k).any(|p| ma[k][p] != mb[cand][map[p]]) {
                continue;
            }
            map[k] = cand;
            used[cand] = true;
            if extend(k + 1, map, used, ctx) {
                return true;
            }
            used[cand] = false;
        }
        map[k] = usize::MAX;
        false
    }
    extend(0, &mut map, &mut used, &(la, lb, deg_a, deg_b, ma, mb))
}

fn real_heavy(m: &Molecule) -> usize {
    m.atoms().iter().filter(|a| !a.is_dummy() && !a.element.is_hydrogen()).count()
}

/// Rebuilds the atoms `keep` of `m` as a new molecule with a dummy
/// `[*:map]` on each listed atom; maps on real atoms are dropped.
fn rebuild(m: &Molecule, keep: &[usize], stubs: &[(usize, u32)]) -> Molecule {
    let mut g = MolGraph::new();
    let mut index = HashMap::new();
    for &i in keep {
        let mut a = m.atom(i).pinned();
        if !a.is_dummy() {
            a.map = None;
        }
        index.insert(i, g.add_atom(a));
    }
    for b in m.bonds() {
        if let (Some(&x), Some(&y)) = (index.get(&b.a), index.get(&b.b)) {
            g.add_bond(x, y, b.order);
        }
    }
    for &(i, map) in stubs {
        let d = g.add_atom(Atom::dummy(Some(map)));
        g.add_bond(index[&i], d, BondOrder::Single);
    }
    g.perceive().expect("piece of a valid molecule")
}

fn component(m: &Molecule, start: usize, cut: &[(usize, usize)]) -> Vec<usize> {
    let is_cut = |u: usize, v: usize| cut.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u));
    let mut seen = vec![false; m.atom_count()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &(v, _) in m.neighbors(u) {
            if !seen[v] && !is_cut(u, v) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    (0..m.atom_count()).filter(|&i| seen[i]).collect()
}

fn relabel(m: &Molecule, swap: bool) -> String {
    if !swap {
        return canonical_smiles(m);
    }
    let mut g = m.to_graph();
    for a in g.atoms.iter_mut() {
        a.map = match a.map {
            Some(1) => Some(2),
            Some(2) => Some(1),
            x => x,
        };
    }
    canonical_smiles(&g.perceive().unwrap())
}

/// Every (context, varying part, arity) obtainable from one molecule by
/// cutting one or two acyclic single bonds between heavy atoms.
pub fn brute_force_cuts(m: &Molecule) -> Vec<(String, String, usize)> {
    let bonds: Vec<(usize, usize)> = m
        .bonds()
        .iter()
        .enumerate()
        .filter(|(k, b)| {
            let heavy = |i: usize| !m.atom(i).is_dummy() && !m.atom(i).element.is_hydrogen();
            b.order == BondOrder::Single && !m.bond_in_ring(*k) && heavy(b.a) && heavy(b.b)
        })
        .map(|(_, b)| (b.a, b.b))
        .collect();
    let mut out = Vec::new();
    for &(u, v) in &bonds {
        let pu = rebuild(m, &component(m, u, &[(u, v)]), &[(u, 1)]);
        let pv = rebuild(m, &component(m, v, &[(u, v)]), &[(v, 1)]);
        let (su, sv) = (canonical_smiles(&pu), canonical_smiles(&pv));
        let u_core = (real_heavy(&pu), std::cmp::Reverse(su.clone())) > (real_heavy(&pv), std::cmp::Reverse(sv.clone()));
        let (core, side) = if u_core { (su, sv) } else { (sv, su) };
        out.push((core, side, 1));
    }
    for x in 0..bonds.len() {
        for y in x + 1..bonds.len() {
            let cut = [bonds[x], bonds[y]];
            let (u1, v1) = bonds[x];
            let (u2, v2) = bonds[y];
            // middle piece: the one reachable from an end of both bonds
            let mut found = None;
            for e1 in [u1, v1] {
                let comp = component(m, e1, &cut);
                if comp.contains(&u2) || comp.contains(&v2) {
                    let e2 = if comp.contains(&u2) { u2 } else { v2 };
                    let o1 = if e1 == u1 { v1 } else { u1 };
                    let o2 = if e2 == u2 { v2 } else { u2 };
                    found = Some((comp, e1, e2, o1, o2));
                }
            }
            let (mid, e1, e2, o1, o2) = found.expect("middle piece");
            let middle = rebuild(m, &mid, &[(e1, 1), (e2, 2)]);
            let s1 = rebuild(m, &component(m, o1, &cut), &[(o1, 1)]);
            let s2 = rebuild(m, &component(m, o2, &cut), &[(o2, 2)]);
            let best = [false, true]
                .into_iter()
                .map(|swap| {
                    let mut ctx = [relabel(&s1, swap), relabel(&s2, swap)];
                    ctx.sort();
                    (ctx.join("."), relabel(&middle, swap))
                })
                .min()
                .unwrap();
            out.push((best.0, best.1, 2));
        }
    }
    out
}

/// (group, mol_a, mol_b, context, frag_a, frag_b, arity) for every matched
/// pair, found by comparing the cut sets of every two molecules in a group.
pub fn brute_force_pairs(records: &[(String, String)]) -> BTreeSet<(String, String, String, String, String, String, usize)> {
    let mut groups: Vec<(String, Vec<String>)> = Vec::new();
    for (smi, g) in records {
        let c = canon(smi);
        match groups.iter_mut().find(|(x, _)| x == g) {
            Some((_, v)) if v.contains(&c) => {}
            Some((_, v)) => v.push(c),
            None => groups.push((g.clone(), vec![c])),
        }
    }
    let mut out = BTreeSet::new();
    for (g, mols) in &groups {
        let cuts: Vec<Vec<(String, String, usize)>> =
            mols.iter().map(|s| brute_force_cuts(&parse_smiles(s).unwrap())).collect();
        for i in 0..mols.len() {
            for j in i + 1..mols.len() {
                for (ka, va, ar) in &cuts[i] {
                    for (kb, vb, br) in &cuts[j] {
                        if ka == kb && ar == br && va != vb {
                            out.insert((g.clone(), mols[i].clone(), mols[j].clone(), ka.clone(), va.clone(), vb.clone(), *ar));
                        }
                    }
                }
            }
        }
    }
    out
}
