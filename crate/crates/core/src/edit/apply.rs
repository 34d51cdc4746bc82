use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EditAction, EditScript};
use crate::chem::{canonical_smiles, BondOrder, Molecule};
use crate::error::{ChemError, Result};
use crate::pattern::{find_embeddings, Match, Pattern};
use crate::smiles::atom_numbering;

/// Upper bound on symmetry products carried through a script.
const MAX_PRODUCTS: usize = 64;

/// Result of executing a script.
#[derive(Debug, Clone)]
pub struct EditOutcome {
    /// Distinct products (by canonical form); the first follows the
    /// lexicographically first embedding at every step.
    pub products: Vec<Molecule>,
    /// Matched atom indices per action, in the molecule the action saw.
    pub applied_sites: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl EditOutcome {
    pub fn primary(&self) -> &Molecule {
        &self.products[0]
    }

    pub fn canonical_products(&self) -> Vec<String> {
        self.products.iter().map(canonical_smiles).collect()
    }

    pub fn contains(&self, mol: &Molecule) -> bool {
        let c = canonical_smiles(mol);
        self.products.iter().any(|p| canonical_smiles(p) == c)
    }
}

/// A molecule under edit, with each atom's number in the original source.
#[derive(Debug, Clone)]
pub(crate) struct Working {
    pub mol: Molecule,
    pub origin: Vec<Option<u32>>,
}

impl Working {
    pub fn new(mol: &Molecule) -> Working {
        Working {
            origin: atom_numbering(mol),
            mol: mol.clone(),
        }
    }
}

/// One place where a group occurs: the matched atoms, the atoms standing in
/// for its dummies, and one embedding per distinct dummy assignment.
#[derive(Debug, Clone)]
pub(crate) struct Site {
    pub matched: Vec<usize>,
    pub context: Vec<usize>,
    pub anchor_adjacent: Vec<usize>,
    pub embeddings: Vec<Match>,
}

impl Site {
    /// Source numbers of the context atoms, in dummy map order of the first embedding.
    pub fn context_numbers(&self, w: &Working, pat: &Pattern) -> Vec<Option<u32>> {
        pat.anchors()
            .iter()
            .map(|&(_, q)| w.origin[self.embeddings[0].atoms[q]])
            .collect()
    }

    fn accepts(&self, w: &Working, numbers: &[u32]) -> bool {
        numbers.iter().all(|&n| {
            self.context
                .iter()
                .chain(&self.anchor_adjacent)
                .any(|&i| w.origin[i] == Some(n))
        })
    }
}

fn assignment(pat: &Pattern, m: &Match) -> Vec<usize> {
    pat.anchors().iter().map(|&(_, q)| m.atoms[q]).collect()
}

/// Occurrences of `pat` whose real atoms have no neighbors outside the group
/// other than through its dummies.
pub(crate) fn locate_sites(w: &Working, pat: &Pattern) -> Vec<Site> {
    let mut sites: Vec<Site> = Vec::new();
    let mut seen_assign: Vec<HashSet<Vec<usize>>> = Vec::new();
    for m in find_embeddings(&w.mol, pat) {
        let closed = pat
            .atoms
            .iter()
            .enumerate()
            .all(|(q, a)| a.is_wildcard() || w.mol.degree(m.atoms[q]) == pat.neighbors(q).len());
        if !closed {
            continue;
        }
        let mut matched = Vec::new();
        let mut context = Vec::new();
        let mut adjacent = Vec::new();
        for (q, a) in pat.atoms.iter().enumerate() {
            if a.is_wildcard() {
                context.push(m.atoms[q]);
                adjacent.push(m.atoms[pat.neighbors(q)[0].0]);
            } else {
                matched.push(m.atoms[q]);
            }
        }
        matched.sort_unstable();
        context.sort_unstable();
        adjacent.sort_unstable();
        adjacent.dedup();
        let assign = assignment(pat, &m);
        match sites.iter().position(|s| s.matched == matched && s.context == context) {
            Some(k) => {
                if seen_assign[k].insert(assign) {
                    sites[k].embeddings.push(m);
                }
            }
            None => {
                seen_assign.push(HashSet::from([assign]));
                sites.push(Site {
                    matched,
                    context,
                    anchor_adjacent: adjacent,
                    embeddings: vec![m],
                });
            }
        }
    }
    sites
}

/// Removes the real atoms of an embedding and bonds the replacement in.
fn graft(w: &Working, pat: &Pattern, m: &Match, rep: &Molecule, kekule: bool) -> Result<Working> {
    let mut g = if kekule { w.mol.kekule_graph()? } else { w.mol.to_graph() };
    let rg = if kekule { rep.kekule_graph()? } else { rep.to_graph() };
    let n0 = g.atoms.len();
    let mut remove = vec![false; n0];
    for (q, a) in pat.atoms.iter().enumerate() {
        if !a.is_wildcard() {
            remove[m.atoms[q]] = true;
        }
    }
    let mut attach: Vec<(u32, usize, BondOrder)> = Vec::new();
    for (map, qd) in pat.anchors() {
        let (c, inner) = (m.atoms[qd], m.atoms[pat.neighbors(qd)[0].0]);
        let b = g.bond_between(c, inner).expect("embedding bonds exist");
        attach.push((map, c, g.bonds[b].order));
    }
    let mut idx = vec![usize::MAX; rg.atoms.len()];
    for (k, a) in rg.atoms.iter().enumerate() {
        if !a.is_dummy() {
            idx[k] = g.add_atom(a.clone());
        }
    }
    for b in &rg.bonds {
        let (da, db) = (rg.atoms[b.a].is_dummy(), rg.atoms[b.b].is_dummy());
        if !da && !db {
            g.add_bond(idx[b.a], idx[b.b], b.order);
            continue;
        }
        let (d, inner) = if da { (b.a, b.b) } else { (b.b, b.a) };
        let &(_, c, old) = attach
            .iter()
            .find(|(map, _, _)| Some(*map) == rg.atoms[d].map)
            .expect("replacement maps equal original maps");
        g.add_bond(c, idx[inner], b.order);
        let atom = &mut g.atoms[c];
        let h = atom.explicit_h.unwrap_or(atom.hydrogens) as i32 + old.valence() as i32
            - b.order.valence() as i32;
        if h < 0 {
            return Err(ChemError::Valence {
                atom: c,
                element: atom.element.to_string(),
                valence: (b.order.valence() as i32 - old.valence() as i32) as u32,
            });
        }
        atom.explicit_h = Some(h as u8);
    }
    remove.resize(g.atoms.len(), false);
    let index = g.remove_atoms(&remove, false);
    let mut origin = vec![None; g.atoms.len()];
    for (old, new) in index.iter().enumerate().take(n0) {
        if let Some(new) = new {
            origin[*new] = w.origin[old];
        }
    }
    Ok(Working {
        mol: g.perceive()?,
        origin,
    })
}

fn site_products(w: &Working, action: &EditAction, site: &Site) -> Result<Vec<Working>> {
    let pat = action.original.pattern();
    let rep = action.replacement.molecule().expect("validated in EditAction::new");
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut first_err = None;
    for m in &site.embeddings {
        // Keep aromatic flags where possible; re-perceive from a Kekulé form
        // when the edit breaks an aromatic ring shared with the context.
        let res = graft(w, pat, m, rep, false).or_else(|e| graft(w, pat, m, rep, true).map_err(|_| e));
        match res {
            Ok(p) => {
                if seen.insert(canonical_smiles(&p.mol)) {
                    out.push(p);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) if out.is_empty() => Err(e),
        _ => Ok(out),
    }
}

/// Products of one action on one molecule.
pub(crate) struct Step {
    pub products: Vec<Working>,
    pub site: Vec<usize>,
    pub warnings: Vec<String>,
}

pub(crate) fn apply_action<R: Rng>(w: &Working, action: &EditAction, rng: &mut R) -> Result<Step> {
    let pat = action.original.pattern();
    let mut sites = locate_sites(w, pat);
    if sites.is_empty() {
        return Err(ChemError::GroupNotFound(format!(
            "{} does not occur in the molecule",
            action.original
        )));
    }
    if let Some(numbers) = &action.attachment_atoms {
        sites.retain(|s| s.accepts(w, numbers));
        if sites.is_empty() {
            return Err(ChemError::GroupNotFound(format!(
                "{} is not connected at atom(s) {:?}",
                action.original, numbers
            )));
        }
    }
    let mut results: Vec<Result<Vec<Working>>> =
        sites.iter().map(|s| site_products(w, action, s)).collect();
    let mut warnings = Vec::new();
    let pick = if sites.len() == 1 {
        0
    } else {
        let sets: Vec<Option<BTreeSet<String>>> = results
            .iter()
            .map(|r| {
                r.as_ref()
                    .ok()
                    .map(|ps| ps.iter().map(|p| canonical_smiles(&p.mol)).collect())
            })
            .collect();
        if sets[0].is_some() && sets.iter().all(|s| *s == sets[0]) {
            0
        } else {
            let k = rng.gen_range(0..sites.len());
            warnings.push(format!(
                "{} matches {} inequivalent sites; picked atoms {:?} with the site seed",
                action.original,
                sites.len(),
                sites[k].matched
            ));
            k
        }
    };
    let products = results.swap_remove(pick)?;
    Ok(Step {
        products,
        site: sites.swap_remove(pick).matched,
        warnings,
    })
}

/// Executes `script` on `mol`. Every symmetry-equivalent product is kept;
/// an ambiguous site is chosen with `site_seed` and reported in `warnings`.
pub fn apply_script(mol: &Molecule, script: &EditScript, site_seed: u64) -> Result<EditOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(site_seed);
    let mut branches = vec![Working::new(mol)];
    let mut applied_sites = Vec::new();
    let mut warnings = Vec::new();
    for (k, action) in script.actions().iter().enumerate() {
        let mut next = Vec::new();
        let mut seen = HashSet::new();
        for (b, w) in branches.iter().enumerate() {
            let step = match apply_action(w, action, &mut rng) {
                Ok(s) => s,
                Err(e) if b == 0 => return Err(e),
                Err(e) => {
                    warnings.push(format!("action {}: alternative product {b} dropped: {e}", k + 1));
                    continue;
                }
            };
            if b == 0 {
                applied_sites.push(step.site);
                warnings.extend(step.warnings);
            }
            for p in step.products {
                if next.len() < MAX_PRODUCTS && seen.insert(canonical_smiles(&p.mol)) {
                    next.push(p);
                }
            }
        }
        branches = next;
    }
    Ok(EditOutcome {
        products: branches.into_iter().map(|w| w.mol).collect(),
        applied_sites,
        warnings,
    })
}
