//! Canonical atom ranking and canonical SMILES.
//!
//! Ranks come from iterative invariant refinement; remaining ties are broken
//! by individualizing each member of the first tied class and keeping the
//! lexicographically smallest output string.

use super::mol::Molecule;
use crate::smiles::write::{write_ranked, SmilesDialect, WriteOptions};

/// Leaves explored before tie-breaking falls back to the first candidate.
const LEAF_BUDGET: usize = 96;

/// Deterministic, order-independent SMILES for a perceived molecule. Atom maps
/// and isotopes are part of the identity.
pub fn canonical_smiles(mol: &Molecule) -> String {
    canonical_with(mol, SmilesDialect::default())
}

pub(crate) fn canonical_with(mol: &Molecule, dialect: SmilesDialect) -> String {
    if mol.is_empty() {
        return String::new();
    }
    let opts = WriteOptions {
        dialect,
        bracket_all: false,
        sort_fragments: true,
    };
    let ranks = canonical_ranks_with(mol, dialect.include_maps, opts);
    write_ranked(mol, &ranks, opts)
        .map(|(s, _)| s)
        .unwrap_or_default()
}

/// Canonical ranking (a permutation of `0..n`).
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let opts = WriteOptions {
        dialect: SmilesDialect::default(),
        bracket_all: false,
        sort_fragments: true,
    };
    canonical_ranks_with(mol, true, opts)
}

fn canonical_ranks_with(mol: &Molecule, use_maps: bool, opts: WriteOptions) -> Vec<usize> {
    let n = mol.atom_count();
    let init: Vec<_> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            (
                a.element.atomic_number(),
                a.aromatic,
                a.isotope.unwrap_or(0),
                a.charge,
                a.hydrogens,
                mol.degree(i),
                mol.atom_in_ring(i),
                if use_maps { a.map.unwrap_or(0) } else { 0 },
            )
        })
        .collect();
    let ranks = dense_rank(&init);
    let ranks = refine(mol, ranks);
    let mut best: Option<(String, Vec<usize>)> = None;
    let mut budget = LEAF_BUDGET;
    search(mol, ranks, opts, &mut best, &mut budget);
    best.map(|(_, r)| r).unwrap_or_else(|| (0..n).collect())
}

fn dense_rank<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|a, b| keys[*a].cmp(&keys[*b]));
    let mut ranks = vec![0; keys.len()];
    let mut r = 0;
    for k in 0..idx.len() {
        if k > 0 && keys[idx[k]] != keys[idx[k - 1]] {
            r += 1;
        }
        ranks[idx[k]] = r;
    }
    ranks
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().max().map_or(0, |m| m + 1)
}

fn refine(mol: &Molecule, mut ranks: Vec<usize>) -> Vec<usize> {
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut nb: Vec<(usize, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|(w, b)| (ranks[*w], mol.bond(*b).order.code()))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = dense_rank(&keys);
        if class_count(&next) == class_count(&ranks) {
            return next;
        }
        ranks = next;
    }
}

fn search(
    mol: &Molecule,
    ranks: Vec<usize>,
    opts: WriteOptions,
    best: &mut Option<(String, Vec<usize>)>,
    budget: &mut usize,
) {
    let n = ranks.len();
    if class_count(&ranks) == n {
        *budget = budget.saturating_sub(1);
        if let Ok((s, _)) = write_ranked(mol, &ranks, opts) {
            if best.as_ref().is_none_or(|(b, _)| s < *b) {
                *best = Some((s, ranks));
            }
        }
        return;
    }
    // First (lowest-ranked) tied class.
    let mut counts = vec![0usize; n];
    for &r in &ranks {
        counts[r] += 1;
    }
    let target = (0..n).find(|&r| counts[r] > 1).unwrap();
    let members: Vec<usize> = (0..n).filter(|&i| ranks[i] == target).collect();
    for (k, &c) in members.iter().enumerate() {
        if k > 0 && *budget == 0 {
            break;
        }
        let keys: Vec<(usize, u8)> = (0..n)
            .map(|i| (ranks[i], if i == c { 0 } else { 1 }))
            .collect();
        let split = refine(mol, dense_rank(&keys));
        search(mol, split, opts, best, budget);
    }
}
