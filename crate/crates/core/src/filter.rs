//! Compound preprocessing (salt stripping, weight, element and chain rules)
//! and fingerprint-based train/test decontamination.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chem::descriptors::{heavy_atoms, mol_weight};
use crate::chem::{canonical_smiles, Element, Molecule};
use crate::edit::Fragment;
use crate::fingerprint::{ecfp4, tanimoto, Fingerprint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Salt,
    Mw,
    Atoms,
    Chain,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Salt => "salt",
            Rule::Mw => "mw",
            Rule::Atoms => "atoms",
            Rule::Chain => "chain",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub rule: Rule,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub passed: bool,
    pub kept_fragment: String,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub min_mw: f64,
    pub max_mw: f64,
    pub allowed: Vec<Element>,
    /// Longest allowed run of acyclic atoms with heavy degree at most two.
    pub max_chain: usize,
    /// Restrict the chain rule to carbon atoms.
    pub chain_carbon_only: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_mw: 100.0,
            max_mw: 800.0,
            allowed: vec![
                Element::H,
                Element::C,
                Element::N,
                Element::O,
                Element::F,
                Element::CL,
                Element::BR,
                Element::I,
                Element::S,
                Element::P,
                Element::B,
                Element::SE,
            ],
            max_chain: 6,
            chain_carbon_only: false,
        }
    }
}

/// Largest fragment by heavy atoms, then weight, then canonical string.
pub fn largest_fragment(mol: &Molecule) -> Molecule {
    let comps = mol.components();
    if comps.len() <= 1 {
        return mol.clone();
    }
    let pieces: Vec<(Molecule, String)> = comps
        .iter()
        .map(|c| {
            let m = mol.subgraph(c).perceive().expect("component of a valid molecule");
            let s = canonical_smiles(&m);
            (m, s)
        })
        .collect();
    pieces
        .into_iter()
        .min_by(|(a, sa), (b, sb)| {
            heavy_atoms(b)
                .cmp(&heavy_atoms(a))
                .then(mol_weight(b).partial_cmp(&mol_weight(a)).unwrap_or(Ordering::Equal))
                .then(sa.cmp(sb))
        })
        .map(|(m, _)| m)
        .expect("at least one component")
}

pub fn mw_in_range(mw: f64, cfg: &FilterConfig) -> bool {
    mw >= cfg.min_mw && mw <= cfg.max_mw
}

/// Size of the longest unbranched acyclic chain.
pub fn longest_chain(mol: &Molecule, carbon_only: bool) -> usize {
    let n = mol.atom_count();
    let eligible: Vec<bool> = (0..n)
        .map(|i| {
            let e = mol.atom(i).element;
            !e.is_hydrogen()
                && !mol.atom(i).is_dummy()
                && (!carbon_only || e == Element::C)
                && !mol.atom_in_ring(i)
                && mol.heavy_degree(i) <= 2
        })
        .collect();
    // eligible atoms have degree <= 2 among themselves and no cycles, so
    // every connected run is a simple path
    let mut seen = vec![false; n];
    let mut best = 0;
    for s in 0..n {
        if !eligible[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &(v, _) in mol.neighbors(u) {
                if eligible[v] && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        best = best.max(size);
    }
    best
}

pub fn filter_compound(mol: &Molecule, cfg: &FilterConfig) -> FilterReport {
    let kept = largest_fragment(mol);
    let mut failures = Vec::new();
    let mw = mol_weight(&kept);
    if !mw_in_range(mw, cfg) {
        failures.push(Failure {
            rule: Rule::Mw,
            detail: format!("{mw:.2} Da outside [{}, {}]", cfg.min_mw, cfg.max_mw),
        });
    }
    let mut bad: Vec<String> = kept
        .atoms()
        .iter()
        .filter(|a| !a.element.is_hydrogen() && !cfg.allowed.contains(&a.element))
        .map(|a| a.element.to_string())
        .collect();
    bad.sort();
    bad.dedup();
    if !bad.is_empty() {
        failures.push(Failure {
            rule: Rule::Atoms,
            detail: format!("disallowed elements: {}", bad.join(", ")),
        });
    }
    let chain = longest_chain(&kept, cfg.chain_carbon_only);
    if chain > cfg.max_chain {
        failures.push(Failure {
            rule: Rule::Chain,
            detail: format!("unbranched chain of {chain} atoms"),
        });
    }
    FilterReport {
        passed: failures.is_empty(),
        kept_fragment: canonical_smiles(&kept),
        failures,
    }
}

pub const DEFAULT_DECON_THRESHOLD: f64 = 0.6;

/// Highest similarity between either fragment of a pair and any training moiety.
pub fn max_similarity(pair: (&Fragment, &Fragment), train: &[Fingerprint]) -> f64 {
    let fps = [pair.0, pair.1].map(|f| f.molecule().map(ecfp4));
    fps.iter()
        .flatten()
        .flat_map(|a| train.iter().map(move |b| tanimoto(a, b).unwrap_or(0.0)))
        .fold(0.0, f64::max)
}

/// Keeps the test pairs whose fragments all stay below `threshold` against
/// every training moiety.
pub fn decontaminate(
    test_pairs: &[(Fragment, Fragment)],
    train_moieties: &[Fragment],
    threshold: f64,
) -> Vec<(Fragment, Fragment)> {
    let train: Vec<Fingerprint> = train_moieties
        .iter()
        .filter_map(|f| f.molecule().map(ecfp4))
        .collect();
    if train.is_empty() {
        return test_pairs.to_vec();
    }
    test_pairs
        .iter()
        .filter(|(a, b)| max_similarity((a, b), &train) < threshold)
        .cloned()
        .collect()
}
