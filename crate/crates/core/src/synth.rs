//! Synthetic edit samples: iterative moiety replacement over fixed pools of
//! substituents and linkers, with prompt and code-snippet rendering.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chem::{canonical_smiles, Molecule};
use crate::edit::{apply_action, emit_rdkit_snippet, locate_sites, EditAction, EditScript, Fragment, Working};
use crate::error::Result;
use crate::par::{map_indexed, Exec};
use crate::smiles::{number_atoms, parse_smiles};

/// Substituents, one attachment point: (name, fragment).
pub const SUBSTITUENTS: [(&str, &str); 25] = [
    ("Fluoro", "[*:1]F"),
    ("Chloro", "[*:1]Cl"),
    ("Bromo", "[*:1]Br"),
    ("Iodo", "[*:1]I"),
    ("Methyl", "[*:1]C"),
    ("Ethyl", "[*:1]CC"),
    ("Isopropyl", "[*:1]C(C)C"),
    ("tert-Butyl", "[*:1]C(C)(C)C"),
    ("Phenyl", "[*:1]c1ccccc1"),
    ("p-Tolyl", "[*:1]c1ccc(cc1)C"),
    ("p-Chlorophenyl", "[*:1]c1ccc(cc1)Cl"),
    ("Hydroxyl", "[*:1]O"),
    ("Methoxy", "[*:1]OC"),
    ("Ethoxy", "[*:1]OCC"),
    ("Carboxyl", "[*:1]C(=O)O"),
    ("Aldehyde", "[*:1]C=O"),
    ("Ketone", "[*:1]C(=O)C"),
    ("Amino", "[*:1]N"),
    ("Methylamino", "[*:1]NC"),
    ("Dimethylamino", "[*:1]N(C)C"),
    ("Cyano", "[*:1]C#N"),
    ("Nitro", "[*:1][N+](=O)[O-]"),
    ("Thiol", "[*:1]S"),
    ("Methylthio", "[*:1]SC"),
    ("Sulfonyl", "[*:1]S(=O)(=O)C"),
];

/// Linkers, two attachment points: (name, fragment).
pub const LINKERS: [(&str, &str); 20] = [
    ("Meta-phenylene", "[*:1]c1cc([*:2])ccc1"),
    ("Para-phenylene", "[*:1]c1ccc([*:2])cc1"),
    ("Ortho-phenylene", "[*:1]c1c([*:2])cccc1"),
    ("Amide", "[*:1][C;!R](=O)[N;!R][*:2]"),
    ("Reverse amide", "[*:1][N;!R][C;!R](=O)[*:2]"),
    ("Ester", "[*:1][C;!R](=O)[O;!R][*:2]"),
    ("Ketone bridge", "[*:1][C;!R](=O)[*:2]"),
    ("Urea", "[*:1][N;!R][C;!R](=O)[N;!R][*:2]"),
    ("Carbamate", "[*:1][O;!R][C;!R](=O)[N;!R][*:2]"),
    ("Sulfonamide", "[*:1]S(=O)(=O)[N;!R][*:2]"),
    ("Methylene", "[*:1][C;!R][*:2]"),
    ("Ethylene", "[*:1][C;!R][C;!R][*:2]"),
    ("Ether", "[*:1][O;!R][*:2]"),
    ("Thioether", "[*:1][S;!R][*:2]"),
    ("Secondary amine", "[*:1][N;!R][*:2]"),
    ("1,2,3-Triazole", "[*:1]c1nnn([*:2])c1"),
    ("Imidazole-type", "[*:1]c1[nH]cc([*:2])n1"),
    ("Piperazine", "[*:1]N1CCN([*:2])CC1"),
    ("Piperidine", "[*:1]N1CCC([*:2])CC1"),
    ("PEG unit", "[*:1][O;!R][C;!R][C;!R][O;!R][*:2]"),
];

/// Fragments grouped by attachment-point count.
#[derive(Debug, Clone)]
pub struct PatternPool {
    by_arity: BTreeMap<usize, Vec<Fragment>>,
}

impl PatternPool {
    pub fn new(fragments: Vec<Fragment>) -> Result<PatternPool> {
        let mut by_arity: BTreeMap<usize, Vec<Fragment>> = BTreeMap::new();
        let mut seen = std::collections::HashSet::new();
        for f in fragments {
            let key = match f.molecule() {
                Some(m) => canonical_smiles(m),
                None => f.text().to_string(),
            };
            if seen.insert(key) {
                by_arity.entry(f.arity()).or_default().push(f);
            }
        }
        Ok(PatternPool { by_arity })
    }

    pub fn arity(&self, i: usize) -> &[Fragment] {
        self.by_arity.get(&i).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Every fragment, lowest arity first.
    pub fn all(&self) -> Vec<&Fragment> {
        self.by_arity.values().flatten().collect()
    }

    pub fn len(&self) -> usize {
        self.by_arity.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The 25 substituents and 20 linkers.
pub fn builtin_pools() -> PatternPool {
    let frags = SUBSTITUENTS
        .iter()
        .chain(LINKERS.iter())
        .map(|(name, s)| Fragment::parse(s).unwrap_or_else(|e| panic!("builtin {name}: {e}")))
        .collect();
    PatternPool::new(frags).expect("builtin pools are valid")
}

/// One recorded replacement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditRecord {
    pub pattern: String,
    /// Matched atom indices in the molecule as it was before this edit.
    pub site: Vec<usize>,
    pub attachment_atoms: Vec<u32>,
    pub replacement: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthSample {
    pub source: String,
    pub numbered_source: String,
    pub edits: Vec<EditRecord>,
    pub script: EditScript,
    pub target: String,
    pub prompt: String,
    pub rdkit_snippet: String,
}

/// Attachment numbers for a site: source numbers of the context atoms, or
/// of the group atoms next to them when the context atoms are new.
fn site_numbers(w: &Working, site: &crate::edit::Site, frag: &Fragment) -> Option<Vec<u32>> {
    let ctx: Vec<u32> = site.context_numbers(w, frag.pattern()).into_iter().flatten().collect();
    if !ctx.is_empty() {
        return Some(ctx);
    }
    let adj: Vec<u32> = site.anchor_adjacent.iter().filter_map(|&i| w.origin[i]).collect();
    (!adj.is_empty()).then_some(adj)
}

/// Runs `iterations` rounds of moiety replacement on `mol` (drawn uniformly
/// from 1..=3 when `None`). Returns `None` when no pattern applies at all.
pub fn generate_sample(
    mol: &Molecule,
    pool: &PatternPool,
    iterations: Option<usize>,
    seed: u64,
) -> Option<SynthSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_iter = iterations.unwrap_or_else(|| rng.gen_range(1..=3));
    let source = canonical_smiles(mol);
    let start = parse_smiles(&source).ok()?;
    let numbered_source = number_atoms(&start.without_maps(false)).ok()?;
    let patterns = pool.all();
    let mut w = Working::new(&start);
    let mut actions = Vec::new();
    let mut edits = Vec::new();
    // ambiguity is rejected below, so site selection never consumes this
    let mut scratch = ChaCha8Rng::seed_from_u64(0);

    for _ in 0..n_iter {
        let mut avail: Vec<usize> = (0..patterns.len()).collect();
        let mut replaced = false;
        while !avail.is_empty() && !replaced {
            let p = patterns[avail.swap_remove(rng.gen_range(0..avail.len()))];
            let mut sites = locate_sites(&w, p.pattern());
            if sites.is_empty() {
                continue;
            }
            sites.shuffle(&mut rng);
            let current = canonical_smiles(&w.mol);
            'sites: for site in &sites {
                let Some(numbers) = site_numbers(&w, site, p) else {
                    continue;
                };
                let mut reps: Vec<&Fragment> = pool.arity(p.arity()).iter().filter(|r| *r != p).collect();
                reps.shuffle(&mut rng);
                for r in reps {
                    let Ok(action) = EditAction::new(p.clone(), Some(numbers.clone()), r.clone()) else {
                        continue;
                    };
                    let Ok(step) = apply_action(&w, &action, &mut scratch) else {
                        continue;
                    };
                    if !step.warnings.is_empty() {
                        continue;
                    }
                    let next = step.products.into_iter().next().expect("non-empty products");
                    if canonical_smiles(&next.mol) == current {
                        continue;
                    }
                    edits.push(EditRecord {
                        pattern: p.text().to_string(),
                        site: step.site,
                        attachment_atoms: numbers.clone(),
                        replacement: r.text().to_string(),
                    });
                    actions.push(action);
                    w = next;
                    replaced = true;
                    break 'sites;
                }
            }
        }
        if !replaced {
            break;
        }
    }
    if actions.is_empty() {
        return None;
    }
    let script = EditScript::new(actions).ok()?;
    let mut sample = SynthSample {
        source,
        numbered_source,
        edits,
        rdkit_snippet: emit_rdkit_snippet(&start, &script),
        script,
        target: canonical_smiles(&w.mol),
        prompt: String::new(),
    };
    sample.prompt = render_prompt(&sample);
    Some(sample)
}

/// Samples for a batch of molecules; molecule `i` uses seed `seed + i`.
pub fn generate_corpus(
    mols: &[Molecule],
    pool: &PatternPool,
    iterations: Option<usize>,
    seed: u64,
    exec: Exec,
) -> Vec<Option<SynthSample>> {
    map_indexed(mols, exec, |i, m| {
        generate_sample(m, pool, iterations, seed.wrapping_add(i as u64))
    })
}

/// Default instruction template. `{source}` is the atom-numbered source and
/// `{edits}` one numbered action line per edit.
pub const DEFAULT_PROMPT_TEMPLATE: &str = "\
Source molecule, heavy atoms numbered through atom maps:
{source}

In each fragment, [*:n] is an attachment point. The same n ties it to the
matching dummy of the replacement.

Apply these edits in order:
{edits}

Write Python that performs the edits with RDKit reaction objects and prints
the final molecule as one SMILES string. Answer with a single fenced code block.
";

/// Instruction prompt for a sample, using [`DEFAULT_PROMPT_TEMPLATE`].
pub fn render_prompt(sample: &SynthSample) -> String {
    render_prompt_with(sample, DEFAULT_PROMPT_TEMPLATE)
}

/// Fills `{source}` and `{edits}` in `template`.
pub fn render_prompt_with(sample: &SynthSample, template: &str) -> String {
    let edits: Vec<String> = sample
        .script
        .actions()
        .iter()
        .enumerate()
        .map(|(i, a)| format!("{}. {a}", i + 1))
        .collect();
    template
        .replace("{source}", &sample.numbered_source)
        .replace("{edits}", &edits.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::{apply_script, parse_action};

    #[test]
    fn pool_contents() {
        let pool = builtin_pools();
        assert_eq!(pool.arity(1).len(), 25);
        assert_eq!(pool.arity(2).len(), 20);
        assert!(pool.arity(1).iter().any(|f| f.text() == "[*:1]C#N"));
        assert!(pool.arity(2).iter().any(|f| f.text() == "[*:1]N1CCN([*:2])CC1"));
        for f in pool.all() {
            assert!(f.molecule().is_some(), "{}", f.text());
        }
    }

    #[test]
    fn samples_reexecute() {
        let pool = builtin_pools();
        for (k, smi) in ["CC(=O)Nc1ccc(O)cc1", "COc1ccc(CN2CCNCC2)cc1Cl", "O=C(O)c1ccccc1Br", "CCOC(=O)c1cnn(C)c1"]
            .iter()
            .enumerate()
        {
            let mol = parse_smiles(smi).unwrap();
            for seed in 0..8 {
                let s = generate_sample(&mol, &pool, None, seed * 31 + k as u64).unwrap();
                let src = parse_smiles(&s.source).unwrap();
                for site_seed in [0, 99] {
                    let out = apply_script(&src, &s.script, site_seed).unwrap();
                    assert_eq!(canonical_smiles(out.primary()), s.target, "{smi} seed {seed}");
                }
                for e in &s.edits {
                    let p = Fragment::parse(&e.pattern).unwrap();
                    let r = Fragment::parse(&e.replacement).unwrap();
                    assert_ne!(p, r);
                    assert_eq!(p.arity(), r.arity());
                }
                assert_eq!(s.edits.len(), s.script.actions().len());
            }
        }
    }

    #[test]
    fn deterministic() {
        let pool = builtin_pools();
        let mol = parse_smiles("Cc1ccc(F)cc1OC").unwrap();
        let a = generate_sample(&mol, &pool, Some(3), 5).unwrap();
        let b = generate_sample(&mol, &pool, Some(3), 5).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn no_match_gives_none() {
        assert!(generate_sample(&parse_smiles("[Na+]").unwrap(), &builtin_pools(), Some(1), 0).is_none());
    }

    #[test]
    fn prompt_shape() {
        let mol = parse_smiles("Clc1ccccc1").unwrap();
        let s = generate_sample(&mol, &builtin_pools(), Some(2), 1).unwrap();
        assert!(s.prompt.contains(&s.numbered_source));
        let lines: Vec<&str> = s.prompt.lines().filter(|l| l.starts_with(char::is_numeric)).collect();
        assert_eq!(lines.len(), s.edits.len());
        // each rendered instruction parses back to its action
        for (line, a) in lines.iter().zip(s.script.actions()) {
            assert_eq!(&parse_action(line.split_once(". ").unwrap().1).unwrap(), a);
        }
        let custom = render_prompt_with(&s, "{source}|{edits}");
        assert!(custom.starts_with(&format!("{}|1. replace ", s.numbered_source)));
    }

    #[test]
    fn corpus_modes_agree() {
        let mols: Vec<Molecule> = ["CCO", "Cc1ccccc1", "NC(=O)c1ccccc1", "CCCl"]
            .iter()
            .map(|s| parse_smiles(s).unwrap())
            .collect();
        let pool = builtin_pools();
        let a = generate_corpus(&mols, &pool, None, 42, Exec::Sequential);
        let b = generate_corpus(&mols, &pool, None, 42, Exec::Parallel { threads: 0 });
        assert_eq!(a, b);
    }
}
