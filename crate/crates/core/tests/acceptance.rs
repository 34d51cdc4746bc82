//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero when any criterion fails.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use moledit::chem::descriptors::heavy_atoms;
use moledit::edit::{
    apply_script, emit_rdkit_snippet, emit_reaction_smirks, parse_action, parse_reaction_smirks, EditAction,
    EditScript, Fragment,
};
use moledit::eval::{evaluate, read_predictions, Direction, OptimizationGoal, PredictionRecord};
use moledit::filter::{decontaminate, filter_compound, max_similarity, mw_in_range, FilterConfig, Rule};
use moledit::fingerprint::{ecfp4, tanimoto};
use moledit::mmp::{classify_pair, diff_mapped_reaction, murcko_scaffold, pair_index, Classification, MappedReaction};
use moledit::par::Exec;
use moledit::smiles::random_smiles;
use moledit::synth::{builtin_pools, generate_corpus, SynthSample};
use moledit::{canonical_smiles, parse_smiles, Molecule};

/// Wall-clock budget for generating and re-executing the 1,000-sample corpus.
const CORPUS_BUDGET: Duration = Duration::from_secs(60);
const CORPUS_SEED: u64 = 42;
/// Absolute tolerance for metric arithmetic and frozen similarities.
const TOL: f64 = 1e-9;
const SPELLINGS_PER_MOLECULE: usize = 20;
const ISO_MAX_ATOMS: usize = 12;
const FP_PAIRS: usize = 10_000;
const SHUFFLES_PER_MOLECULE: usize = 100;
const ROUND_TRIP_ACTIONS: usize = 500;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn corpus() -> (Vec<Molecule>, Vec<Option<SynthSample>>, Duration) {
    let mols: Vec<Molecule> = smi_molecules("synth_sources.smi").into_iter().map(|(_, m)| m).collect();
    let start = Instant::now();
    let samples = generate_corpus(&mols, &builtin_pools(), None, CORPUS_SEED, Exec::Parallel { threads: 0 });
    (mols, samples, start.elapsed())
}

fn c1_self_consistency(samples: &[Option<SynthSample>], gen_time: Duration) -> Outcome {
    check(samples.len() == 1000, format!("{} sources, expected 1000", samples.len()))?;
    let start = Instant::now();
    let mut reproduced = 0;
    let mut first_bad = None;
    for (i, s) in samples.iter().enumerate() {
        let Some(s) = s else {
            first_bad.get_or_insert(format!("source {} produced no sample", i + 1));
            continue;
        };
        let src = parse_smiles(&s.source).map_err(|e| e.to_string())?;
        match apply_script(&src, &s.script, CORPUS_SEED) {
            Ok(out) if canonical_smiles(out.primary()) == s.target => reproduced += 1,
            Ok(out) => {
                first_bad.get_or_insert(format!("{}: got {}, recorded {}", s.source, canonical_smiles(out.primary()), s.target));
            }
            Err(e) => {
                first_bad.get_or_insert(format!("{}: {e}", s.source));
            }
        }
    }
    let total = gen_time + start.elapsed();
    check(reproduced == 1000, format!("{reproduced}/1000 reproduced; {}", first_bad.unwrap_or_default()))?;
    check(total < CORPUS_BUDGET, format!("took {:.1}s", total.as_secs_f64()))?;
    Ok(format!("1000/1000 targets reproduced, {:.2}s", total.as_secs_f64()))
}

fn c2_symmetry() -> Outcome {
    let cases = rows(&fixture("symmetric_edits.tsv"));
    check(cases.len() == 20, format!("{} cases", cases.len()))?;
    let mut records = Vec::new();
    for (k, r) in cases.iter().enumerate() {
        let src = parse_smiles(&r[0]).map_err(|e| e.to_string())?;
        let action = parse_action(&r[1]).map_err(|e| format!("case {}: {e}", k + 1))?;
        let out = apply_script(&src, &action.clone().into(), 0).map_err(|e| format!("case {}: {e}", k + 1))?;
        let got: BTreeSet<String> = out.canonical_products().into_iter().collect();
        let want: BTreeSet<String> = r[2].split_whitespace().map(canon).collect();
        check(got == want, format!("case {} ({}): got {got:?}, expected {want:?}", k + 1, r[0]))?;
        for p in r[2].split_whitespace() {
            records.push(PredictionRecord {
                id: format!("{k}-{p}"),
                source: r[0].clone(),
                actions: Some(vec![r[1].clone()]),
                predicted: Some(p.to_string()),
                ground_truths: Some(r[2].split_whitespace().map(String::from).collect()),
            });
        }
    }
    let m = evaluate(&records, None, 0).map_err(|e| e.to_string())?;
    check(
        m.n_exec_correct == records.len() && m.n_consistent == records.len(),
        format!("evaluate scored {}/{} correct", m.n_exec_correct, records.len()),
    )?;
    Ok(format!("20/20 product sets exact; {} permutations scored correct", records.len()))
}

fn c3_parser_robustness() -> Outcome {
    let mols = smi_molecules("parser_molecules.smi");
    check(mols.len() == 500, format!("{} molecules", mols.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut spellings = 0;
    for (smi, m) in &mols {
        let c = canonical_smiles(m);
        let again = canonical_smiles(&parse_smiles(&c).map_err(|e| format!("{c}: {e}"))?);
        check(again == c, format!("{smi}: canonical form {c} is not a fixpoint ({again})"))?;
        for _ in 0..SPELLINGS_PER_MOLECULE {
            let s = random_smiles(m, &mut rng);
            let p = parse_smiles(&s).map_err(|e| format!("{smi} spelled {s}: {e}"))?;
            let w = canonical_smiles(&p);
            let w2 = canonical_smiles(&parse_smiles(&w).map_err(|e| e.to_string())?);
            check(w == c && w2 == c, format!("{smi} spelled {s}: {w} vs {c}"))?;
            spellings += 1;
        }
    }
    let canon_forms: Vec<String> = mols.iter().map(|(_, m)| canonical_smiles(m)).collect();
    let distinct: HashSet<&String> = canon_forms.iter().collect();
    check(distinct.len() == mols.len(), format!("{} canonical forms for 500 molecules", distinct.len()))?;
    let small: Vec<usize> = (0..mols.len()).filter(|&i| mols[i].1.atom_count() <= ISO_MAX_ATOMS).collect();
    let mut compared = 0;
    for (x, &i) in small.iter().enumerate() {
        for &j in &small[x + 1..] {
            let iso = isomorphic(&mols[i].1, &mols[j].1);
            let same = canon_forms[i] == canon_forms[j];
            check(iso == same, format!("{} vs {}: isomorphic={iso}, same canonical={same}", mols[i].0, mols[j].0))?;
            compared += 1;
        }
    }
    Ok(format!(
        "{spellings} spellings at fixpoint; 0 collisions ({compared} brute-force pairs over {} small molecules)",
        small.len()
    ))
}

fn c4_filter_thresholds() -> Outcome {
    let cfg = FilterConfig::default();
    for (mw, pass) in [(100.0, true), (800.0, true), (99.9, false), (800.1, false)] {
        check(mw_in_range(mw, &cfg) == pass, format!("weight {mw}"))?;
    }
    let rules = |smi: &str| -> Result<Vec<Rule>, String> {
        let m = parse_smiles(smi).map_err(|e| e.to_string())?;
        Ok(filter_compound(&m, &cfg).failures.iter().map(|f| f.rule).collect())
    };
    let cases: [(&str, &[Rule]); 9] = [
        ("CCCCCCc1ccccc1", &[]),
        ("CCCCCCCc1ccccc1", &[Rule::Chain]),
        ("CCCCCCC", &[Rule::Chain]),
        ("C[Se]c1ccccc1", &[]),
        ("OB(O)c1ccccc1", &[]),
        ("C[Si](C)(C)c1ccccc1", &[Rule::Atoms]),
        ("C[Se]C", &[]),
        ("[Na+].CC(=O)[O-]", &[Rule::Mw]),
        ("Cl.CCN(CC)CCOC(=O)c1ccc(N)cc1", &[]),
    ];
    for (smi, want) in cases {
        let got = rules(smi)?;
        check(got == want, format!("{smi}: failed {got:?}, expected {want:?}"))?;
    }
    let kept = filter_compound(&parse_smiles("[Na+].[O-]C(=O)c1ccccc1").unwrap(), &cfg).kept_fragment;
    check(kept == canon("[O-]C(=O)c1ccccc1"), format!("salt kept {kept}"))?;
    let kept = filter_compound(&parse_smiles("Cl.CCN(CC)CCOC(=O)c1ccc(N)cc1").unwrap(), &cfg).kept_fragment;
    check(kept == canon("CCN(CC)CCOC(=O)c1ccc(N)cc1"), format!("salt kept {kept}"))?;
    Ok("weight 100/800 pass, 99.9/800.1 fail; chain 6 pass, 7 fail; Se/B pass, Si fails; salts stripped".into())
}

fn c5_mmp() -> Outcome {
    let records: Vec<(String, String)> =
        rows(&fixture("mmp_groups.tsv")).into_iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    check(records.len() == 30, format!("{} records", records.len()))?;
    let expected = rows(&fixture("mmp_expected.tsv"));
    let key = |g: &str, a: &str, b: &str, c: &str, fa: &str, fb: &str, ar: usize| {
        (g.to_string(), canon(a), canon(b), canon(c), canon(fa), canon(fb), ar)
    };
    let want: BTreeSet<_> = expected
        .iter()
        .map(|r| key(&r[0], &r[1], &r[2], &r[3], &r[4], &r[5], r[6].parse().unwrap()))
        .collect();
    check(want.len() == 12, format!("{} expected pairs", want.len()))?;
    let oracle: BTreeSet<_> = brute_force_pairs(&records)
        .into_iter()
        .map(|(g, a, b, c, fa, fb, ar)| key(&g, &a, &b, &c, &fa, &fb, ar))
        .collect();
    check(oracle == want, format!("brute force finds {} pairs, fixture lists {}", oracle.len(), want.len()))?;
    let pairs = pair_index(&records);
    let got: BTreeSet<_> = pairs
        .iter()
        .map(|p| key(&p.group_id, &p.mol_a, &p.mol_b, &p.core, &p.frag_a, &p.frag_b, p.arity))
        .collect();
    check(got == want && pairs.len() == 12, format!("pair_index found {} pairs: {got:?}", pairs.len()))?;

    let mut isolated = [false; 4];
    for p in &pairs {
        let r = expected
            .iter()
            .find(|r| key(&r[0], &r[1], &r[2], &r[3], &r[4], &r[5], p.arity) == key(&p.group_id, &p.mol_a, &p.mol_b, &p.core, &p.frag_a, &p.frag_b, p.arity))
            .unwrap();
        let label = match r[7].as_str() {
            "Terminal" => Classification::Terminal,
            "Core" => Classification::Core,
            _ => Classification::Other,
        };
        check(p.classification == label && classify_pair(p) == label, format!("{} -> {}: {:?}, expected {label:?}", p.frag_a, p.frag_b, p.classification))?;
        if p.arity >= 2 {
            // evaluate each core criterion on its own
            let (ma, fa, fb) = (parse_smiles(&p.mol_a).unwrap(), parse_smiles(&p.frag_a).unwrap(), parse_smiles(&p.frag_b).unwrap());
            let scaffold = |m: &Molecule| canonical_smiles(&murcko_scaffold(m).without_maps(false));
            let non_ring = |m: &Molecule| (0..m.atom_count()).filter(|&i| !m.atom_in_ring(i)).count();
            let ok = [
                scaffold(&fa) != scaffold(&fb),
                !fa.rings().is_empty() && !fb.rings().is_empty(),
                non_ring(&fa) <= 5 && non_ring(&fb) <= 5,
                2 * heavy_atoms(&fa) < heavy_atoms(&ma),
            ];
            if ok.iter().filter(|&&x| !x).count() == 1 {
                isolated[ok.iter().position(|&x| !x).unwrap()] = true;
            }
        }
    }
    check(isolated.iter().all(|&x| x), format!("criteria failing alone (scaffold, ring, non-ring, size): {isolated:?}"))?;
    Ok("12/12 pairs recovered and labelled; each core criterion fails alone at least once".into())
}

fn c6_reactions() -> Outcome {
    let cases = rows(&fixture("reactions.tsv"));
    check(cases.len() == 10, format!("{} reactions", cases.len()))?;
    let (mut extracted, mut rejected) = (0, 0);
    for (k, r) in cases.iter().enumerate() {
        let rxn = MappedReaction::parse(&r[0]).map_err(|e| format!("reaction {}: {e}", k + 1))?;
        let edit = diff_mapped_reaction(&rxn).map_err(|e| format!("reaction {}: {e}", k + 1))?;
        match (edit, r[1].as_str()) {
            (None, "rejected") => rejected += 1,
            (Some(e), core) if core != "rejected" => {
                let got = (canon(e.core.text()), canon(e.action.original.text()), canon(e.action.replacement.text()));
                let want = (canon(core), canon(&r[2]), canon(&r[3]));
                check(got == want, format!("reaction {}: got {got:?}, expected {want:?}", k + 1))?;
                extracted += 1;
            }
            (e, want) => return Err(format!("reaction {}: got {:?}, expected {want}", k + 1, e.map(|e| e.action.to_string()))),
        }
    }
    check((extracted, rejected) == (7, 3), format!("{extracted} extracted, {rejected} rejected"))?;
    Ok("7 edits extracted, 3 rejected, all matching".into())
}

fn fraction(s: &str) -> f64 {
    match s.split_once('/') {
        Some((a, b)) => a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap(),
        None => s.parse().unwrap(),
    }
}

fn c7_decontamination() -> Outcome {
    let train: Vec<Fragment> = rows(&fixture("decon_train.txt"))
        .iter()
        .map(|r| Fragment::parse(&r[0]).unwrap())
        .collect();
    let train_fps: Vec<_> = train.iter().filter_map(|f| f.molecule().map(ecfp4)).collect();
    let cases = rows(&fixture("decon_pairs.tsv"));
    let pairs: Vec<(Fragment, Fragment)> = cases
        .iter()
        .map(|r| (Fragment::parse(&r[0]).unwrap(), Fragment::parse(&r[1]).unwrap()))
        .collect();
    for (r, (a, b)) in cases.iter().zip(&pairs) {
        let sim = max_similarity((a, b), &train_fps);
        check((sim - fraction(&r[2])).abs() <= TOL, format!("{} / {}: similarity {sim}, frozen {}", r[0], r[1], r[2]))?;
    }
    let kept = decontaminate(&pairs, &train, 0.6);
    let want: Vec<(Fragment, Fragment)> = cases
        .iter()
        .zip(&pairs)
        .filter(|(r, _)| r[3] == "kept")
        .map(|(_, p)| p.clone())
        .collect();
    check(kept == want, format!("kept {} pairs, expected {}", kept.len(), want.len()))?;
    Ok("1.0 and 0.6 dropped, 16/27 and 0.1 kept".into())
}

fn c8_metrics(samples: &[Option<SynthSample>]) -> Outcome {
    let (records, bad) = read_predictions(fixture("predictions.jsonl").as_bytes());
    check(records.len() == 20 && bad.is_empty(), format!("{} records, {} bad lines", records.len(), bad.len()))?;
    let goal = OptimizationGoal {
        oracle_id: "mol_weight".into(),
        direction: Direction::Increase,
        margin: 0.0,
    };
    let m = evaluate(&records, Some(&goal), 0).map_err(|e| e.to_string())?;
    // 17 valid, 9 improve weight, 5 of 8 action records consistent, 3 of 5
    // ground-truth records correct; similarities 8 x 1/3, 3 x 1/4, 6 x 1
    let want = [
        ("VR", m.validity_rate, 85.0),
        ("SR", m.success_rate.unwrap_or(f64::NAN), 45.0),
        ("Sim", m.mean_similarity, (8.0 / 3.0 + 3.0 / 4.0 + 6.0) / 17.0),
        ("CR", m.consistency_rate, 62.5),
        ("EA", m.execution_accuracy, 60.0),
    ];
    for (name, got, exp) in want {
        check((got - exp).abs() <= TOL, format!("{name} = {got}, expected {exp}"))?;
    }
    let synth: Vec<PredictionRecord> = samples
        .iter()
        .flatten()
        .enumerate()
        .map(|(i, s)| PredictionRecord {
            id: i.to_string(),
            source: s.source.clone(),
            actions: Some(s.script.actions().iter().map(|a| a.to_string()).collect()),
            predicted: Some(s.target.clone()),
            ground_truths: Some(vec![s.target.clone()]),
        })
        .collect();
    let cr = evaluate(&synth, None, CORPUS_SEED).map_err(|e| e.to_string())?;
    check(
        cr.consistency_rate == 100.0 && cr.n_consistency_scored == synth.len(),
        format!("synthetic corpus CR {} over {}", cr.consistency_rate, cr.n_consistency_scored),
    )?;
    Ok(format!("VR 85, SR 45, Sim 113/204, CR 62.5, EA 60; corpus CR 100% over {}", synth.len()))
}

fn c9_fingerprints() -> Outcome {
    let mols: Vec<Molecule> = smi_molecules("parser_molecules.smi").into_iter().map(|(_, m)| m).collect();
    let fps: Vec<_> = mols.iter().map(ecfp4).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..FP_PAIRS {
        let (i, j) = (rng.gen_range(0..fps.len()), rng.gen_range(0..fps.len()));
        let ab = tanimoto(&fps[i], &fps[j]).map_err(|e| e.to_string())?;
        let ba = tanimoto(&fps[j], &fps[i]).map_err(|e| e.to_string())?;
        check(ab == ba && (0.0..=1.0).contains(&ab), format!("pair {i},{j}: {ab} vs {ba}"))?;
        check(tanimoto(&fps[i], &fps[i]).unwrap() == 1.0, format!("identity fails for {i}"))?;
    }
    for (m, fp) in mols.iter().zip(&fps) {
        for _ in 0..SHUFFLES_PER_MOLECULE {
            let s = random_smiles(m, &mut rng);
            let shuffled = parse_smiles(&s).map_err(|e| e.to_string())?;
            check(ecfp4(&shuffled) == *fp, format!("fingerprint changes for spelling {s}"))?;
        }
    }
    Ok(format!("{FP_PAIRS} pairs symmetric, bounded, reflexive; {} shuffled parses invariant", mols.len() * SHUFFLES_PER_MOLECULE))
}

fn c10_smirks_round_trip(samples: &[Option<SynthSample>]) -> Outcome {
    let mut checked = 0;
    for s in samples.iter().flatten() {
        if checked >= ROUND_TRIP_ACTIONS {
            break;
        }
        let src = parse_smiles(&s.source).map_err(|e| e.to_string())?;
        let mut reparsed = Vec::new();
        for a in s.script.actions() {
            let smirks = emit_reaction_smirks(a);
            let back = parse_reaction_smirks(&smirks).map_err(|e| format!("{smirks}: {e}"))?;
            check(
                back.original == a.original && back.replacement == a.replacement,
                format!("{smirks} re-parses to {back}"),
            )?;
            let back = EditAction::new(back.original, a.attachment_atoms.clone(), back.replacement).map_err(|e| e.to_string())?;
            reparsed.push(back);
        }
        let n = reparsed.len();
        let script2 = EditScript::new(reparsed).map_err(|e| e.to_string())?;
        let p1 = apply_script(&src, &s.script, CORPUS_SEED).map_err(|e| e.to_string())?;
        let p2 = apply_script(&src, &script2, CORPUS_SEED).map_err(|e| e.to_string())?;
        check(p1.canonical_products() == p2.canonical_products(), format!("{}: products differ after round trip", s.source))?;
        let snippet = emit_rdkit_snippet(&src, &s.script);
        check(snippet == emit_rdkit_snippet(&src, &s.script) && snippet == s.rdkit_snippet, "snippet not deterministic")?;
        check(snippet.contains(&s.source), format!("snippet lacks source {}", s.source))?;
        for a in s.script.actions() {
            check(snippet.contains(&emit_reaction_smirks(a)), "snippet lacks a SMIRKS string")?;
        }
        checked += n;
    }
    check(checked >= ROUND_TRIP_ACTIONS, format!("only {checked} actions available"))?;
    Ok(format!("{checked} actions round-trip with identical products; snippets byte-stable"))
}

fn main() {
    let (_, samples, gen_time) = corpus();
    let results: Vec<(&str, Outcome)> = vec![
        ("self-consistency at scale", c1_self_consistency(&samples, gen_time)),
        ("symmetry ground truths", c2_symmetry()),
        ("parser robustness", c3_parser_robustness()),
        ("filter thresholds", c4_filter_thresholds()),
        ("matched pairs", c5_mmp()),
        ("reaction diffing", c6_reactions()),
        ("decontamination", c7_decontamination()),
        ("metrics arithmetic", c8_metrics(&samples)),
        ("fingerprint properties", c9_fingerprints()),
        ("SMIRKS/snippet round trip", c10_smirks_round_trip(&samples)),
    ];
    let mut failed = 0;
    for (k, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
