mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::smi_molecules;
use moledit::edit::{apply_script, emit_reaction_smirks, parse_reaction_smirks, EditAction, EditScript, Fragment};
use moledit::eval::{evaluate, PredictionRecord};
use moledit::filter::{decontaminate, filter_compound, FilterConfig};
use moledit::fingerprint::{ecfp, ecfp4, tanimoto, DEFAULT_NBITS};
use moledit::mmp::{fragment_mol, join_fragments};
use moledit::smiles::random_smiles;
use moledit::synth::{builtin_pools, generate_sample};
use moledit::{canonical_smiles, parse_smiles, Molecule};

fn parser_mols() -> &'static [(String, Molecule)] {
    static M: OnceLock<Vec<(String, Molecule)>> = OnceLock::new();
    M.get_or_init(|| smi_molecules("parser_molecules.smi"))
}

fn synth_mols() -> &'static [(String, Molecule)] {
    static M: OnceLock<Vec<(String, Molecule)>> = OnceLock::new();
    M.get_or_init(|| smi_molecules("synth_sources.smi"))
}

fn any_mol() -> impl Strategy<Value = &'static Molecule> {
    (0..parser_mols().len()).prop_map(|i| &parser_mols()[i].1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tanimoto_symmetric_bounded_reflexive(a in any_mol(), b in any_mol()) {
        let (fa, fb) = (ecfp4(a), ecfp4(b));
        let ab = tanimoto(&fa, &fb).unwrap();
        prop_assert_eq!(ab, tanimoto(&fb, &fa).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(tanimoto(&fa, &fa).unwrap(), 1.0);
    }

    #[test]
    fn canonical_form_ignores_spelling(m in any_mol(), seed in any::<u64>()) {
        let s = random_smiles(m, &mut ChaCha8Rng::seed_from_u64(seed));
        let p = parse_smiles(&s).unwrap();
        prop_assert_eq!(canonical_smiles(&p), canonical_smiles(m));
        prop_assert_eq!(ecfp4(&p), ecfp4(m));
    }

    #[test]
    fn lower_radius_bits_are_contained(m in any_mol()) {
        let r0 = ecfp(m, 0, DEFAULT_NBITS);
        let r1 = ecfp(m, 1, DEFAULT_NBITS);
        let r2 = ecfp4(m);
        prop_assert!(r0.ones().all(|b| r1.get(b)));
        prop_assert!(r1.ones().all(|b| r2.get(b)));
    }

    #[test]
    fn counter_ions_do_not_change_filter_outcome(m in any_mol(), ions in prop::sample::subsequence(vec!["[Na+]", "[Cl-]", "O", "[K+]", "Br"], 1..=3)) {
        prop_assume!(m.atom_count() >= 3);
        let cfg = FilterConfig::default();
        let base = filter_compound(m, &cfg);
        let salted = parse_smiles(&format!("{}.{}", canonical_smiles(m), ions.join("."))).unwrap();
        let report = filter_compound(&salted, &cfg);
        prop_assert_eq!(report.kept_fragment, base.kept_fragment);
        prop_assert_eq!(report.passed, base.passed);
    }

    #[test]
    fn cuts_reassemble(m in any_mol()) {
        prop_assume!(m.atom_count() <= 30);
        let want = canonical_smiles(m);
        for cut in fragment_mol(m, 2) {
            let mut parts = vec![cut.core.molecule().unwrap()];
            parts.extend(cut.side_fragments.iter().map(|f| f.molecule().unwrap()));
            prop_assert_eq!(canonical_smiles(&join_fragments(&parts).unwrap()), want.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synth_samples_reexecute(i in 0..1000usize, seed in any::<u64>(), iters in prop::option::of(1..=3usize)) {
        let m = &synth_mols()[i].1;
        if let Some(s) = generate_sample(m, &builtin_pools(), iters, seed) {
            let src = parse_smiles(&s.source).unwrap();
            let out = apply_script(&src, &s.script, seed).unwrap();
            prop_assert_eq!(canonical_smiles(out.primary()), s.target.clone());
            prop_assert_eq!(generate_sample(m, &builtin_pools(), iters, seed), Some(s));
        }
    }

    #[test]
    fn smirks_round_trip(i in 0..1000usize, seed in any::<u64>()) {
        let m = &synth_mols()[i].1;
        let Some(s) = generate_sample(m, &builtin_pools(), None, seed) else { return Ok(()) };
        let mut back = Vec::new();
        for a in s.script.actions() {
            let r = parse_reaction_smirks(&emit_reaction_smirks(a)).unwrap();
            back.push(EditAction::new(r.original, a.attachment_atoms.clone(), r.replacement).unwrap());
        }
        let src = parse_smiles(&s.source).unwrap();
        let p1 = apply_script(&src, &s.script, 0).unwrap();
        let p2 = apply_script(&src, &EditScript::new(back).unwrap(), 0).unwrap();
        prop_assert_eq!(p1.canonical_products(), p2.canonical_products());
    }

    #[test]
    fn decontamination_extremes(picks in prop::collection::vec((0..6usize, 0..6usize), 1..8)) {
        let frags: Vec<Fragment> = ["[*:1]C", "[*:1]F", "[*:1]c1ccccc1", "[*:1]OC", "[*:1]C(=O)N", "[*:1]CC#N"]
            .iter()
            .map(|s| Fragment::parse(s).unwrap())
            .collect();
        let pairs: Vec<(Fragment, Fragment)> = picks.iter().map(|&(a, b)| (frags[a].clone(), frags[b].clone())).collect();
        let train = vec![Fragment::parse("[*:1]CCl").unwrap()];
        prop_assert!(decontaminate(&pairs, &train, 0.0).is_empty());
        prop_assert_eq!(decontaminate(&pairs, &train, 1.0 + 1e-12), pairs.clone());
        prop_assert_eq!(decontaminate(&pairs, &[], 0.0), pairs);
    }

    #[test]
    fn metrics_are_deterministic(flags in prop::collection::vec((any::<bool>(), any::<bool>()), 1..15)) {
        let records: Vec<PredictionRecord> = flags
            .iter()
            .enumerate()
            .map(|(i, &(valid, with_action))| PredictionRecord {
                id: i.to_string(),
                source: "Cc1ccccc1".into(),
                actions: with_action.then(|| vec!["replace [*:1]C connected at atom 1 with [*:1]O".to_string()]),
                predicted: Some(if valid { "Oc1ccccc1" } else { "c1cc" }.to_string()),
                ground_truths: Some(vec!["Oc1ccccc1".into()]),
            })
            .collect();
        let a = evaluate(&records, None, 7).unwrap();
        let b = evaluate(&records, None, 7).unwrap();
        prop_assert_eq!(&a, &b);
        let valid = flags.iter().filter(|f| f.0).count();
        prop_assert_eq!(a.n_valid, valid);
        prop_assert!((a.validity_rate * records.len() as f64 / 100.0 - valid as f64).abs() < 1e-9);
    }
}
