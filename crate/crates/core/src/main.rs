use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use moledit::chem::canonical_smiles;
use moledit::edit::{
    apply_script, emit_rdkit_snippet, emit_reaction_smirks, normalize_action, parse_action, parse_wrapper_json,
    EditScript, Fragment,
};
use moledit::eval::{
    builtin_oracles, evaluate_with, read_predictions, Direction, ExternalOracle, OptimizationGoal,
};
use moledit::filter::{filter_compound, max_similarity, FilterConfig, DEFAULT_DECON_THRESHOLD};
use moledit::fingerprint::{ecfp4, similarity_matrix, tanimoto, Fingerprint};
use moledit::mmp::{classify_pair, diff_mapped_reaction, pair_index, Classification, MappedReaction, MatchedPair};
use moledit::par::{map_indexed, Exec};
use moledit::smiles::number_atoms;
use moledit::synth::{builtin_pools, generate_sample, render_prompt_with, SynthSample, DEFAULT_PROMPT_TEMPLATE};
use moledit::{parse_smiles, Molecule};

const DEFAULT_SEED: u64 = 42;
/// Records buffered per parallel batch.
const CHUNK: usize = 4096;

#[derive(Parser)]
#[command(name = "moledit", version, about = "Fragment-level molecular editing toolkit")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output layout for record and tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Args)]
struct Io {
    /// Input file; `-` or absent reads stdin.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output file; absent writes stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Canonical SMILES for each input.
    Canon {
        smiles: Vec<String>,
        #[command(flatten)]
        io: Io,
    },
    /// Atom-numbered SMILES for each input.
    Number {
        smiles: Vec<String>,
        #[command(flatten)]
        io: Io,
    },
    /// Execute edit actions.
    #[command(subcommand)]
    Edit(EditCmd),
    /// Generate training data.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Matched molecular pairs.
    #[command(subcommand)]
    Mmp(MmpCmd),
    /// Atom-mapped reactions.
    #[command(subcommand)]
    Rxn(RxnCmd),
    /// Keep compounds passing the weight, element and chain rules.
    Filter {
        #[command(flatten)]
        io: Io,
        /// Where to write rejected records with their failed rules.
        #[arg(long)]
        rejects: Option<PathBuf>,
        /// Apply the chain rule to carbon only.
        #[arg(long)]
        chain_carbon_only: bool,
    },
    /// Drop test pairs too similar to training moieties.
    Decon {
        /// Test pairs, `frag_a<TAB>frag_b` per line.
        #[arg(long)]
        test: PathBuf,
        /// Training moieties, one fragment per line.
        #[arg(long)]
        train: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DECON_THRESHOLD)]
        threshold: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fingerprints.
    #[command(subcommand)]
    Fp(FpCmd),
    /// Score a predictions JSONL file.
    Eval {
        #[command(flatten)]
        io: Io,
        /// Property oracle for the success rate.
        #[arg(long)]
        oracle: Option<String>,
        #[arg(long, value_enum, default_value_t = DirectionArg::Increase)]
        direction: DirectionArg,
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// Register an external oracle as NAME=PROGRAM.
        #[arg(long = "oracle-exec", value_name = "NAME=PROGRAM")]
        oracle_exec: Vec<String>,
        /// Per-record scores as JSONL.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Render prompts and code snippets.
    #[command(subcommand)]
    Emit(EmitCmd),
}

#[derive(Subcommand)]
enum EditCmd {
    /// Apply actions to one molecule and print every product.
    Apply {
        #[arg(long)]
        mol: String,
        /// Action text; repeat for a multi-step script.
        #[arg(long, conflicts_with = "script")]
        action: Vec<String>,
        /// Script JSON file.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Execute wrapper-JSON responses, one `{"id","source","response"}` per line.
    ExecJson {
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Synthetic edit samples from a `.smi` file.
    Synth {
        #[command(flatten)]
        io: Io,
        /// Edits per sample; drawn from 1..=3 when absent.
        #[arg(long)]
        iterations: Option<usize>,
    },
}

#[derive(Subcommand)]
enum MmpCmd {
    /// Matched pairs from `smiles<TAB>group` lines.
    Extract {
        #[command(flatten)]
        io: Io,
    },
    /// Classify pairs given as JSON lines with mol_a, frag_a and frag_b.
    Classify {
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Subcommand)]
enum RxnCmd {
    /// Single-site edits from atom-mapped reactions.
    Diff {
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Subcommand)]
enum FpCmd {
    /// ECFP4 Tanimoto similarity of two molecules, or all pairs of an input file.
    Sim {
        smiles: Vec<String>,
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Subcommand)]
enum EmitCmd {
    /// Instruction prompts for synthetic samples (JSONL input).
    Prompt {
        #[command(flatten)]
        io: Io,
        /// Template file with `{source}` and `{edits}` slots.
        #[arg(long)]
        template: Option<PathBuf>,
    },
    /// RDKit reaction snippets, for samples (JSONL input) or one molecule and its actions.
    Code {
        #[command(flatten)]
        io: Io,
        #[arg(long, requires = "action")]
        mol: Option<String>,
        #[arg(long)]
        action: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Increase,
    Decrease,
}

struct Ctx {
    seed: u64,
    exec: Exec,
    format: Format,
}

/// Counts of records handled and records that failed.
#[derive(Default)]
struct Tally {
    ok: usize,
    failed: usize,
}

impl Tally {
    fn finish(self, what: &str) -> ExitCode {
        eprintln!("{what}: {} ok, {} failed", self.ok, self.failed);
        if self.failed > 0 {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    }
}

fn open_input(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn BufRead>> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            Ok(Box::new(BufReader::new(f)))
        }
        _ => Ok(Box::new(BufReader::new(io::stdin()))),
    }
}

fn open_output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Positional values if given, else non-blank, non-comment input lines.
type Lines = Box<dyn Iterator<Item = io::Result<(usize, String)>>>;

fn sources(args: &[String], io: &Io) -> anyhow::Result<Lines> {
    if !args.is_empty() {
        let v: Vec<_> = args.iter().cloned().enumerate().map(|(i, s)| Ok((i + 1, s))).collect();
        return Ok(Box::new(v.into_iter()));
    }
    let lines = open_input(&io.input)?.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
        Ok(l) => Some(Ok((i + 1, l.trim_end().to_string()))),
        Err(e) => Some(Err(e)),
    });
    Ok(Box::new(lines))
}

/// Runs `f` over records in chunks, writing results in input order.
/// `f` gets the record's ordinal among records and its line.
fn batch<F>(
    records: impl Iterator<Item = io::Result<(usize, String)>>,
    ctx: &Ctx,
    out: &mut dyn Write,
    f: F,
) -> anyhow::Result<Tally>
where
    F: Fn(usize, &str) -> Result<Vec<String>, String> + Sync + Send,
{
    let mut tally = Tally::default();
    let mut chunk: Vec<(usize, usize, String)> = Vec::with_capacity(CHUNK);
    let mut ordinal = 0;
    let mut flush = |chunk: &mut Vec<(usize, usize, String)>, tally: &mut Tally| -> io::Result<()> {
        let results = map_indexed(chunk, ctx.exec, |_, (k, _, line)| f(*k, line));
        for ((_, lineno, _), r) in chunk.iter().zip(results) {
            match r {
                Ok(lines) => {
                    tally.ok += 1;
                    for l in lines {
                        writeln!(out, "{l}")?;
                    }
                }
                Err(e) => {
                    tally.failed += 1;
                    eprintln!("line {lineno}: {e}");
                }
            }
        }
        chunk.clear();
        Ok(())
    };
    for rec in records {
        let (lineno, line) = rec?;
        chunk.push((ordinal, lineno, line));
        ordinal += 1;
        if chunk.len() == CHUNK {
            flush(&mut chunk, &mut tally)?;
        }
    }
    flush(&mut chunk, &mut tally)?;
    out.flush()?;
    Ok(tally)
}

/// First whitespace-separated field and the optional rest.
fn split_record(line: &str) -> (&str, Option<&str>) {
    let line = line.trim();
    match line.split_once(['\t', ' ']) {
        Some((a, b)) if !b.trim().is_empty() => (a, Some(b.trim())),
        Some((a, _)) => (a, None),
        None => (line, None),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn script_from_texts(texts: &[String]) -> anyhow::Result<EditScript> {
    let actions = texts
        .iter()
        .map(|t| parse_action(&normalize_action(t)).with_context(|| format!("action {t:?}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(EditScript::new(actions)?)
}

fn cmd_canon(ctx: &Ctx, args: &[String], io: &Io, numbered: bool) -> anyhow::Result<ExitCode> {
    let mut out = open_output(&io.output)?;
    let fmt = ctx.format;
    let tally = batch(sources(args, io)?, ctx, &mut out, |_, line| {
        let (smi, id) = split_record(line);
        let mol = parse_smiles(smi).map_err(|e| e.to_string())?;
        let text = if numbered {
            number_atoms(&mol).map_err(|e| e.to_string())?
        } else {
            canonical_smiles(&mol)
        };
        Ok(vec![match (fmt, id) {
            (Format::Json, _) => to_json(&json!({"input": smi, "id": id, "smiles": text})),
            (Format::Tsv, Some(id)) => format!("{text}\t{id}"),
            (Format::Tsv, None) => text,
        }])
    })?;
    Ok(tally.finish(if numbered { "number" } else { "canon" }))
}

fn cmd_edit_apply(ctx: &Ctx, mol: &str, actions: &[String], script: &Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let script = match script {
        Some(p) => EditScript::from_json(&read_file(p)?)?,
        None if actions.is_empty() => bail!("give --action or --script"),
        None => script_from_texts(actions)?,
    };
    let src = parse_smiles(mol).context("molecule")?;
    let outcome = apply_script(&src, &script, ctx.seed)?;
    let mut out = open_output(&None)?;
    match ctx.format {
        Format::Json => writeln!(
            out,
            "{}",
            to_json(&json!({"products": outcome.canonical_products(), "warnings": outcome.warnings}))
        )?,
        Format::Tsv => {
            for p in outcome.canonical_products() {
                writeln!(out, "{p}")?;
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_exec_json(ctx: &Ctx, io: &Io) -> anyhow::Result<ExitCode> {
    let mut out = open_output(&io.output)?;
    let (seed, fmt) = (ctx.seed, ctx.format);
    let tally = batch(sources(&[], io)?, ctx, &mut out, |_, line| {
        let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let id = v.get("id").and_then(Value::as_str).unwrap_or("").to_string();
        let source = v.get("source").and_then(Value::as_str).ok_or("missing source")?;
        let response = match v.get("response") {
            Some(Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
            None => return Err("missing response".into()),
        };
        let mol = parse_smiles(source).map_err(|e| format!("{id}: source: {e}"))?;
        let parsed = parse_wrapper_json(&response).map_err(|e| format!("{id}: {e}"))?;
        if !parsed.failures.is_empty() {
            let (k, _, e) = &parsed.failures[0];
            return Err(format!("{id}: action {}: {e}", k + 1));
        }
        let script = EditScript::new(parsed.actions).map_err(|e| format!("{id}: {e}"))?;
        let outcome = apply_script(&mol, &script, seed).map_err(|e| format!("{id}: {e}"))?;
        let products = outcome.canonical_products();
        let claimed_ok = parsed
            .claimed_target
            .as_deref()
            .and_then(|t| parse_smiles(t).ok())
            .map(|m| outcome.contains(&m));
        Ok(vec![match fmt {
            Format::Json => to_json(&json!({
                "id": id,
                "products": products,
                "claimed_target": parsed.claimed_target,
                "claimed_target_matches": claimed_ok,
                "repairs": parsed.repairs,
                "warnings": outcome.warnings,
            })),
            Format::Tsv => format!("{id}\t{}", products.join(" ")),
        }])
    })?;
    Ok(tally.finish("edit exec-json"))
}

fn cmd_gen_synth(ctx: &Ctx, io: &Io, iterations: Option<usize>) -> anyhow::Result<ExitCode> {
    let pool = builtin_pools();
    let mut out = open_output(&io.output)?;
    let (seed, fmt) = (ctx.seed, ctx.format);
    let tally = batch(sources(&[], io)?, ctx, &mut out, |k, line| {
        let (smi, id) = split_record(line);
        let mol = parse_smiles(smi).map_err(|e| e.to_string())?;
        let sample = generate_sample(&mol, &pool, iterations, seed.wrapping_add(k as u64))
            .ok_or_else(|| format!("{smi}: no pattern applies"))?;
        Ok(vec![match fmt {
            Format::Json => {
                let mut v = serde_json::to_value(&sample).expect("serializable");
                if let (Some(id), Value::Object(m)) = (id, &mut v) {
                    m.insert("id".into(), Value::String(id.to_string()));
                }
                v.to_string()
            }
            Format::Tsv => {
                let actions: Vec<String> = sample.script.actions().iter().map(|a| a.to_string()).collect();
                format!("{}\t{}\t{}", sample.source, sample.target, actions.join("; "))
            }
        }])
    })?;
    Ok(tally.finish("gen synth"))
}

fn pair_line(p: &MatchedPair, fmt: Format) -> String {
    match fmt {
        Format::Json => to_json(p),
        Format::Tsv => format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:?}",
            p.group_id, p.mol_a, p.mol_b, p.core, p.frag_a, p.frag_b, p.arity, p.classification
        ),
    }
}

fn cmd_mmp_extract(ctx: &Ctx, io: &Io) -> anyhow::Result<ExitCode> {
    let mut records = Vec::new();
    let mut tally = Tally::default();
    for rec in sources(&[], io)? {
        let (lineno, line) = rec?;
        match split_record(&line) {
            (smi, Some(group)) if parse_smiles(smi).is_ok() => {
                records.push((smi.to_string(), group.to_string()));
                tally.ok += 1;
            }
            (_, None) => {
                eprintln!("line {lineno}: expected smiles<TAB>group");
                tally.failed += 1;
            }
            (smi, _) => {
                eprintln!("line {lineno}: {}", parse_smiles(smi).unwrap_err());
                tally.failed += 1;
            }
        }
    }
    let mut out = open_output(&io.output)?;
    let pairs = pair_index(&records);
    for p in &pairs {
        writeln!(out, "{}", pair_line(p, ctx.format))?;
    }
    out.flush()?;
    eprintln!("mmp extract: {} pairs", pairs.len());
    Ok(tally.finish("mmp extract"))
}

fn cmd_mmp_classify(ctx: &Ctx, io: &Io) -> anyhow::Result<ExitCode> {
    let mut out = open_output(&io.output)?;
    let fmt = ctx.format;
    let tally = batch(sources(&[], io)?, ctx, &mut out, |_, line| {
        let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let field = |k: &str| v.get(k).and_then(Value::as_str).map(String::from);
        let (Some(mol_a), Some(frag_a), Some(frag_b)) = (field("mol_a"), field("frag_a"), field("frag_b")) else {
            return Err("need mol_a, frag_a and frag_b".into());
        };
        let fa = Fragment::parse(&frag_a).map_err(|e| format!("frag_a: {e}"))?;
        let p = MatchedPair {
            group_id: field("group_id").unwrap_or_default(),
            mol_b: field("mol_b").unwrap_or_default(),
            core: field("core").unwrap_or_default(),
            arity: fa.arity(),
            experimental: fa.arity() >= 3,
            mol_a,
            frag_a,
            frag_b,
            classification: Classification::Other,
        };
        let p = MatchedPair {
            classification: classify_pair(&p),
            ..p
        };
        Ok(vec![pair_line(&p, fmt)])
    })?;
    Ok(tally.finish("mmp classify"))
}

fn cmd_rxn_diff(ctx: &Ctx, io: &Io) -> anyhow::Result<ExitCode> {
    let mut out = open_output(&io.output)?;
    let fmt = ctx.format;
    let tally = batch(sources(&[], io)?, ctx, &mut out, |k, line| {
        let (text, id) = split_record(line);
        let id = id.map(String::from).unwrap_or_else(|| (k + 1).to_string());
        let rxn = MappedReaction::parse(text).map_err(|e| e.to_string())?;
        let edit = diff_mapped_reaction(&rxn).map_err(|e| e.to_string())?;
        Ok(vec![match (fmt, edit) {
            (Format::Json, Some(e)) => to_json(&json!({
                "id": id,
                "core": e.core.text(),
                "original": e.action.original.text(),
                "replacement": e.action.replacement.text(),
                "anchor_map": e.anchor_map,
                "smirks": emit_reaction_smirks(&e.action),
            })),
            (Format::Json, None) => to_json(&json!({"id": id, "rejected": true})),
            (Format::Tsv, Some(e)) => format!("{id}\t{}\t{}", e.core.text(), emit_reaction_smirks(&e.action)),
            (Format::Tsv, None) => format!("{id}\trejected"),
        }])
    })?;
    Ok(tally.finish("rxn diff"))
}

fn cmd_filter(ctx: &Ctx, io: &Io, rejects: &Option<PathBuf>, carbon_only: bool) -> anyhow::Result<ExitCode> {
    let cfg = FilterConfig {
        chain_carbon_only: carbon_only,
        ..FilterConfig::default()
    };
    let mut out = open_output(&io.output)?;
    let mut rej: Option<Box<dyn Write>> = match rejects {
        Some(p) => Some(open_output(&Some(p.clone()))?),
        None => None,
    };
    let fmt = ctx.format;
    // tag rejected lines so they can be routed after the ordered batch
    const REJECT: char = '\u{1}';
    let mut buffer: Vec<u8> = Vec::new();
    let tally = batch(sources(&[], io)?, ctx, &mut buffer, |_, line| {
        let (smi, id) = split_record(line);
        let mol = parse_smiles(smi).map_err(|e| e.to_string())?;
        let r = filter_compound(&mol, &cfg);
        let id = id.unwrap_or("");
        let text = match fmt {
            Format::Json => to_json(&json!({"input": smi, "id": id, "report": r})),
            Format::Tsv if r.passed => format!("{}\t{id}", r.kept_fragment),
            Format::Tsv => {
                let why: Vec<String> = r.failures.iter().map(|f| format!("{}: {}", f.rule, f.detail)).collect();
                format!("{smi}\t{id}\t{}", why.join("; "))
            }
        };
        Ok(vec![if r.passed { text } else { format!("{REJECT}{text}") }])
    })?;
    let (mut kept, mut dropped) = (0, 0);
    for line in String::from_utf8(buffer)?.lines() {
        match line.strip_prefix(REJECT) {
            Some(r) => {
                dropped += 1;
                if let Some(w) = rej.as_mut() {
                    writeln!(w, "{r}")?;
                }
            }
            None => {
                kept += 1;
                writeln!(out, "{line}")?;
            }
        }
    }
    out.flush()?;
    if let Some(w) = rej.as_mut() {
        w.flush()?;
    }
    eprintln!("filter: {kept} passed, {dropped} rejected");
    Ok(tally.finish("filter"))
}

fn cmd_decon(ctx: &Ctx, test: &Path, train: &Path, threshold: f64, output: &Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let mut train_fps: Vec<Fingerprint> = Vec::new();
    for (k, line) in read_file(train)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let f = Fragment::parse(split_record(line).0).with_context(|| format!("{}:{}", train.display(), k + 1))?;
        train_fps.extend(f.molecule().map(ecfp4));
    }
    let mut out = open_output(output)?;
    let fmt = ctx.format;
    let io = Io {
        input: Some(test.to_path_buf()),
        output: None,
    };
    let tally = batch(sources(&[], &io)?, ctx, &mut out, |_, line| {
        let mut cols = line.split('\t');
        let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
            return Err("expected frag_a<TAB>frag_b".into());
        };
        let fa = Fragment::parse(a.trim()).map_err(|e| e.to_string())?;
        let fb = Fragment::parse(b.trim()).map_err(|e| e.to_string())?;
        let sim = max_similarity((&fa, &fb), &train_fps);
        let kept = sim < threshold;
        Ok(match fmt {
            Format::Json => vec![to_json(&json!({"frag_a": a, "frag_b": b, "max_similarity": sim, "kept": kept}))],
            Format::Tsv if kept => vec![line.to_string()],
            Format::Tsv => vec![],
        })
    })?;
    Ok(tally.finish("decon"))
}

fn cmd_fp_sim(ctx: &Ctx, args: &[String], io: &Io) -> anyhow::Result<ExitCode> {
    let mut out = open_output(&io.output)?;
    if args.len() == 2 {
        let a = parse_smiles(&args[0]).context("first molecule")?;
        let b = parse_smiles(&args[1]).context("second molecule")?;
        writeln!(out, "{:.6}", tanimoto(&ecfp4(&a), &ecfp4(&b))?)?;
        out.flush()?;
        return Ok(ExitCode::SUCCESS);
    }
    if !args.is_empty() {
        bail!("give two SMILES or an input file");
    }
    let mut mols: Vec<Molecule> = Vec::new();
    let mut tally = Tally::default();
    for rec in sources(&[], io)? {
        let (lineno, line) = rec?;
        match parse_smiles(split_record(&line).0) {
            Ok(m) => {
                mols.push(m);
                tally.ok += 1;
            }
            Err(e) => {
                eprintln!("line {lineno}: {e}");
                tally.failed += 1;
            }
        }
    }
    let matrix = similarity_matrix(&mols, ctx.exec);
    match ctx.format {
        Format::Json => writeln!(out, "{}", to_json(&matrix))?,
        Format::Tsv => {
            for row in &matrix {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:.6}")).collect();
                writeln!(out, "{}", cells.join("\t"))?;
            }
        }
    }
    out.flush()?;
    Ok(tally.finish("fp sim"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    ctx: &Ctx,
    io: &Io,
    oracle: &Option<String>,
    direction: DirectionArg,
    margin: f64,
    oracle_exec: &[String],
    scores: &Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let mut registry = builtin_oracles();
    for spec in oracle_exec {
        let Some((name, program)) = spec.split_once('=') else {
            bail!("--oracle-exec expects NAME=PROGRAM, got {spec:?}");
        };
        let mut parts = program.split_whitespace();
        let prog = parts.next().context("empty oracle program")?;
        registry.register(
            name,
            Box::new(ExternalOracle {
                name: name.to_string(),
                program: prog.into(),
                args: parts.map(String::from).collect(),
            }),
        );
    }
    let goal = oracle.as_ref().map(|id| OptimizationGoal {
        oracle_id: id.clone(),
        direction: match direction {
            DirectionArg::Increase => Direction::Increase,
            DirectionArg::Decrease => Direction::Decrease,
        },
        margin,
    });
    let (records, bad) = read_predictions(open_input(&io.input)?);
    for (line, e) in &bad {
        eprintln!("line {line}: {e}");
    }
    let (metrics, per_record) = evaluate_with(&records, goal.as_ref(), &registry, ctx.seed, ctx.exec)?;
    if let Some(p) = scores {
        let mut w = open_output(&Some(p.clone()))?;
        for s in &per_record {
            writeln!(w, "{}", to_json(s))?;
        }
        w.flush()?;
    }
    let mut out = open_output(&io.output)?;
    match ctx.format {
        Format::Json => writeln!(out, "{}", to_json(&metrics))?,
        Format::Tsv => write!(out, "{}", metrics.to_table())?,
    }
    out.flush()?;
    let tally = Tally {
        ok: records.len(),
        failed: bad.len(),
    };
    Ok(tally.finish("eval"))
}

fn cmd_prompt(ctx: &Ctx, io: &Io, template: &Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let template = match template {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => DEFAULT_PROMPT_TEMPLATE.to_string(),
    };
    let mut out = open_output(&io.output)?;
    let fmt = ctx.format;
    let tally = batch(sources(&[], io)?, ctx, &mut out, |_, line| {
        let s: SynthSample = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let text = render_prompt_with(&s, &template);
        Ok(vec![match fmt {
            Format::Json => to_json(&json!({ "prompt": text })),
            Format::Tsv => format!("{}\n", text.trim_end()),
        }])
    })?;
    Ok(tally.finish("emit prompt"))
}

fn cmd_code(ctx: &Ctx, io: &Io, mol: &Option<String>, actions: &[String]) -> anyhow::Result<ExitCode> {
    let mut out = open_output(&io.output)?;
    if let Some(smi) = mol {
        let m = parse_smiles(smi).context("molecule")?;
        let script = script_from_texts(actions)?;
        write!(out, "{}", emit_rdkit_snippet(&m, &script))?;
        out.flush()?;
        return Ok(ExitCode::SUCCESS);
    }
    let fmt = ctx.format;
    let tally = batch(sources(&[], io)?, ctx, &mut out, |_, line| {
        let s: SynthSample = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let m = parse_smiles(&s.source).map_err(|e| e.to_string())?;
        let text = emit_rdkit_snippet(&m, &s.script);
        Ok(vec![match fmt {
            Format::Json => to_json(&json!({ "code": text })),
            Format::Tsv => format!("{}\n", text.trim_end()),
        }])
    })?;
    Ok(tally.finish("emit code"))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let ctx = Ctx {
        seed: cli.seed,
        exec: Exec::from_jobs(cli.jobs),
        format: cli.format,
    };
    match &cli.cmd {
        Cmd::Canon { smiles, io } => cmd_canon(&ctx, smiles, io, false),
        Cmd::Number { smiles, io } => cmd_canon(&ctx, smiles, io, true),
        Cmd::Edit(EditCmd::Apply { mol, action, script }) => cmd_edit_apply(&ctx, mol, action, script),
        Cmd::Edit(EditCmd::ExecJson { io }) => cmd_exec_json(&ctx, io),
        Cmd::Gen(GenCmd::Synth { io, iterations }) => cmd_gen_synth(&ctx, io, *iterations),
        Cmd::Mmp(MmpCmd::Extract { io }) => cmd_mmp_extract(&ctx, io),
        Cmd::Mmp(MmpCmd::Classify { io }) => cmd_mmp_classify(&ctx, io),
        Cmd::Rxn(RxnCmd::Diff { io }) => cmd_rxn_diff(&ctx, io),
        Cmd::Filter {
            io,
            rejects,
            chain_carbon_only,
        } => cmd_filter(&ctx, io, rejects, *chain_carbon_only),
        Cmd::Decon {
            test,
            train,
            threshold,
            output,
        } => cmd_decon(&ctx, test, train, *threshold, output),
        Cmd::Fp(FpCmd::Sim { smiles, io }) => cmd_fp_sim(&ctx, smiles, io),
        Cmd::Eval {
            io,
            oracle,
            direction,
            margin,
            oracle_exec,
            scores,
        } => cmd_eval(&ctx, io, oracle, *direction, *margin, oracle_exec, scores),
        Cmd::Emit(EmitCmd::Prompt { io, template }) => cmd_prompt(&ctx, io, template),
        Cmd::Emit(EmitCmd::Code { io, mol, action }) => cmd_code(&ctx, io, mol, action),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
