//! Scoring of prediction files: validity, optimization success, source
//! similarity, execution accuracy and structure/action consistency.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::chem::{canonical_smiles, descriptors, Molecule};
use crate::edit::{apply_script, normalize_action, parse_action, EditScript};
use crate::error::{ChemError, Result};
use crate::fingerprint::{ecfp4, tanimoto};
use crate::par::{map_indexed, Exec};
use crate::smiles::parse_smiles;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truths: Option<Vec<String>>,
}

/// Reads predictions JSONL, skipping blank lines. Bad lines come back as
/// `(line number, error)` without stopping the read.
pub fn read_predictions<R: BufRead>(input: R) -> (Vec<PredictionRecord>, Vec<(usize, String)>) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                bad.push((k + 1, e.to_string()));
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<PredictionRecord>(&line) {
            Ok(r) if r.actions.is_none() && r.predicted.is_none() => {
                bad.push((k + 1, "record has neither actions nor predicted".into()))
            }
            Ok(r) => ok.push(r),
            Err(e) => bad.push((k + 1, e.to_string())),
        }
    }
    (ok, bad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increase,
    Decrease,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationGoal {
    pub oracle_id: String,
    pub direction: Direction,
    /// Improvement must exceed this, in property units.
    #[serde(default)]
    pub margin: f64,
}

impl OptimizationGoal {
    /// Signed improvement of `after` over `before`.
    pub fn improvement(&self, before: f64, after: f64) -> f64 {
        match self.direction {
            Direction::Increase => after - before,
            Direction::Decrease => before - after,
        }
    }
}

pub trait Oracle: Send + Sync {
    fn score(&self, mol: &Molecule) -> Result<f64>;
}

impl<F: Fn(&Molecule) -> f64 + Send + Sync> Oracle for F {
    fn score(&self, mol: &Molecule) -> Result<f64> {
        Ok(self(mol))
    }
}

/// Runs a program once per molecule: canonical SMILES and a newline on
/// stdin, a decimal score on the first stdout line.
#[derive(Debug, Clone)]
pub struct ExternalOracle {
    pub name: String,
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl Oracle for ExternalOracle {
    fn score(&self, mol: &Molecule) -> Result<f64> {
        let fail = |msg: String| ChemError::OracleFailed {
            name: self.name.clone(),
            msg,
        };
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| fail(e.to_string()))?;
        if let Some(mut stdin) = child.stdin.take() {
            writeln!(stdin, "{}", canonical_smiles(mol)).map_err(|e| fail(e.to_string()))?;
        }
        let out = child.wait_with_output().map_err(|e| fail(e.to_string()))?;
        if !out.status.success() {
            return Err(fail(format!("exit status {}", out.status)));
        }
        let text = String::from_utf8_lossy(&out.stdout);
        let line = text.lines().next().unwrap_or("").trim();
        line.parse::<f64>()
            .map_err(|_| fail(format!("not a number: {line:?}")))
    }
}

#[derive(Default)]
pub struct OracleRegistry {
    oracles: BTreeMap<String, Box<dyn Oracle>>,
}

impl OracleRegistry {
    pub fn register(&mut self, name: impl Into<String>, oracle: Box<dyn Oracle>) {
        self.oracles.insert(name.into(), oracle);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Oracle> {
        self.oracles
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| ChemError::UnknownOracle(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.oracles.keys().map(String::as_str).collect()
    }
}

/// mol_weight, heavy_atoms, ring_count, hbd and hba.
pub fn builtin_oracles() -> OracleRegistry {
    let mut r = OracleRegistry::default();
    r.register("mol_weight", Box::new(|m: &Molecule| descriptors(m).mol_weight));
    r.register("heavy_atoms", Box::new(|m: &Molecule| descriptors(m).heavy_atoms as f64));
    r.register("ring_count", Box::new(|m: &Molecule| descriptors(m).rings as f64));
    r.register("hbd", Box::new(|m: &Molecule| descriptors(m).hbd as f64));
    r.register("hba", Box::new(|m: &Molecule| descriptors(m).hba as f64));
    r
}

/// Per-record outcome. `None` marks a metric the record does not take part in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordScore {
    pub id: String,
    /// Prediction used for scoring: the given one, else the executed product.
    pub prediction: Option<String>,
    pub valid: bool,
    pub similarity: Option<f64>,
    pub success: Option<bool>,
    pub improvement: Option<f64>,
    pub exec_correct: Option<bool>,
    pub consistent: Option<bool>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub validity_rate: f64,
    /// Absent without an optimization goal.
    pub success_rate: Option<f64>,
    pub mean_similarity: f64,
    pub consistency_rate: f64,
    pub execution_accuracy: f64,
    pub n_valid: usize,
    pub n_success: usize,
    pub n_consistent: usize,
    /// Records with parseable actions.
    pub n_consistency_scored: usize,
    pub n_exec_correct: usize,
    /// Records with ground truths.
    pub n_exec_scored: usize,
    /// Mean signed property change over valid predictions; not a headline metric.
    pub mean_improvement: Option<f64>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_scores(scores: &[RecordScore], with_goal: bool) -> Metrics {
        let n = scores.len();
        let n_valid = scores.iter().filter(|s| s.valid).count();
        let sims: Vec<f64> = scores.iter().filter_map(|s| s.similarity).collect();
        let n_success = scores.iter().filter(|s| s.success == Some(true)).count();
        let cr: Vec<bool> = scores.iter().filter_map(|s| s.consistent).collect();
        let ex: Vec<bool> = scores.iter().filter_map(|s| s.exec_correct).collect();
        let imps: Vec<f64> = scores.iter().filter_map(|s| s.improvement).collect();
        let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        Metrics {
            n,
            validity_rate: pct(n_valid, n),
            success_rate: with_goal.then(|| pct(n_success, n)),
            mean_similarity: mean(&sims),
            consistency_rate: pct(cr.iter().filter(|&&c| c).count(), cr.len()),
            execution_accuracy: pct(ex.iter().filter(|&&c| c).count(), ex.len()),
            n_valid,
            n_success,
            n_consistent: cr.iter().filter(|&&c| c).count(),
            n_consistency_scored: cr.len(),
            n_exec_correct: ex.iter().filter(|&&c| c).count(),
            n_exec_scored: ex.len(),
            mean_improvement: (with_goal && !imps.is_empty()).then(|| mean(&imps)),
        }
    }

    /// Aligned two-column text table.
    pub fn to_table(&self) -> String {
        let opt = |v: Option<f64>, d: usize| v.map_or("-".to_string(), |x| format!("{x:.d$}"));
        let rows = [
            ("records", self.n.to_string()),
            ("validity_rate", format!("{:.2}", self.validity_rate)),
            ("success_rate", opt(self.success_rate, 2)),
            ("mean_similarity", format!("{:.4}", self.mean_similarity)),
            (
                "consistency_rate",
                format!("{:.2} ({}/{})", self.consistency_rate, self.n_consistent, self.n_consistency_scored),
            ),
            (
                "execution_accuracy",
                format!("{:.2} ({}/{})", self.execution_accuracy, self.n_exec_correct, self.n_exec_scored),
            ),
            ("mean_improvement", opt(self.mean_improvement, 4)),
        ];
        let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut s = String::new();
        for (k, v) in rows {
            let _ = writeln!(s, "{k:<w$}  {v}");
        }
        s
    }
}

fn parse_actions(texts: &[String]) -> Result<EditScript> {
    let actions = texts
        .iter()
        .map(|t| parse_action(&normalize_action(t)))
        .collect::<Result<Vec<_>>>()?;
    EditScript::new(actions)
}

fn canonical_set(smiles: &[String]) -> HashSet<String> {
    smiles
        .iter()
        .filter_map(|s| parse_smiles(s).ok())
        .map(|m| canonical_smiles(&m))
        .collect()
}

pub fn score_record(
    rec: &PredictionRecord,
    goal: Option<(&OptimizationGoal, &dyn Oracle)>,
    seed: u64,
) -> RecordScore {
    let mut diagnostics = Vec::new();
    let source = match parse_smiles(&rec.source) {
        Ok(m) => Some(m),
        Err(e) => {
            diagnostics.push(format!("source: {e}"));
            None
        }
    };
    let script = rec.actions.as_ref().and_then(|a| match parse_actions(a) {
        Ok(s) => Some(s),
        Err(e) => {
            diagnostics.push(format!("actions: {e}"));
            None
        }
    });
    let executed = match (&source, &script) {
        (Some(src), Some(script)) => match apply_script(src, script, seed) {
            Ok(out) => Some(out),
            Err(e) => {
                diagnostics.push(format!("execution: {e}"));
                None
            }
        },
        _ => None,
    };
    let predicted: Option<Molecule> = match &rec.predicted {
        Some(p) => match parse_smiles(p) {
            Ok(m) => Some(m),
            Err(e) => {
                diagnostics.push(format!("predicted: {e}"));
                None
            }
        },
        None => executed.as_ref().map(|o| o.primary().clone()),
    };
    let canon = predicted.as_ref().map(canonical_smiles);
    let valid = predicted.is_some();

    let similarity = match (&source, &predicted) {
        (Some(s), Some(p)) => tanimoto(&ecfp4(s), &ecfp4(p)).ok(),
        _ => None,
    };
    let (mut success, mut improvement) = (None, None);
    if let Some((g, oracle)) = goal {
        success = Some(false);
        if let (Some(s), Some(p)) = (&source, &predicted) {
            match (oracle.score(s), oracle.score(p)) {
                (Ok(before), Ok(after)) => {
                    let d = g.improvement(before, after);
                    improvement = Some(d);
                    success = Some(d > g.margin);
                }
                (Err(e), _) | (_, Err(e)) => diagnostics.push(format!("oracle: {e}")),
            }
        }
    }
    let exec_correct = rec
        .ground_truths
        .as_ref()
        .filter(|g| !g.is_empty())
        .map(|g| canon.as_ref().is_some_and(|c| canonical_set(g).contains(c)));
    let consistent = script.as_ref().map(|_| match (&executed, &predicted) {
        (Some(out), Some(p)) => out.contains(p),
        _ => false,
    });
    RecordScore {
        id: rec.id.clone(),
        prediction: canon,
        valid,
        similarity,
        success,
        improvement,
        exec_correct,
        consistent,
        diagnostics,
    }
}

/// Scores every record and aggregates. Errors only on empty input or an
/// unregistered oracle; per-record problems land in the diagnostics.
pub fn evaluate_with(
    records: &[PredictionRecord],
    goal: Option<&OptimizationGoal>,
    oracles: &OracleRegistry,
    seed: u64,
    exec: Exec,
) -> Result<(Metrics, Vec<RecordScore>)> {
    if records.is_empty() {
        return Err(ChemError::EmptyInput);
    }
    let goal = match goal {
        Some(g) => Some((g, oracles.get(&g.oracle_id)?)),
        None => None,
    };
    let scores = map_indexed(records, exec, |_, r| score_record(r, goal, seed));
    Ok((Metrics::from_scores(&scores, goal.is_some()), scores))
}

pub fn evaluate(records: &[PredictionRecord], goal: Option<&OptimizationGoal>, seed: u64) -> Result<Metrics> {
    evaluate_with(records, goal, &builtin_oracles(), seed, Exec::Sequential).map(|(m, _)| m)
}
