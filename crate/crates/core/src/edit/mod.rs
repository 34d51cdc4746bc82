//! Edit actions: fragment replacement at attachment points, their textual
//! forms (action sentences, reaction SMIRKS, toolkit snippets) and execution.

mod action;
mod apply;
mod emit;

pub use action::{normalize_action, normalize_action_logged, parse_action, parse_wrapper_json, WrapperParse};
pub use apply::{apply_script, EditOutcome};
pub(crate) use apply::{apply_action, locate_sites, Site, Working};
pub use emit::{emit_rdkit_snippet, emit_reaction_smirks, parse_reaction_smirks};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chem::{canonical_smiles, Molecule};
use crate::error::{ChemError, Result};
use crate::pattern::{parse_pattern, Pattern};

/// A group with numbered dummy attachment atoms `[*:n]`.
#[derive(Debug, Clone)]
pub struct Fragment {
    text: String,
    pattern: Pattern,
    mol: Option<Molecule>,
}

impl Fragment {
    pub fn parse(text: &str) -> Result<Fragment> {
        let text = text.trim();
        let pattern = parse_pattern(text)?;
        let mut maps = Vec::new();
        for (q, a) in pattern.atoms.iter().enumerate() {
            if !a.is_wildcard() {
                continue;
            }
            let Some(m) = a.map else {
                return Err(ChemError::Fragment(format!(
                    "{text}: attachment dummies need a map number"
                )));
            };
            if pattern.neighbors(q).len() != 1 {
                return Err(ChemError::Fragment(format!(
                    "{text}: dummy [*:{m}] must have exactly one neighbor"
                )));
            }
            maps.push(m);
        }
        if maps.is_empty() {
            return Err(ChemError::Fragment(format!("{text}: no attachment points")));
        }
        if maps.len() == pattern.len() {
            return Err(ChemError::Fragment(format!("{text}: fragment has no real atoms")));
        }
        let mol = pattern.to_molecule().ok();
        Ok(Fragment {
            text: text.to_string(),
            pattern,
            mol,
        })
    }

    /// Fragment written canonically from a molecule with mapped dummies.
    pub fn from_molecule(mol: &Molecule) -> Result<Fragment> {
        Fragment::parse(&canonical_smiles(mol))
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    /// The fragment as a molecule; absent when a query-only bond (`~`) is used.
    pub fn molecule(&self) -> Option<&Molecule> {
        self.mol.as_ref()
    }

    /// Attachment map numbers, ascending.
    pub fn maps(&self) -> Vec<u32> {
        self.pattern.anchors().into_iter().map(|(m, _)| m).collect()
    }

    pub fn arity(&self) -> usize {
        self.pattern.anchors().len()
    }
}

impl PartialEq for Fragment {
    fn eq(&self, other: &Self) -> bool {
        self.pattern == other.pattern
    }
}

impl Eq for Fragment {}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Replace `original` with `replacement`, optionally pinned to molecule atom numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAction", into = "RawAction")]
pub struct EditAction {
    pub original: Fragment,
    pub attachment_atoms: Option<Vec<u32>>,
    pub replacement: Fragment,
}

impl EditAction {
    pub fn new(original: Fragment, attachment_atoms: Option<Vec<u32>>, replacement: Fragment) -> Result<EditAction> {
        let (om, rm) = (original.maps(), replacement.maps());
        if om != rm {
            return Err(ChemError::ArityMismatch {
                original: om,
                replacement: rm,
            });
        }
        if replacement.molecule().is_none() {
            return Err(ChemError::Fragment(format!(
                "{}: replacement must be a plain molecule fragment",
                replacement.text()
            )));
        }
        if let Some(att) = &attachment_atoms {
            if att.len() > original.arity() {
                return Err(ChemError::ActionSyntax(format!(
                    "{} attachment atoms given for a group with {} attachment points",
                    att.len(),
                    original.arity()
                )));
            }
        }
        Ok(EditAction {
            original,
            attachment_atoms: attachment_atoms.filter(|a| !a.is_empty()),
            replacement,
        })
    }

    pub fn arity(&self) -> usize {
        self.original.arity()
    }
}

impl fmt::Display for EditAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "replace {}", self.original)?;
        if let Some(att) = &self.attachment_atoms {
            let list: Vec<String> = att.iter().map(|n| format!("atom {n}")).collect();
            write!(f, " connected at {}", list.join(", "))?;
        }
        write!(f, " with {}", self.replacement)
    }
}

#[derive(Serialize, Deserialize)]
struct RawAction {
    original: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attachment_atoms: Option<Vec<u32>>,
    replacement: String,
}

impl TryFrom<RawAction> for EditAction {
    type Error = ChemError;

    fn try_from(raw: RawAction) -> Result<EditAction> {
        EditAction::new(
            Fragment::parse(&raw.original)?,
            raw.attachment_atoms,
            Fragment::parse(&raw.replacement)?,
        )
    }
}

impl From<EditAction> for RawAction {
    fn from(a: EditAction) -> RawAction {
        RawAction {
            original: a.original.text,
            attachment_atoms: a.attachment_atoms,
            replacement: a.replacement.text,
        }
    }
}

/// An ordered, non-empty list of actions; serializes as `{"actions": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScript")]
pub struct EditScript {
    actions: Vec<EditAction>,
}

#[derive(Deserialize)]
struct RawScript {
    actions: Vec<EditAction>,
}

impl TryFrom<RawScript> for EditScript {
    type Error = ChemError;

    fn try_from(raw: RawScript) -> Result<EditScript> {
        EditScript::new(raw.actions)
    }
}

impl EditScript {
    pub fn new(actions: Vec<EditAction>) -> Result<EditScript> {
        if actions.is_empty() {
            return Err(ChemError::EmptyInput);
        }
        Ok(EditScript { actions })
    }

    pub fn actions(&self) -> &[EditAction] {
        &self.actions
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("edit scripts always serialize")
    }

    pub fn from_json(text: &str) -> Result<EditScript> {
        serde_json::from_str(text).map_err(|e| ChemError::Json(e.to_string()))
    }
}

impl From<EditAction> for EditScript {
    fn from(a: EditAction) -> EditScript {
        EditScript { actions: vec![a] }
    }
}
