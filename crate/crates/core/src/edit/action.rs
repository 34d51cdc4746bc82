use serde_json::Value;

use super::{EditAction, Fragment};
use crate::error::{ChemError, Result};
use crate::pattern::parse_pattern;

fn strip_token(t: &str) -> &str {
    t.trim()
        .trim_matches(|c: char| matches!(c, '"' | '\'' | '`' | '“' | '”'))
        .trim_end_matches(['.', ',', ';'])
        .trim_matches(|c: char| matches!(c, '"' | '\'' | '`' | '“' | '”'))
}

/// Parses `replace <frag> [connected at <atoms>] with <frag>`.
///
/// The verbose form `Replace the substructure corresponding to "<frag>" ...`
/// and quoted fragments are accepted too. Atom lists may read `atom 2, atom 7`,
/// `2 7`, `atoms 2 and 7`, or `absent`.
pub fn parse_action(text: &str) -> Result<EditAction> {
    let bad = |msg: &str| ChemError::ActionSyntax(format!("{msg}: {}", text.trim()));
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut i = 0;
    if !tokens.first().is_some_and(|t| t.eq_ignore_ascii_case("replace")) {
        return Err(bad("expected 'replace'"));
    }
    i += 1;
    let lower: Vec<String> = tokens.iter().map(|t| t.to_ascii_lowercase()).collect();
    if lower.get(i..i + 4).is_some_and(|w| w == ["the", "substructure", "corresponding", "to"]) {
        i += 4;
    }
    let original = tokens.get(i).ok_or_else(|| bad("missing original group"))?;
    i += 1;
    let mut atoms: Option<Vec<u32>> = None;
    if lower.get(i).is_some_and(|t| t == "connected") {
        if lower.get(i + 1).map(String::as_str) != Some("at") {
            return Err(bad("expected 'connected at'"));
        }
        i += 2;
        let mut list = Vec::new();
        let mut absent = false;
        while i < tokens.len() && lower[i] != "with" {
            for part in lower[i].split(',') {
                let part = strip_token(part);
                match part {
                    "" | "atom" | "atoms" | "and" => {}
                    "absent" | "none" => absent = true,
                    _ => match part.parse::<u32>() {
                        Ok(n) => list.push(n),
                        Err(_) => return Err(bad(&format!("unexpected '{part}' in atom list"))),
                    },
                }
            }
            i += 1;
        }
        if absent && !list.is_empty() {
            return Err(bad("atom list mixes numbers and 'absent'"));
        }
        if !absent && list.is_empty() {
            return Err(bad("empty atom list"));
        }
        atoms = (!absent).then_some(list);
    }
    if lower.get(i).map(String::as_str) != Some("with") {
        return Err(bad("expected 'with'"));
    }
    let replacement = tokens.get(i + 1).ok_or_else(|| bad("missing replacement group"))?;
    if tokens.len() > i + 2 {
        return Err(bad("trailing text after replacement"));
    }
    let original = Fragment::parse(strip_token(original))?;
    let replacement = Fragment::parse(strip_token(replacement))?;
    EditAction::new(original, atoms, replacement)
}

/// Best-effort repair of common slips in action text; see `normalize_action_logged`.
pub fn normalize_action(text: &str) -> String {
    normalize_action_logged(text).0
}

/// Repairs malformed dummy maps (`[*1:]`, `[*1]` to `[*:1]`), then adds a
/// hydrogen to an aromatic nitrogen when a fragment cannot otherwise be
/// kekulized. Returns the repaired text and one log line per repair.
pub fn normalize_action_logged(text: &str) -> (String, Vec<String>) {
    let mut log = Vec::new();
    let fixed = fix_dummy_maps(text, &mut log);
    let tokens: Vec<String> = fixed
        .split(' ')
        .map(|tok| {
            let core = strip_token(tok);
            if core.is_empty() || !core.contains('n') {
                return tok.to_string();
            }
            match add_pyrrole_hydrogen(core) {
                Some(rep) => {
                    log.push(format!("added [nH] to aromatic nitrogen: {core} -> {rep}"));
                    tok.replacen(core, &rep, 1)
                }
                None => tok.to_string(),
            }
        })
        .collect();
    (tokens.join(" "), log)
}

fn fix_dummy_maps(text: &str, log: &mut Vec<String>) -> String {
    let b = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'[' && b.get(i + 1) == Some(&b'*') {
            let mut j = i + 2;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            if j > i + 2 {
                let digits = &text[i + 2..j];
                let end = if b.get(j) == Some(&b']') {
                    Some(j + 1)
                } else if b.get(j) == Some(&b':') && b.get(j + 1) == Some(&b']') {
                    Some(j + 2)
                } else {
                    None
                };
                if let Some(end) = end {
                    log.push(format!("rewrote {} as [*:{digits}]", &text[i..end]));
                    out.push_str(&format!("[*:{digits}]"));
                    i = end;
                    continue;
                }
            }
        }
        let ch = text[i..].chars().next().unwrap();
        out.push(ch);
        i += ch.len_utf8();
    }
    out
}

fn needs_repair(frag: &str) -> bool {
    matches!(
        parse_pattern(frag).and_then(|p| p.to_molecule()),
        Err(ChemError::Kekulization(_))
    )
}

/// Tries `[nH]` on each bare aromatic nitrogen in turn; returns the first
/// spelling that perceives.
fn add_pyrrole_hydrogen(frag: &str) -> Option<String> {
    if !needs_repair(frag) {
        return None;
    }
    let mut depth = 0;
    for (k, c) in frag.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            'n' if depth == 0 => {
                let cand = format!("{}[nH]{}", &frag[..k], &frag[k + 1..]);
                if parse_pattern(&cand).and_then(|p| p.to_molecule()).is_ok() {
                    return Some(cand);
                }
            }
            _ => {}
        }
    }
    None
}

/// Result of reading a model response in the wrapper JSON format.
#[derive(Debug, Clone)]
pub struct WrapperParse {
    pub actions: Vec<EditAction>,
    pub claimed_target: Option<String>,
    pub repairs: Vec<String>,
    /// `(entry index, entry text, error)` for action strings that failed.
    pub failures: Vec<(usize, String, ChemError)>,
}

/// Reads `{"Action Description": [...], "Final Target Molecule": "..."}`,
/// tolerating surrounding prose and code fences.
pub fn parse_wrapper_json(text: &str) -> Result<WrapperParse> {
    let start = text.find('{');
    let end = text.rfind('}');
    let body = match (start, end) {
        (Some(s), Some(e)) if s < e => &text[s..=e],
        _ => return Err(ChemError::Json("no JSON object found".into())),
    };
    let v: Value = serde_json::from_str(body).map_err(|e| ChemError::Json(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| ChemError::Json("expected a JSON object".into()))?;
    let entries: Vec<String> = match obj.get("Action Description") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|x| match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect(),
        Some(Value::String(s)) => vec![s.clone()],
        Some(_) => return Err(ChemError::Json("'Action Description' must be a list of strings".into())),
        None => return Err(ChemError::Json("missing key 'Action Description'".into())),
    };
    let claimed_target = obj
        .get("Final Target Molecule")
        .and_then(Value::as_str)
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    let mut out = WrapperParse {
        actions: Vec::new(),
        claimed_target,
        repairs: Vec::new(),
        failures: Vec::new(),
    };
    for (k, entry) in entries.iter().enumerate() {
        let (fixed, log) = normalize_action_logged(entry);
        out.repairs.extend(log);
        match parse_action(&fixed) {
            Ok(a) => out.actions.push(a),
            Err(e) => out.failures.push((k, entry.clone(), e)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_action() {
        let a = parse_action("replace [*:1]Cl connected at atom 5 with [*:1]OC").unwrap();
        assert_eq!(a.attachment_atoms, Some(vec![5]));
        assert_eq!(a.arity(), 1);
        assert_eq!(a.original.text(), "[*:1]Cl");
        assert_eq!(a.replacement.text(), "[*:1]OC");
    }

    #[test]
    fn core_action() {
        let a = parse_action(
            "replace [*:2]c1ccc([*:3])cc1 connected at atom 2, atom 7 with [*:2]c1cnc([*:3])cc1",
        )
        .unwrap();
        assert_eq!(a.attachment_atoms, Some(vec![2, 7]));
        assert_eq!(a.arity(), 2);
    }

    #[test]
    fn optional_clause_and_verbose_form() {
        let a = parse_action("replace [*:1]F with [*:1]Cl").unwrap();
        assert_eq!(a.attachment_atoms, None);
        let b = parse_action(
            "Replace the substructure corresponding to \n\"[*:1]F\" \nconnected at atom 4 \nwith \"[*:1]Cl\".",
        )
        .unwrap();
        assert_eq!(b.attachment_atoms, Some(vec![4]));
        assert_eq!(b.replacement.text(), "[*:1]Cl");
        let c = parse_action("replace [*:1]F connected at absent with [*:1]Cl").unwrap();
        assert_eq!(c.attachment_atoms, None);
        let d = parse_action("replace [*:1]O[*:2] connected at atoms 6 and 8 with [*:1]N[*:2]").unwrap();
        assert_eq!(d.attachment_atoms, Some(vec![6, 8]));
    }

    #[test]
    fn syntax_and_arity_errors() {
        assert!(matches!(parse_action("swap stuff around"), Err(ChemError::ActionSyntax(_))));
        assert!(matches!(parse_action("replace [*:1]F with"), Err(ChemError::ActionSyntax(_))));
        assert!(matches!(
            parse_action("replace [*:1]F connected at atom x with [*:1]Cl"),
            Err(ChemError::ActionSyntax(_))
        ));
        assert!(matches!(
            parse_action("replace [*:1]F with [*:1]C[*:2]"),
            Err(ChemError::ArityMismatch { .. })
        ));
        assert!(parse_action("replace [*:1]F with [*:2]Cl").is_err());
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_action("[*1:]OC"), "[*:1]OC");
        assert_eq!(normalize_action("[*1]OC"), "[*:1]OC");
        assert_eq!(normalize_action("[*:1]c1nnnn1"), "[*:1]c1[nH]nnn1");
        assert_eq!(normalize_action("[*:1]F"), "[*:1]F");
        assert_eq!(normalize_action("[*:1]c1ccncc1"), "[*:1]c1ccncc1");
        let (s, log) = normalize_action_logged(
            "replace [*2:]c1ccc([*:3])cc1 connected at atom 2 with \"[*:2]c1nnn([*:3])n1\"",
        );
        assert_eq!(s, "replace [*:2]c1ccc([*:3])cc1 connected at atom 2 with \"[*:2]c1nnn([*:3])n1\"");
        assert_eq!(log.len(), 1);
        let (s, log) = normalize_action_logged("replace [*:1]C(=O)O with \"[*:1]c1nnnn1\"");
        assert_eq!(s, "replace [*:1]C(=O)O with \"[*:1]c1[nH]nnn1\"");
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn wrapper() {
        let text = "```json\n{\"Action Description\": [\"replace [*:1]Cl connected at atom 5 with [*:1]OC\", \"replace [*1:]F with [*:1]Br\"], \"Final Target Molecule\": \"COc1ccccc1\"}\n```";
        let w = parse_wrapper_json(text).unwrap();
        assert_eq!(w.actions.len(), 2);
        assert_eq!(w.claimed_target.as_deref(), Some("COc1ccccc1"));
        assert_eq!(w.repairs.len(), 1);
        assert!(matches!(parse_wrapper_json("{\"x\": 1}"), Err(ChemError::Json(_))));
        assert!(matches!(parse_wrapper_json("[1, 2]"), Err(ChemError::Json(_))));
        let w = parse_wrapper_json("{\"Action Description\": [\"replace [*:1]F with [*:1]Cl\", \"do something\"]}").unwrap();
        assert_eq!(w.actions.len(), 1);
        assert_eq!(w.failures.len(), 1);
        assert_eq!(w.claimed_target, None);
    }
}
