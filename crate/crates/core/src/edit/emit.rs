use super::{EditAction, EditScript, Fragment};
use crate::chem::{canonical_smiles, Molecule};
use crate::error::{ChemError, Result};

/// `original>>replacement`, each side written as given.
pub fn emit_reaction_smirks(action: &EditAction) -> String {
    format!("{}>>{}", action.original.text(), action.replacement.text())
}

/// Reads `original>>replacement` back into an action without attachment atoms.
pub fn parse_reaction_smirks(text: &str) -> Result<EditAction> {
    let (lhs, rhs) = text
        .trim()
        .split_once(">>")
        .ok_or_else(|| ChemError::ReactionParse(format!("missing '>>' in {text}")))?;
    if rhs.contains('>') {
        return Err(ChemError::ReactionParse(format!("agents are not supported: {text}")));
    }
    EditAction::new(Fragment::parse(lhs)?, None, Fragment::parse(rhs)?)
}

fn py_str(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Python source applying the script with RDKit reactions. Text only.
pub fn emit_rdkit_snippet(mol: &Molecule, script: &EditScript) -> String {
    let mut s = String::new();
    s.push_str("from rdkit import Chem\n");
    s.push_str("from rdkit.Chem import AllChem\n");
    s.push_str("from rdkit.Chem.rdChemReactions import ChemicalReaction\n\n\n");
    s.push_str("def apply_edit(mol, smirks):\n");
    s.push_str("    rxn: ChemicalReaction = AllChem.ReactionFromSmarts(smirks)\n");
    s.push_str("    products = rxn.RunReactants((mol,))\n");
    s.push_str("    if not products:\n");
    s.push_str("        raise ValueError(\"group not found: \" + smirks)\n");
    s.push_str("    product = products[0][0]\n");
    s.push_str("    Chem.SanitizeMol(product)\n");
    s.push_str("    return product\n\n\n");
    s.push_str(&format!("mol = Chem.MolFromSmiles({})\n", py_str(&canonical_smiles(mol))));
    s.push_str("edits = [\n");
    for a in script.actions() {
        s.push_str(&format!("    {},\n", py_str(&emit_reaction_smirks(a))));
    }
    s.push_str("]\n");
    s.push_str("for smirks in edits:\n");
    s.push_str("    mol = apply_edit(mol, smirks)\n");
    s.push_str("print(Chem.MolToSmiles(mol))\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::parse_action;
    use crate::smiles::parse_smiles;

    #[test]
    fn smirks_forms() {
        let t = parse_action("replace [*:1]Cl connected at atom 5 with [*:1]OC").unwrap();
        assert_eq!(emit_reaction_smirks(&t), "[*:1]Cl>>[*:1]OC");
        let c = parse_action(
            "replace [*:2]c1ccc([*:3])cc1 connected at atom 2, atom 7 with [*:2]c1cnc([*:3])cc1",
        )
        .unwrap();
        assert_eq!(emit_reaction_smirks(&c), "[*:2]c1ccc([*:3])cc1>>[*:2]c1cnc([*:3])cc1");
        let back = parse_reaction_smirks(&emit_reaction_smirks(&c)).unwrap();
        assert_eq!(back.original, c.original);
        assert_eq!(back.replacement, c.replacement);
        assert!(parse_reaction_smirks("[*:1]Cl").is_err());
    }

    #[test]
    fn snippet_contents() {
        let mol = parse_smiles("Clc1ccccc1").unwrap();
        let script: EditScript = parse_action("replace [*:1]Cl with [*:1]OC").unwrap().into();
        let a = emit_rdkit_snippet(&mol, &script);
        assert!(a.contains("ChemicalReaction"));
        assert!(a.contains("[*:1]Cl>>[*:1]OC"));
        assert!(a.contains(&canonical_smiles(&mol)));
        assert_eq!(a, emit_rdkit_snippet(&mol, &script));
    }
}
