//! SMILES reading and writing, atom numbering, and `.smi` files.

pub mod parse;
pub mod smi;
pub mod write;

pub use parse::{parse_graph, parse_smiles};
pub use smi::{read_smi, SmiLineError, SmiReader, SmiRecord};
pub use write::{write_smiles, SmilesDialect};

use crate::chem::Molecule;
use crate::error::{ChemError, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use write::{write_ranked, WriteOptions};

fn traversal_order(mol: &Molecule) -> Vec<usize> {
    let ranks: Vec<usize> = (0..mol.atom_count()).collect();
    let opts = WriteOptions {
        dialect: SmilesDialect::default(),
        bracket_all: false,
        sort_fragments: false,
    };
    write_ranked(mol, &ranks, opts)
        .map(|(_, o)| o)
        .unwrap_or(ranks)
}

/// Number each heavy atom 1..n in writer traversal order. Index `i` of the
/// result holds the number of atom `i` (`None` for dummies and hydrogens).
///
/// A molecule whose non-dummy atoms already carry maps on every heavy atom
/// (e.g. a re-parsed numbered SMILES) keeps those maps as its numbering.
pub fn atom_numbering(mol: &Molecule) -> Vec<Option<u32>> {
    let numbered = |i: usize| !mol.atom(i).is_dummy() && !mol.atom(i).element.is_hydrogen();
    let targets: Vec<usize> = (0..mol.atom_count()).filter(|&i| numbered(i)).collect();
    if !targets.is_empty() && targets.iter().all(|&i| mol.atom(i).map.is_some()) {
        return (0..mol.atom_count())
            .map(|i| if numbered(i) { mol.atom(i).map } else { None })
            .collect();
    }
    let mut out = vec![None; mol.atom_count()];
    let mut k = 0;
    for i in traversal_order(mol) {
        if numbered(i) {
            k += 1;
            out[i] = Some(k);
        }
    }
    out
}

/// SMILES with every heavy atom written as a bracket atom carrying its
/// number as atom map and an explicit hydrogen count, e.g. `[CH3:1][CH2:2][OH:3]`.
pub fn number_atoms(mol: &Molecule) -> Result<String> {
    if let Some(i) = (0..mol.atom_count()).find(|&i| !mol.atom(i).is_dummy() && mol.atom(i).map.is_some()) {
        return Err(ChemError::MapCollision(i));
    }
    let numbering = atom_numbering(mol);
    let mut m = mol.clone();
    for (a, num) in m.atoms.iter_mut().zip(&numbering) {
        if num.is_some() {
            a.map = *num;
        }
    }
    let ranks: Vec<usize> = (0..m.atom_count()).collect();
    let opts = WriteOptions {
        dialect: SmilesDialect::default(),
        bracket_all: true,
        sort_fragments: false,
    };
    Ok(write_ranked(&m, &ranks, opts)?.0)
}

/// A random valid spelling of `mol`: random root, branch order and fragment order.
pub fn random_smiles<R: Rng + ?Sized>(mol: &Molecule, rng: &mut R) -> String {
    let mut ranks: Vec<usize> = (0..mol.atom_count()).collect();
    ranks.shuffle(rng);
    let opts = WriteOptions {
        dialect: SmilesDialect::default(),
        bracket_all: false,
        sort_fragments: false,
    };
    write_ranked(mol, &ranks, opts).map(|(s, _)| s).unwrap_or_default()
}
