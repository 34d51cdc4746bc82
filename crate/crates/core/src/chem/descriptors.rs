use super::element::Element;
use super::mol::Molecule;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptors {
    /// Average molecular weight in Da, hydrogens included.
    pub mol_weight: f64,
    pub heavy_atoms: usize,
    pub rings: usize,
    pub hbd: usize,
    pub hba: usize,
}

pub fn mol_weight(mol: &Molecule) -> f64 {
    mol.atoms()
        .iter()
        .map(|a| a.element.mass() + a.hydrogens as f64 * Element::H.mass())
        .sum()
}

/// Heavy atoms, dummies excluded.
pub fn heavy_atoms(mol: &Molecule) -> usize {
    mol.atoms()
        .iter()
        .filter(|a| !a.element.is_hydrogen() && !a.is_dummy())
        .count()
}

pub fn descriptors(mol: &Molecule) -> Descriptors {
    let no = |e: Element| e == Element::N || e == Element::O;
    Descriptors {
        mol_weight: mol_weight(mol),
        heavy_atoms: heavy_atoms(mol),
        rings: mol.rings().len(),
        hbd: mol
            .atoms()
            .iter()
            .filter(|a| no(a.element) && a.hydrogens > 0)
            .count(),
        hba: mol.atoms().iter().filter(|a| no(a.element)).count(),
    }
}
