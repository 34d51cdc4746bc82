//! Molecular graph model, perception and descriptors.

pub mod canon;
pub mod descriptors;
pub mod element;
pub mod mol;
pub mod perceive;
pub(crate) mod rings;

pub use canon::{canonical_ranks, canonical_smiles};
pub use descriptors::{descriptors, Descriptors};
pub use element::Element;
pub use mol::{Atom, Bond, BondOrder, MolGraph, Molecule};
pub use perceive::perceive;
