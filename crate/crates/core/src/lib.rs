//! Molecular editing engine: SMILES/SMARTS handling, attachment-point-aware
//! fragment replacement, synthetic edit generation, matched-pair mining,
//! fingerprints and evaluation metrics.

pub mod chem;
pub mod edit;
pub mod error;
pub mod eval;
pub mod filter;
pub mod fingerprint;
pub mod mmp;
pub mod par;
pub mod pattern;
pub mod smiles;
pub mod synth;

pub use chem::{canonical_smiles, Molecule};
pub use error::{ChemError, Result};
pub use smiles::{parse_smiles, write_smiles, SmilesDialect};
