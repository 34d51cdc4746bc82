//! Circular (Morgan-style) fingerprints and Tanimoto similarity.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::chem::{canonical_smiles, Molecule};
use crate::error::{ChemError, Result};
use crate::par::{map_indexed, Exec};

pub const DEFAULT_RADIUS: usize = 2;
pub const DEFAULT_NBITS: usize = 2048;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(words: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
}

impl Fingerprint {
    /// Empty fingerprint; `nbits` must be a power of two.
    pub fn new(nbits: usize) -> Fingerprint {
        assert!(nbits.is_power_of_two(), "fingerprint width must be a power of two");
        Fingerprint {
            words: vec![0; nbits.div_ceil(64)],
            nbits,
        }
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&b| self.get(b))
    }

    /// Lowercase hex, most significant word last.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * 16);
        for w in &self.words {
            write!(s, "{w:016x}").unwrap();
        }
        s
    }

    pub fn from_hex(hex: &str) -> Result<Fingerprint> {
        let bad = || ChemError::Fragment(format!("malformed fingerprint hex '{hex}'"));
        if hex.is_empty() || !hex.len().is_multiple_of(16) {
            return Err(bad());
        }
        let words = hex
            .as_bytes()
            .chunks(16)
            .map(|c| u64::from_str_radix(std::str::from_utf8(c).ok()?, 16).ok())
            .collect::<Option<Vec<u64>>>()
            .ok_or_else(bad)?;
        let nbits = words.len() * 64;
        if !nbits.is_power_of_two() {
            return Err(bad());
        }
        Ok(Fingerprint { words, nbits })
    }
}

fn atom_invariant(mol: &Molecule, i: usize) -> u64 {
    let a = mol.atom(i);
    fnv1a(&[
        a.element.atomic_number() as u64,
        mol.heavy_degree(i) as u64,
        a.charge as i64 as u64,
        a.hydrogens as u64,
        mol.atom_in_ring(i) as u64,
        a.is_dummy() as u64,
    ])
}

/// Identifiers of every atom environment at radius 0..=`radius`.
pub fn environment_ids(mol: &Molecule, radius: usize) -> Vec<u64> {
    let n = mol.atom_count();
    let mut cur: Vec<u64> = (0..n).map(|i| atom_invariant(mol, i)).collect();
    let mut all = cur.clone();
    for iter in 1..=radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut env: Vec<(u64, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(nb, b)| (mol.bond(b).order.code() as u64, cur[nb]))
                    .collect();
                env.sort_unstable();
                let mut words = vec![iter as u64, cur[i]];
                for (code, id) in env {
                    words.push(code);
                    words.push(id);
                }
                fnv1a(&words)
            })
            .collect();
        all.extend_from_slice(&next);
        cur = next;
    }
    all
}

/// Circular fingerprint; radius 2 corresponds to ECFP4.
pub fn ecfp(mol: &Molecule, radius: usize, nbits: usize) -> Fingerprint {
    let mut fp = Fingerprint::new(nbits);
    for id in environment_ids(mol, radius) {
        fp.set((id % nbits as u64) as usize);
    }
    fp
}

/// `ecfp` with radius 2 and 2048 bits.
pub fn ecfp4(mol: &Molecule) -> Fingerprint {
    ecfp(mol, DEFAULT_RADIUS, DEFAULT_NBITS)
}

/// |a AND b| / |a OR b|, 1.0 when both are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    if a.nbits != b.nbits {
        return Err(ChemError::WidthMismatch(a.nbits, b.nbits));
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    Ok(if either == 0 {
        1.0
    } else {
        both as f64 / either as f64
    })
}

/// All-pairs ECFP4 Tanimoto matrix, rows in input order.
pub fn similarity_matrix(mols: &[Molecule], exec: Exec) -> Vec<Vec<f64>> {
    let fps = map_indexed(mols, exec, |_, m| ecfp4(m));
    map_indexed(&fps, exec, |_, a| {
        fps.iter().map(|b| tanimoto(a, b).expect("equal widths")).collect()
    })
}

/// One line of a fingerprint cache: canonical SMILES and hex bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub smiles: String,
    pub fingerprint: Fingerprint,
}

impl CacheEntry {
    pub fn for_molecule(mol: &Molecule) -> CacheEntry {
        CacheEntry {
            smiles: canonical_smiles(mol),
            fingerprint: ecfp4(mol),
        }
    }
}

pub fn write_cache<W: Write>(mut out: W, entries: &[CacheEntry]) -> std::io::Result<()> {
    for e in entries {
        writeln!(out, "{}\t{}", e.smiles, e.fingerprint.to_hex())?;
    }
    Ok(())
}

pub fn read_cache<R: BufRead>(input: R) -> Result<Vec<CacheEntry>> {
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| ChemError::Fragment(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (smi, hex) = line
            .split_once('\t')
            .ok_or_else(|| ChemError::Fragment(format!("cache line {}: expected two columns", k + 1)))?;
        out.push(CacheEntry {
            smiles: smi.to_string(),
            fingerprint: Fingerprint::from_hex(hex.trim())?,
        });
    }
    Ok(out)
}
