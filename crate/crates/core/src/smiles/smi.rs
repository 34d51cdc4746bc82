use crate::chem::Molecule;
use crate::error::ChemError;
use crate::smiles::parse_smiles;
use std::io::BufRead;

#[derive(Debug, Clone)]
pub struct SmiRecord {
    /// 1-based line number.
    pub line: usize,
    pub smiles: String,
    pub id: Option<String>,
    pub mol: Molecule,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("line {line}: {error}")]
pub struct SmiLineError {
    pub line: usize,
    pub text: String,
    pub error: ChemError,
}

/// Streaming `.smi` reader: one `SMILES[<TAB>id]` record per line; blank
/// lines and `#` comments are skipped.
pub struct SmiReader<R> {
    inner: R,
    line: usize,
    buf: String,
    pub malformed: usize,
}

pub fn read_smi<R: BufRead>(inner: R) -> SmiReader<R> {
    SmiReader {
        inner,
        line: 0,
        buf: String::new(),
        malformed: 0,
    }
}

impl<R: BufRead> Iterator for SmiReader<R> {
    type Item = Result<SmiRecord, SmiLineError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.line += 1;
                    self.malformed += 1;
                    return Some(Err(SmiLineError {
                        line: self.line,
                        text: String::new(),
                        error: ChemError::syntax(0, e.to_string()),
                    }));
                }
            }
            self.line += 1;
            let text = self.buf.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let mut parts = text.splitn(2, ['\t', ' ']);
            let smiles = parts.next().unwrap_or("").to_string();
            let id = parts.next().map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
            return Some(match parse_smiles(&smiles) {
                Ok(mol) => Ok(SmiRecord {
                    line: self.line,
                    smiles,
                    id,
                    mol,
                }),
                Err(error) => {
                    self.malformed += 1;
                    Err(SmiLineError {
                        line: self.line,
                        text: text.to_string(),
                        error,
                    })
                }
            });
        }
    }
}
