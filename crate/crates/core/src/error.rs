use thiserror::Error;

/// Errors raised by the chemistry engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChemError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("valence error on atom {atom} ({element}): total valence {valence} exceeds allowed")]
    Valence {
        atom: usize,
        element: String,
        valence: u32,
    },
    #[error("malformed graph: {0}")]
    Graph(String),
    #[error("kekulization failed: {0}")]
    Kekulization(String),
    #[error("unsupported query primitive at position {pos}: {what}")]
    UnsupportedPrimitive { pos: usize, what: String },
    #[error("atom {0} already carries an atom map")]
    MapCollision(usize),
    #[error("invalid fragment: {0}")]
    Fragment(String),
    #[error("action syntax error: {0}")]
    ActionSyntax(String),
    #[error("arity mismatch: original has attachment maps {original:?}, replacement has {replacement:?}")]
    ArityMismatch {
        original: Vec<u32>,
        replacement: Vec<u32>,
    },
    #[error("group not found: {0}")]
    GroupNotFound(String),
    #[error("json error: {0}")]
    Json(String),
    #[error("reaction parse error: {0}")]
    ReactionParse(String),
    #[error("unmapped atoms: {0}")]
    UnmappedAtoms(String),
    #[error("fingerprint width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("unknown oracle `{0}`")]
    UnknownOracle(String),
    #[error("oracle `{name}` failed: {msg}")]
    OracleFailed { name: String, msg: String },
    #[error("empty input")]
    EmptyInput,
}

pub type Result<T, E = ChemError> = std::result::Result<T, E>;

impl ChemError {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        ChemError::Syntax {
            pos,
            msg: msg.into(),
        }
    }
}
