use std::fmt;

/// Decoder stage that rejected a codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Reading the index stream out of the redundancy rows.
    Pack,
    /// Parsing the index stream into split records.
    Deserialize,
    /// Reverting swaps and flips over the payload rows.
    Undo,
    /// Inverting the per-row enumerative code.
    RowDecode,
    /// Re-encoding the recovered message did not reproduce the input array.
    Reencode,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Pack => "pack",
            Stage::Deserialize => "deserialize",
            Stage::Undo => "undo",
            Stage::RowDecode => "row-decode",
            Stage::Reencode => "re-encode",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("position {pos} out of range 1..={len}")]
    Index { pos: usize, len: usize },
    #[error("encode error: {0}")]
    Encode(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("corrupt codeword ({stage} stage): {detail}")]
    Corrupt { stage: Stage, detail: String },
    #[error("corrupt encoder state: {0}")]
    CorruptState(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn corrupt(stage: Stage, detail: impl Into<String>) -> Self {
        Error::Corrupt {
            stage,
            detail: detail.into(),
        }
    }

    /// Process exit status for this error: 1 usage/format, 2 infeasible
    /// parameters, 3 constraint or corruption failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) => 2,
            Error::Corrupt { .. } | Error::CorruptState(_) | Error::Internal(_) => 3,
            Error::Parameter(_) | Error::Index { .. } | Error::Encode(_) | Error::Usage(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
