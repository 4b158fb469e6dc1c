use std::io;

use thiserror::Error;

use crate::ahe::KeyFingerprint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("plaintext is outside [0, N)")]
    PlaintextOutOfRange,

    #[error("key mismatch: expected fingerprint {expected}, found {found}")]
    KeyMismatch {
        expected: KeyFingerprint,
        found: KeyFingerprint,
    },

    #[error("corrupt ciphertext: {0}")]
    CorruptCiphertext(&'static str),

    #[error("negative scalar {0} is not supported by repeated addition")]
    NegativeScalar(String),

    #[error("|{value}| exceeds max_abs {max_abs} at index {index}")]
    MagnitudeExceeded { index: usize, value: f64, max_abs: f64 },

    #[error("dimension mismatch{}: expected {expected}, found {found}", label_suffix(.label))]
    DimensionMismatch {
        expected: usize,
        found: usize,
        label: Option<String>,
    },

    #[error("encoding parameters differ{}", label_suffix(.label))]
    ParamsMismatch { label: Option<String> },

    #[error("overflow budget violated: dimension {dim} exceeds the maximum safe dimension {max_safe_dim}")]
    BudgetViolated { dim: usize, max_safe_dim: String },

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("corrupted store: {0}")]
    Corruption(String),

    #[error("result verification failed: {0}")]
    Verification(String),

    #[error("key sanity check failed: {0}")]
    KeySanity(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn label_suffix(label: &Option<String>) -> String {
    match label {
        Some(l) => format!(" for {l:?}"),
        None => String::new(),
    }
}

impl Error {
    /// Process exit code used by the command-line front end.
    ///
    /// 2 marks usage/validation failures, 3 integrity or key-mismatch
    /// failures and 4 I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::KeyMismatch { .. }
            | Error::CorruptCiphertext(_)
            | Error::Format(_)
            | Error::Corruption(_)
            | Error::KeySanity(_)
            | Error::Verification(_)
            | Error::Json(_) => 3,
            Error::Io(_) => 4,
            _ => 2,
        }
    }
}
