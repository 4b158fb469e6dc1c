//! Canonical JSON envelopes for keys and ciphertexts.
//!
//! Big integers are big-endian byte strings, base64 encoded (standard
//! alphabet, padded). Key fingerprints are lowercase hex.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKeyEnvelope {
    pub n: String,
    pub g: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretKeyEnvelope {
    pub p: String,
    pub q: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiphertextEnvelope {
    pub v: String,
    pub kfp: String,
}

pub fn encode_biguint(value: &BigUint) -> String {
    STANDARD.encode(value.to_bytes_be())
}

pub fn decode_biguint(field: &str, text: &str) -> Result<BigUint> {
    let bytes = STANDARD
        .decode(text)
        .map_err(|e| Error::Format(format!("field {field:?} is not valid base64: {e}")))?;
    if bytes.is_empty() {
        return Err(Error::Format(format!("field {field:?} is empty")));
    }
    Ok(BigUint::from_bytes_be(&bytes))
}
