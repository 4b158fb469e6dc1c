//! Encrypted inner-product similarity.
//!
//! [`evaluate`] holds everything the evaluator runs with a public key only.
//! [`ranking`] is the key holder's side: decrypt, decode and rank.

pub mod evaluate;
pub mod ranking;

pub use evaluate::{batch_similarity, encrypt_vector, inner_product, inner_product_naive};
pub use ranking::{topk, ScoredMatch};

use crate::ahe::{Ciphertext, KeyFingerprint, PublicKey};
use crate::encoding::EncodingParams;
use crate::error::{Error, Result};

/// An encrypted vector `(Enc(y₁), …, Enc(y_d))` with its encoding
/// parameters and label.
#[derive(Clone, Debug, PartialEq)]
pub struct EncVector {
    cts: Vec<Ciphertext>,
    params: EncodingParams,
    key_fingerprint: KeyFingerprint,
    label: String,
}

impl EncVector {
    /// Assembles a vector from ciphertexts, checking that every slot and the
    /// encoding modulus belong to `pk`.
    pub fn from_parts(
        pk: &PublicKey,
        params: EncodingParams,
        label: impl Into<String>,
        cts: Vec<Ciphertext>,
    ) -> Result<Self> {
        if params.modulus() != pk.modulus() {
            return Err(Error::ParamsMismatch { label: None });
        }
        for c in &cts {
            pk.check(c)?;
        }
        Ok(EncVector {
            cts,
            params,
            key_fingerprint: pk.fingerprint(),
            label: label.into(),
        })
    }

    pub fn ciphertexts(&self) -> &[Ciphertext] {
        &self.cts
    }

    pub fn dim(&self) -> usize {
        self.cts.len()
    }

    pub fn params(&self) -> &EncodingParams {
        &self.params
    }

    pub fn key_fingerprint(&self) -> KeyFingerprint {
        self.key_fingerprint
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}
