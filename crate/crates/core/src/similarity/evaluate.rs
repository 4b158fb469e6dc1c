//! Evaluator-side operations. Nothing here can decrypt.

use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::EncVector;
use crate::ahe::{Ciphertext, PublicKey};
use crate::encoding::{encode_signed, overflow_budget, EncodingParams, PlainVector};
use crate::error::{Error, Result};

/// Encodes and encrypts `values` component by component with fresh
/// randomness per slot.
///
/// Per-slot generators are seeded from `rng` up front, so the output is a
/// deterministic function of `rng` even though slots are encrypted in
/// parallel.
pub fn encrypt_vector<R>(
    pk: &PublicKey,
    params: &EncodingParams,
    values: &[f64],
    label: impl Into<String>,
    rng: &mut R,
) -> Result<EncVector>
where
    R: RngCore + CryptoRng + ?Sized,
{
    if params.modulus() != pk.modulus() {
        return Err(Error::ParamsMismatch { label: None });
    }
    let residues = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            encode_signed(params, v).map_err(|e| match e {
                Error::MagnitudeExceeded { value, max_abs, .. } => Error::MagnitudeExceeded {
                    index: i,
                    value,
                    max_abs,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let seeds = draw_seeds(rng, residues.len());
    let cts = residues
        .par_iter()
        .zip(seeds)
        .map(|(m, seed)| pk.encrypt(m, &mut ChaCha20Rng::from_seed(seed)))
        .collect::<Result<Vec<_>>>()?;
    EncVector::from_parts(pk, params.clone(), label, cts)
}

/// `Enc(Σ xᵢyᵢ) = ⊗ᵢ Enc(yᵢ)^{xᵢ}` with each power computed by
/// square-and-multiply, folded left to right, and rerandomized.
pub fn inner_product<R>(pk: &PublicKey, x: &PlainVector, y: &EncVector, rng: &mut R) -> Result<Ciphertext>
where
    R: RngCore + CryptoRng + ?Sized,
{
    check_operands(pk, x, y)?;
    let mut acc: Option<Ciphertext> = None;
    for (xi, ci) in x.components().iter().zip(y.ciphertexts()) {
        let term = pk.scalar_mul(ci, xi)?;
        acc = Some(match acc {
            None => term,
            Some(a) => pk.add(&a, &term)?,
        });
    }
    pk.rerandomize(&acc.unwrap_or_else(|| pk.identity()), rng)
}

/// `⊗ᵢ ⊗_{j=1}^{xᵢ} Enc(yᵢ)`: the literal double product, one ciphertext
/// multiplication per unit of each `xᵢ`. Components must be nonnegative.
pub fn inner_product_naive<R>(
    pk: &PublicKey,
    x: &PlainVector,
    y: &EncVector,
    rng: &mut R,
) -> Result<Ciphertext>
where
    R: RngCore + CryptoRng + ?Sized,
{
    check_operands(pk, x, y)?;
    if let Some(neg) = x.components().iter().find(|c| c.sign() == num_bigint::Sign::Minus) {
        return Err(Error::NegativeScalar(neg.to_string()));
    }
    let mut acc: Option<Ciphertext> = None;
    for (xi, ci) in x.components().iter().zip(y.ciphertexts()) {
        let term = pk.scalar_mul_naive(ci, xi, rng)?;
        acc = Some(match acc {
            None => term,
            Some(a) => pk.add(&a, &term)?,
        });
    }
    pk.rerandomize(&acc.unwrap_or_else(|| pk.identity()), rng)
}

/// [`inner_product`] against every entry of `db`, in order.
///
/// All entries are validated before any work starts; the first bad one is
/// reported. Entries are evaluated in parallel, each with its own generator
/// seeded from `rng`.
pub fn batch_similarity<R>(
    pk: &PublicKey,
    x: &PlainVector,
    db: &[EncVector],
    rng: &mut R,
) -> Result<Vec<(String, Ciphertext)>>
where
    R: RngCore + CryptoRng + ?Sized,
{
    for y in db {
        check_operands(pk, x, y)?;
    }
    let seeds = draw_seeds(rng, db.len());
    db.par_iter()
        .zip(seeds)
        .map(|(y, seed)| {
            let score = inner_product(pk, x, y, &mut ChaCha20Rng::from_seed(seed))?;
            Ok((y.label().to_owned(), score))
        })
        .collect()
}

fn check_operands(pk: &PublicKey, x: &PlainVector, y: &EncVector) -> Result<()> {
    if y.key_fingerprint() != pk.fingerprint() {
        return Err(Error::KeyMismatch {
            expected: pk.fingerprint(),
            found: y.key_fingerprint(),
        });
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
            label: Some(y.label().to_owned()),
        });
    }
    if x.params() != y.params() {
        return Err(Error::ParamsMismatch {
            label: Some(y.label().to_owned()),
        });
    }
    let budget = overflow_budget(y.params(), y.dim());
    if !budget.ok {
        return Err(Error::BudgetViolated {
            dim: y.dim(),
            max_safe_dim: budget.max_safe_dim.to_string(),
        });
    }
    Ok(())
}

fn draw_seeds<R: RngCore + ?Sized>(rng: &mut R, count: usize) -> Vec<[u8; 32]> {
    (0..count)
        .map(|_| {
            let mut seed = [0u8; 32];
            rng.fill_bytes(&mut seed);
            seed
        })
        .collect()
}
