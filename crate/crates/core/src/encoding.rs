//! Signed fixed-point encoding of real vectors into plaintext residues.
//!
//! A real `v` becomes `round(v · 2^f) mod N` (ties to even); residues below
//! `N/2` are nonnegative, the rest stand for `r − N`. The inner product of
//! two encoded vectors carries scale `2^(2f)` and decodes exactly as long as
//! `d · (X · 2^f)² < N/2`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::ahe::{PlainResidue, PublicKey};
use crate::error::{Error, Result};

/// Default fractional bits for real-valued embeddings.
pub const DEFAULT_FRAC_BITS: u32 = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct EncodingParams {
    frac_bits: u32,
    max_abs: f64,
    modulus: BigUint,
    scaled_bound: BigUint,
}

/// The serialized form stored next to every encrypted vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsHeader {
    pub f: u32,
    pub x_max: f64,
}

impl EncodingParams {
    pub fn new(frac_bits: u32, max_abs: f64, modulus: &BigUint) -> Result<Self> {
        if !(max_abs.is_finite() && max_abs > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "max_abs must be a positive finite number, got {max_abs}"
            )));
        }
        let scaled = max_abs * pow2(frac_bits as i32);
        if !scaled.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "max_abs · 2^{frac_bits} overflows"
            )));
        }
        let scaled_bound = BigUint::from_f64(scaled.ceil()).expect("finite and positive");
        if &scaled_bound * 2u32 >= *modulus {
            return Err(Error::InvalidParameter(format!(
                "max_abs · 2^{frac_bits} must be below N/2"
            )));
        }
        Ok(EncodingParams {
            frac_bits,
            max_abs,
            modulus: modulus.clone(),
            scaled_bound,
        })
    }

    pub fn for_key(frac_bits: u32, max_abs: f64, pk: &PublicKey) -> Result<Self> {
        Self::new(frac_bits, max_abs, pk.modulus())
    }

    pub fn from_header(header: &ParamsHeader, pk: &PublicKey) -> Result<Self> {
        Self::for_key(header.f, header.x_max, pk)
    }

    pub fn header(&self) -> ParamsHeader {
        ParamsHeader {
            f: self.frac_bits,
            x_max: self.max_abs,
        }
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// `ceil(X · 2^f)`, the largest magnitude an encoded component can take.
    pub fn scaled_bound(&self) -> &BigUint {
        &self.scaled_bound
    }

    /// Scales `v` onto the grid without reducing modulo `N`.
    pub fn scale(&self, v: f64) -> Result<BigInt> {
        self.scale_at(0, v)
    }

    fn scale_at(&self, index: usize, v: f64) -> Result<BigInt> {
        if !v.is_finite() || v.abs() > self.max_abs {
            return Err(Error::MagnitudeExceeded {
                index,
                value: v,
                max_abs: self.max_abs,
            });
        }
        let scaled = (v * pow2(self.frac_bits as i32)).round_ties_even();
        Ok(BigInt::from_f64(scaled).expect("finite"))
    }

    fn to_residue(&self, k: &BigInt) -> PlainResidue {
        let n = BigInt::from(self.modulus.clone());
        PlainResidue::new(k.mod_floor(&n).to_biguint().expect("nonnegative"))
    }
}

/// Encodes one real as a residue.
pub fn encode_signed(params: &EncodingParams, v: f64) -> Result<PlainResidue> {
    Ok(params.to_residue(&params.scale(v)?))
}

/// Maps a residue to its signed representative in `[−N/2, N/2)`.
pub fn lift_signed(r: &PlainResidue, modulus: &BigUint) -> BigInt {
    let v = r.value();
    if v * 2u32 < *modulus {
        BigInt::from(v.clone())
    } else {
        BigInt::from(v.clone()) - BigInt::from(modulus.clone())
    }
}

pub fn decode_signed(params: &EncodingParams, r: &PlainResidue) -> f64 {
    to_f64(&lift_signed(r, &params.modulus)) * pow2(-(params.frac_bits as i32))
}

/// The signed score numerator: a decrypted inner product before division by
/// `2^(2f)`.
pub fn decode_score_scaled(params: &EncodingParams, r: &PlainResidue) -> BigInt {
    lift_signed(r, &params.modulus)
}

/// Decodes a decrypted inner product of two vectors encoded with `params`.
pub fn decode_score(params: &EncodingParams, r: &PlainResidue) -> f64 {
    to_f64(&decode_score_scaled(params, r)) * pow2(-2 * params.frac_bits as i32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetReport {
    pub ok: bool,
    /// `(N/2) / (d · (X·2^f)²)`; above 1 when the budget holds.
    pub headroom: f64,
    /// Largest `d` for which the budget holds.
    pub max_safe_dim: BigUint,
}

/// Checks `d · (X·2^f)² < N/2`, the condition for an inner product of two
/// in-range vectors to decode without wraparound.
pub fn overflow_budget(params: &EncodingParams, dim: usize) -> BudgetReport {
    let m2 = &params.scaled_bound * &params.scaled_bound;
    let n = &params.modulus;
    let used = BigUint::from(dim) * &m2;
    let ok = &used * 2u32 < *n;
    let headroom = if used.is_zero() {
        f64::INFINITY
    } else {
        ratio(n, &(used * 2u32))
    };
    BudgetReport {
        ok,
        headroom,
        max_safe_dim: (n - 1u32) / (m2 * 2u32),
    }
}

/// A plaintext query vector already scaled onto the fixed-point grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PlainVector {
    components: Vec<BigInt>,
    params: EncodingParams,
}

impl PlainVector {
    /// Scales and rounds real components.
    pub fn encode(params: &EncodingParams, values: &[f64]) -> Result<Self> {
        let components = values
            .iter()
            .enumerate()
            .map(|(i, &v)| params.scale_at(i, v))
            .collect::<Result<_>>()?;
        Ok(PlainVector {
            components,
            params: params.clone(),
        })
    }

    /// Wraps components that are already scaled by `2^f`.
    pub fn from_scaled(params: &EncodingParams, components: Vec<BigInt>) -> Result<Self> {
        for (index, c) in components.iter().enumerate() {
            if c.magnitude() > params.scaled_bound() {
                return Err(Error::MagnitudeExceeded {
                    index,
                    value: to_f64(c) * pow2(-(params.frac_bits as i32)),
                    max_abs: params.max_abs,
                });
            }
        }
        Ok(PlainVector {
            components,
            params: params.clone(),
        })
    }

    pub fn from_i64(params: &EncodingParams, components: &[i64]) -> Result<Self> {
        Self::from_scaled(params, components.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn components(&self) -> &[BigInt] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn params(&self) -> &EncodingParams {
        &self.params
    }

    pub fn is_nonnegative(&self) -> bool {
        self.components.iter().all(|c| c.sign() != Sign::Minus)
    }
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

fn to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(if v.sign() == Sign::Minus {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    // Shift both down so the quotient survives conversion to f64.
    let shift = a.bits().max(b.bits()).saturating_sub(1000);
    let a = (a >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (b >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}
