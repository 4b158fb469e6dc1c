//! Timing harness for the cost model `O(d · (T_PCM + T_Add) + T_Dec)`.
//!
//! Every measurement is the median over `reps` timed runs after one
//! discarded warm-up run, and every timed result is decrypted and checked
//! against a plaintext recomputation before it is reported. Runs are
//! sequential.

use std::time::Instant;

use num_bigint::{BigInt, BigUint, RandBigInt};
use rand::{CryptoRng, Rng, RngCore};
use serde::Serialize;

use crate::ahe::pow::square_and_multiply_cost;
use crate::ahe::{PlainResidue, PublicKey, SecretKey};
use crate::encoding::{decode_score_scaled, EncodingParams, PlainVector};
use crate::error::{Error, Result};
use crate::similarity::{encrypt_vector, inner_product, EncVector};
use crate::stats::{linear_fit, median};

/// Bit length of the plaintext weights used by [`bench_scaling`].
pub const SCALING_X_BITS: u32 = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpTimings {
    /// One plaintext-ciphertext multiplication by a `SCALING_X_BITS`-bit
    /// scalar.
    pub t_pcm: f64,
    pub t_add: f64,
    pub t_dec: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub key_bits: u64,
    pub dims: Vec<usize>,
    /// Median `inner_product` wall time per dimension, in seconds.
    pub eval_seconds: Vec<f64>,
    pub op_seconds: OpTimings,
    /// Fit of `eval_seconds ≈ slope · d + intercept`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl BenchReport {
    /// Ratio of consecutive evaluation times.
    pub fn step_ratios(&self) -> Vec<f64> {
        self.eval_seconds.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// The cost model's prediction `d · (T_PCM + T_Add) + T_Dec` for each
    /// measured dimension.
    pub fn model_seconds(&self) -> Vec<f64> {
        let t = &self.op_seconds;
        self.dims
            .iter()
            .map(|&d| d as f64 * (t.t_pcm + t.t_add) + t.t_dec)
            .collect()
    }
}

fn time_median<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut last = f()?;
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        last = f()?;
        samples.push(start.elapsed().as_secs_f64());
    }
    Ok((median(&samples), last))
}

/// Measures `inner_product` time for each `d` in `dims` (strictly
/// increasing, at least two) and fits a line through the medians.
pub fn bench_scaling<R>(
    pk: &PublicKey,
    sk: &SecretKey,
    dims: &[usize],
    reps: usize,
    rng: &mut R,
) -> Result<BenchReport>
where
    R: RngCore + CryptoRng + ?Sized,
{
    if dims.len() < 2 {
        return Err(Error::InvalidParameter("at least two dimensions are required".into()));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) || dims[0] == 0 {
        return Err(Error::InvalidParameter("dimensions must be positive and strictly increasing".into()));
    }
    let max_d = *dims.last().expect("non-empty");
    let x_max = f64::from(1u32 << SCALING_X_BITS);
    let params = EncodingParams::for_key(0, x_max, pk)?;

    let lo = 1i64 << (SCALING_X_BITS - 1);
    let hi = 1i64 << SCALING_X_BITS;
    let xs: Vec<i64> = (0..max_d).map(|_| rng.gen_range(lo..hi)).collect();
    let ys: Vec<i64> = (0..max_d).map(|_| rng.gen_range(-hi + 1..hi)).collect();
    let y_values: Vec<f64> = ys.iter().map(|&v| v as f64).collect();
    let y_full = encrypt_vector(pk, &params, &y_values, "bench", rng)?;

    let cases = dims
        .iter()
        .map(|&d| {
            let x = PlainVector::from_i64(&params, &xs[..d])?;
            let y = EncVector::from_parts(pk, params.clone(), "bench", y_full.ciphertexts()[..d].to_vec())?;
            let expected: i128 = xs[..d].iter().zip(&ys[..d]).map(|(&a, &b)| a as i128 * b as i128).sum();
            Ok((d, x, y, expected))
        })
        .collect::<Result<Vec<_>>>()?;

    // Rounds visit every dimension once, so slow periods on the machine are
    // spread over all dimensions instead of bending the fitted line.
    let mut samples = vec![Vec::with_capacity(reps); cases.len()];
    for round in 0..=reps.max(1) {
        for ((d, x, y, expected), times) in cases.iter().zip(samples.iter_mut()) {
            let start = Instant::now();
            let score = inner_product(pk, x, y, rng)?;
            let secs = start.elapsed().as_secs_f64();
            let got = decode_score_scaled(&params, &sk.decrypt(&score)?);
            if got != BigInt::from(*expected) {
                return Err(Error::Verification(format!(
                    "inner product at d = {d} decoded to {got}, expected {expected}"
                )));
            }
            // Round 0 is the warm-up.
            if round > 0 {
                times.push(secs);
            }
        }
    }
    let eval_seconds: Vec<f64> = samples.iter().map(|t| median(t)).collect();

    let op_seconds = bench_ops(pk, sk, reps, rng)?;
    let fit = linear_fit(
        &dims.iter().map(|&d| d as f64).collect::<Vec<_>>(),
        &eval_seconds,
    )
    .expect("at least two distinct dimensions");
    Ok(BenchReport {
        key_bits: pk.bits(),
        dims: dims.to_vec(),
        eval_seconds,
        op_seconds,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
    })
}

/// Per-operation timings, each the median of `reps` batches of 64 calls.
fn bench_ops<R>(pk: &PublicKey, sk: &SecretKey, reps: usize, rng: &mut R) -> Result<OpTimings>
where
    R: RngCore + CryptoRng + ?Sized,
{
    const BATCH: u32 = 64;
    let a = pk.encrypt(&PlainResidue::new(rng.gen_biguint_below(pk.modulus())), rng)?;
    let b = pk.encrypt(&PlainResidue::new(rng.gen_biguint_below(pk.modulus())), rng)?;
    let k = BigInt::from(rng.gen_range((1u64 << (SCALING_X_BITS - 1))..(1u64 << SCALING_X_BITS)));
    let (t_pcm, _) = time_median(reps, || {
        (0..BATCH).try_for_each(|_| pk.scalar_mul(&a, &k).map(drop))
    })?;
    let (t_add, _) = time_median(reps, || (0..BATCH).try_for_each(|_| pk.add(&a, &b).map(drop)))?;
    let (t_dec, _) = time_median(reps, || (0..BATCH).try_for_each(|_| sk.decrypt(&a).map(drop)))?;
    let per = f64::from(BATCH);
    Ok(OpTimings {
        t_pcm: t_pcm / per,
        t_add: t_add / per,
        t_dec: t_dec / per,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarRow {
    pub exponent: u64,
    pub fast_seconds: f64,
    pub naive_seconds: f64,
    /// `naive_seconds / fast_seconds`.
    pub speedup: f64,
    /// Modular multiplications done by square-and-multiply.
    pub fast_mulmods: u64,
    /// Ciphertext additions done by repeated addition.
    pub naive_adds: u64,
}

/// Times square-and-multiply against repeated addition for each exponent,
/// after checking that both decrypt to the same plaintext.
pub fn bench_scalar<R>(
    pk: &PublicKey,
    sk: &SecretKey,
    exponents: &[u64],
    reps: usize,
    rng: &mut R,
) -> Result<Vec<ScalarRow>>
where
    R: RngCore + CryptoRng + ?Sized,
{
    let mut rows = Vec::with_capacity(exponents.len());
    for &e in exponents {
        let m = rng.gen_biguint_below(pk.modulus());
        let c = pk.encrypt(&PlainResidue::new(m.clone()), rng)?;
        let k = BigInt::from(e);
        let (fast_seconds, fast) = time_median(reps, || pk.scalar_mul(&c, &k))?;
        let (naive_seconds, naive) = time_median(reps, || pk.scalar_mul_naive(&c, &k, rng))?;
        let expected = (&m * e) % pk.modulus();
        let (df, dn) = (sk.decrypt(&fast)?, sk.decrypt(&naive)?);
        if df != dn || df.value() != &expected {
            return Err(Error::Verification(format!(
                "exponent {e}: fast and naive results disagree"
            )));
        }
        rows.push(ScalarRow {
            exponent: e,
            fast_seconds,
            naive_seconds,
            speedup: naive_seconds / fast_seconds,
            fast_mulmods: square_and_multiply_cost(&BigUint::from(e)),
            naive_adds: e.saturating_sub(1),
        });
    }
    Ok(rows)
}
