//! Additive-noise model for an inner product over noisy ciphertexts.
//!
//! Each slot is modelled as `Enc(yᵢ) = yᵢ + eᵢ mod q` with `eᵢ ~ U(−B, B)`;
//! the plaintext-weighted sum then carries noise `e_s = Σ xᵢ eᵢ`. Paillier
//! itself is exact, so this module works over reals and is independent of
//! the [`crate::ahe`] backend.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::Moments;

/// Trials per independently seeded chunk. Chunk boundaries are fixed, so a
/// report depends only on the seed and never on the worker count.
const CHUNK_TRIALS: u64 = 4096;

/// Distribution of the plaintext weights `xᵢ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum XSampler {
    Constant(f64),
    /// Uniform over the integers `lo..=hi`.
    UniformInt { lo: i64, hi: i64 },
}

impl XSampler {
    /// `E[xᵢ²]`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            XSampler::Constant(c) => c * c,
            XSampler::UniformInt { lo, hi } => {
                let count = (hi as i128 - lo as i128 + 1) as f64;
                (sum_of_squares(lo, hi) as f64) / count
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        match *self {
            XSampler::Constant(c) => c.abs(),
            XSampler::UniformInt { lo, hi } => (lo as f64).abs().max((hi as f64).abs()),
        }
    }
}

/// `Σ_{i=lo}^{hi} i²` using `Σ_{i=1}^{n} i² = n(n+1)(2n+1)/6`.
fn sum_of_squares(lo: i64, hi: i64) -> i128 {
    let upto = |n: i128| n * (n + 1) * (2 * n + 1) / 6;
    let (lo, hi) = (lo as i128, hi as i128);
    if lo >= 0 {
        upto(hi) - upto(lo - 1)
    } else if hi <= 0 {
        upto(-lo) - upto(-hi - 1)
    } else {
        upto(-lo) + upto(hi)
    }
}

impl fmt::Display for XSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XSampler::Constant(c) => write!(f, "const:{c}"),
            XSampler::UniformInt { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}

impl FromStr for XSampler {
    type Err = Error;

    /// `const:<value>` or `uniform:<lo>:<hi>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad x sampler {s:?}; use const:C or uniform:LO:HI"));
        let mut parts = s.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("const"), Some(c), None, None) => {
                let c: f64 = c.parse().map_err(|_| bad())?;
                if !c.is_finite() {
                    return Err(bad());
                }
                Ok(XSampler::Constant(c))
            }
            (Some("uniform"), Some(lo), Some(hi), None) => {
                let lo: i64 = lo.parse().map_err(|_| bad())?;
                let hi: i64 = hi.parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                Ok(XSampler::UniformInt { lo, hi })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseParams {
    pub dim: usize,
    /// `B`: each `eᵢ` is drawn from `U(−B, B)`.
    pub noise_bound: f64,
    /// `X`: bound on `|xᵢ|`.
    pub x_bound: f64,
    pub x_sampler: XSampler,
    /// Ciphertext modulus `q`; enables decode-failure counting.
    pub modulus_q: Option<f64>,
    /// The scaled message `Δ·m` the noise is added to when checking for
    /// wraparound. Zero unless set.
    pub message_offset: f64,
}

impl NoiseParams {
    pub fn new(dim: usize, noise_bound: f64, x_bound: f64, x_sampler: XSampler) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(noise_bound.is_finite() && noise_bound > 0.0) {
            return Err(Error::InvalidParameter(format!("B must be positive, got {noise_bound}")));
        }
        if !(x_bound.is_finite() && x_bound > 0.0) {
            return Err(Error::InvalidParameter(format!("X must be positive, got {x_bound}")));
        }
        if x_sampler.max_abs() > x_bound {
            return Err(Error::InvalidParameter(format!(
                "x sampler {x_sampler} exceeds X = {x_bound}"
            )));
        }
        Ok(NoiseParams {
            dim,
            noise_bound,
            x_bound,
            x_sampler,
            modulus_q: None,
            message_offset: 0.0,
        })
    }

    pub fn with_modulus(mut self, q: f64, message_offset: f64) -> Self {
        self.modulus_q = Some(q);
        self.message_offset = message_offset;
        self
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        let mut p = NoiseParams::new(dim, self.noise_bound, self.x_bound, self.x_sampler)?;
        p.modulus_q = self.modulus_q;
        p.message_offset = self.message_offset;
        Ok(p)
    }
}

/// Which closed form [`predict_variance`] evaluates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VarianceForm {
    /// `d · (B²/3) · E[x²]`, using `Var(U(−B, B)) = B²/3`.
    #[default]
    Exact,
    /// `d · B² · E[x²]`, i.e. taking `Var(eᵢ) = B²`.
    BSquared,
}

/// `e_s = Σ xᵢ eᵢ` as a compensated dot product: the rounding error of
/// every product (via FMA) and every addition (via TwoSum) is carried in a
/// second accumulator, so the result is as accurate as if computed in twice
/// the working precision and then rounded.
pub fn accumulate_noise(x: &[f64], e: &[f64]) -> Result<f64> {
    if x.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: e.len(),
            label: None,
        });
    }
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for (xi, ei) in x.iter().zip(e) {
        let product = xi * ei;
        let product_err = xi.mul_add(*ei, -product);
        let t = sum + product;
        let back = t - sum;
        let add_err = (sum - (t - back)) + (product - back);
        sum = t;
        compensation += add_err + product_err;
    }
    Ok(sum + compensation)
}

pub fn predict_variance(params: &NoiseParams, form: VarianceForm) -> f64 {
    let b2 = params.noise_bound * params.noise_bound;
    let per_slot = match form {
        VarianceForm::Exact => b2 / 3.0,
        VarianceForm::BSquared => b2,
    };
    params.dim as f64 * per_slot * params.x_sampler.second_moment()
}

/// `|e_s| ≤ d · X · B`.
pub fn worst_case_bound(dim: usize, x_bound: f64, noise_bound: f64) -> f64 {
    dim as f64 * x_bound * noise_bound
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseReport {
    pub dim: usize,
    pub predicted_variance: f64,
    pub predicted_variance_b_squared: f64,
    pub empirical_variance: f64,
    pub empirical_mean: f64,
    pub worst_case_bound: f64,
    pub max_observed_abs: f64,
    pub trials: u64,
    pub bound_violations: u64,
    /// Trials with `|Δ·m + e_s| ≥ q/2`; always zero without a modulus.
    pub decode_failures: u64,
}

#[derive(Clone, Copy, Default)]
struct ChunkStats {
    moments: Moments,
    max_abs: f64,
    violations: u64,
    failures: u64,
}

/// Monte-Carlo estimate of the `e_s` distribution. Deterministic for a given
/// seed regardless of how many worker threads run the chunks.
pub fn simulate(params: &NoiseParams, trials: u64, seed: u64) -> Result<NoiseReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let bound = worst_case_bound(params.dim, params.x_bound, params.noise_bound);
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let per_chunk: Vec<ChunkStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK_TRIALS.min(trials - c * CHUNK_TRIALS);
            run_chunk(params, bound, seed, c, n)
        })
        .collect();

    let mut total = ChunkStats::default();
    for s in &per_chunk {
        total.moments.merge(&s.moments);
        total.max_abs = total.max_abs.max(s.max_abs);
        total.violations += s.violations;
        total.failures += s.failures;
    }
    Ok(NoiseReport {
        dim: params.dim,
        predicted_variance: predict_variance(params, VarianceForm::Exact),
        predicted_variance_b_squared: predict_variance(params, VarianceForm::BSquared),
        empirical_variance: total.moments.variance(),
        empirical_mean: total.moments.mean,
        worst_case_bound: bound,
        max_observed_abs: total.max_abs,
        trials,
        bound_violations: total.violations,
        decode_failures: total.failures,
    })
}

fn run_chunk(params: &NoiseParams, bound: f64, seed: u64, chunk: u64, trials: u64) -> ChunkStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let b = params.noise_bound;
    let noise = Uniform::new(-b, b);
    let ints = match params.x_sampler {
        XSampler::UniformInt { lo, hi } => Some(Uniform::new_inclusive(lo, hi)),
        XSampler::Constant(_) => None,
    };
    let mut stats = ChunkStats::default();
    for _ in 0..trials {
        let mut e_s = 0.0f64;
        for _ in 0..params.dim {
            let x = match (params.x_sampler, &ints) {
                (XSampler::Constant(c), _) => c,
                (_, Some(u)) => u.sample(&mut rng) as f64,
                _ => unreachable!(),
            };
            e_s += x * noise.sample(&mut rng);
        }
        stats.moments.push(e_s);
        stats.max_abs = stats.max_abs.max(e_s.abs());
        if e_s.abs() > bound {
            stats.violations += 1;
        }
        if let Some(q) = params.modulus_q {
            if (params.message_offset + e_s).abs() >= q / 2.0 {
                stats.failures += 1;
            }
        }
    }
    stats
}

/// Runs [`simulate`] once per dimension in `dims`, all with the same seed.
pub fn sweep(base: &NoiseParams, dims: &[usize], trials: u64, seed: u64) -> Result<Vec<NoiseReport>> {
    dims.iter()
        .map(|&d| simulate(&base.with_dim(d)?, trials, seed))
        .collect()
}

/// CSV with header `d,predicted_var,empirical_var,max_abs,bound`.
pub fn write_sweep_csv<W: Write>(reports: &[NoiseReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "predicted_var", "empirical_var", "max_abs", "bound"])
        .map_err(csv_err)?;
    for r in reports {
        w.write_record([
            r.dim.to_string(),
            r.predicted_variance.to_string(),
            r.empirical_variance.to_string(),
            r.max_observed_abs.to_string(),
            r.worst_case_bound.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}
