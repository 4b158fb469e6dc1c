//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | usage or validation error |
//! | 3 | integrity or key-mismatch error |
//! | 4 | I/O error |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::rngs::OsRng;

use crate::ahe::keygen;
use crate::bench::{bench_scalar, bench_scaling};
use crate::encoding::{overflow_budget, EncodingParams, PlainVector, DEFAULT_FRAC_BITS};
use crate::error::{Error, Result};
use crate::noise::{simulate, sweep, write_sweep_csv, NoiseParams, XSampler};
use crate::similarity::{batch_similarity, encrypt_vector, topk};
use crate::store::{
    db_from_vectors, load_db_for_key, load_keys, load_public_key, load_scores, save_db, save_keys,
    save_scores, validate_label,
};

#[derive(Debug, Parser)]
#[command(name = "ahe-sim", version, about = "Inner-product search over Paillier-encrypted vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key pair and print its fingerprint.
    Keygen(KeygenArgs),
    /// Encrypt a CSV of labelled vectors into a vector store.
    EncryptDb(EncryptDbArgs),
    /// Score a plaintext query against an encrypted store.
    Query(QueryArgs),
    /// Decrypt and rank a file of encrypted scores.
    Rank(RankArgs),
    /// Time inner_product across dimensions and fit a line.
    BenchScaling(BenchScalingArgs),
    /// Compare square-and-multiply against repeated addition.
    BenchScalar(BenchScalarArgs),
    /// Monte-Carlo simulation of additive noise growth.
    NoiseSim(NoiseSimArgs),
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long, default_value_t = 2048)]
    pub bits: u64,
    #[arg(long)]
    pub out_pub: PathBuf,
    #[arg(long)]
    pub out_sec: PathBuf,
    /// Overwrite existing key files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct EncryptDbArgs {
    #[arg(long = "pub")]
    pub public: PathBuf,
    /// CSV rows `label,v1,...,vd` without a header.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FRAC_BITS)]
    pub frac_bits: u32,
    /// Bound on the magnitude of every component, database and query alike.
    #[arg(long)]
    pub x_max: f64,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long = "pub")]
    pub public: PathBuf,
    /// Secret key; without it the encrypted scores are written to `--out`.
    #[arg(long = "sec")]
    pub secret: Option<PathBuf>,
    #[arg(long)]
    pub db: PathBuf,
    /// Comma-separated query components.
    #[arg(long, allow_hyphen_values = true)]
    pub query: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Where to write encrypted scores in evaluator mode.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long = "pub")]
    pub public: PathBuf,
    #[arg(long = "sec")]
    pub secret: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct BenchScalingArgs {
    #[arg(long, default_value_t = 512)]
    pub bits: u64,
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024,2048,4096")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
}

#[derive(Debug, Args)]
pub struct BenchScalarArgs {
    #[arg(long, default_value_t = 512)]
    pub bits: u64,
    #[arg(long, value_delimiter = ',', default_value = "0,1,16,256,4096,65536")]
    pub exponents: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
}

#[derive(Debug, Args)]
pub struct NoiseSimArgs {
    #[arg(long = "d", default_value_t = 256)]
    pub dim: usize,
    #[arg(long = "B", default_value_t = 1.0)]
    pub noise_bound: f64,
    #[arg(long = "X", default_value_t = 1.0)]
    pub x_bound: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated dimensions; emits CSV instead of a JSON report.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    /// `const:C` or `uniform:LO:HI`.
    #[arg(long, default_value = "const:1")]
    pub x_sampler: String,
    /// Ciphertext modulus q for decode-failure counting.
    #[arg(long)]
    pub q: Option<f64>,
    /// Scaled message Δ·m added to the noise before the q/2 check.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub offset: f64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Keygen(a) => cmd_keygen(&a, out),
        Command::EncryptDb(a) => cmd_encrypt_db(&a, out),
        Command::Query(a) => cmd_query(&a, out, err),
        Command::Rank(a) => cmd_rank(&a, out),
        Command::BenchScaling(a) => cmd_bench_scaling(&a, out),
        Command::BenchScalar(a) => cmd_bench_scalar(&a, out),
        Command::NoiseSim(a) => cmd_noise_sim(&a, out),
    }
}

fn refuse_overwrite(path: &Path) -> Result<()> {
    if path.exists() {
        return Err(Error::InvalidParameter(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    Ok(())
}

pub fn cmd_keygen(a: &KeygenArgs, out: &mut dyn Write) -> Result<()> {
    if !a.force {
        refuse_overwrite(&a.out_pub)?;
        refuse_overwrite(&a.out_sec)?;
    }
    let (pk, sk) = keygen(a.bits, &mut OsRng)?;
    save_keys(&a.out_pub, &a.out_sec, &pk, &sk)?;
    writeln!(out, "fingerprint {}", pk.fingerprint())?;
    Ok(())
}

/// One parsed CSV row.
struct Row {
    label: String,
    values: Vec<f64>,
}

fn read_csv(path: &Path) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        })?;
    let mut rows = Vec::new();
    let mut dim = None;
    for (i, record) in reader.records().enumerate() {
        let row_no = i + 1;
        let record = record.map_err(|e| Error::InvalidParameter(format!("row {row_no}: {e}")))?;
        let label = record.get(0).unwrap_or_default().to_owned();
        validate_label(&label)
            .map_err(|e| Error::InvalidParameter(format!("row {row_no}: {e}")))?;
        let values = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(col, v)| {
                v.parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("row {row_no} ({label}), column {}: {v:?} is not a number", col + 2))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::InvalidParameter(format!(
                    "row {row_no} ({label}) has {} values, expected {d}",
                    values.len()
                )))
            }
            _ => {}
        }
        rows.push(Row { label, values });
    }
    Ok(rows)
}

pub fn cmd_encrypt_db(a: &EncryptDbArgs, out: &mut dyn Write) -> Result<()> {
    let pk = load_public_key(&a.public)?;
    let params = EncodingParams::for_key(a.frac_bits, a.x_max, &pk)?;
    let rows = read_csv(&a.input)?;
    let dim = rows.first().map_or(0, |r| r.values.len());
    let budget = overflow_budget(&params, dim);
    if !budget.ok {
        return Err(Error::BudgetViolated {
            dim,
            max_safe_dim: budget.max_safe_dim.to_string(),
        });
    }
    let mut vectors = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let v = encrypt_vector(&pk, &params, &row.values, row.label.clone(), &mut OsRng).map_err(|e| match e {
            Error::MagnitudeExceeded { index, value, max_abs } => Error::InvalidParameter(format!(
                "row {} ({}), index {index}: |{value}| exceeds --x-max {max_abs}",
                i + 1,
                row.label
            )),
            other => other,
        })?;
        vectors.push(v);
    }
    let (header, records) = db_from_vectors(&pk, &params, dim, &vectors)?;
    save_db(&a.out, &header, &records)?;
    writeln!(
        out,
        "encrypted {} vectors of dimension {dim}; overflow headroom {:.3e} (max safe dimension {})",
        vectors.len(),
        budget.headroom,
        budget.max_safe_dim
    )?;
    Ok(())
}

fn parse_query(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .enumerate()
        .map(|(i, v)| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("query component {i}: {v:?} is not a number")))
        })
        .collect()
}

pub fn cmd_query(a: &QueryArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    if a.secret.is_none() && a.out.is_none() {
        return Err(Error::InvalidParameter(
            "ranking needs --sec; without it pass --out to write encrypted scores".into(),
        ));
    }
    let pk = load_public_key(&a.public)?;
    let (header, db) = load_db_for_key(&a.db, &pk).inspect_err(|e| {
        if matches!(e, Error::KeyMismatch { .. }) {
            let _ = writeln!(err, "warning: {} was written for a different public key", a.db.display());
        }
    })?;
    let params = EncodingParams::from_header(&header.params, &pk)?;
    let values = parse_query(&a.query)?;
    if values.len() != header.dim {
        return Err(Error::DimensionMismatch {
            expected: header.dim,
            found: values.len(),
            label: Some("query".into()),
        });
    }
    let x = PlainVector::encode(&params, &values)?;
    let scores = batch_similarity(&pk, &x, &db, &mut OsRng)?;

    match &a.secret {
        Some(sec) => {
            let (_, sk) = load_keys(&a.public, sec)?;
            for m in topk(&sk, &params, &scores, a.k)? {
                writeln!(out, "{}", m.to_json_line())?;
            }
            if let Some(path) = &a.out {
                save_scores(path, &pk, &params, &scores)?;
            }
        }
        None => {
            let path = a.out.as_ref().expect("checked above");
            save_scores(path, &pk, &params, &scores)?;
            writeln!(out, "wrote {} encrypted scores to {}", scores.len(), path.display())?;
        }
    }
    Ok(())
}

pub fn cmd_rank(a: &RankArgs, out: &mut dyn Write) -> Result<()> {
    let (pk, sk) = load_keys(&a.public, &a.secret)?;
    let (params, scores) = load_scores(&a.scores, &pk)?;
    for m in topk(&sk, &params, &scores, a.k)? {
        writeln!(out, "{}", m.to_json_line())?;
    }
    Ok(())
}

pub fn cmd_bench_scaling(a: &BenchScalingArgs, out: &mut dyn Write) -> Result<()> {
    let (pk, sk) = keygen(a.bits, &mut OsRng)?;
    let report = bench_scaling(&pk, &sk, &a.dims, a.reps, &mut OsRng)?;
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;
    Ok(())
}

pub fn cmd_bench_scalar(a: &BenchScalarArgs, out: &mut dyn Write) -> Result<()> {
    let (pk, sk) = keygen(a.bits, &mut OsRng)?;
    let rows = bench_scalar(&pk, &sk, &a.exponents, a.reps, &mut OsRng)?;
    writeln!(out, "exponent,fast_seconds,naive_seconds,speedup,fast_mulmods,naive_adds")?;
    for r in rows {
        writeln!(
            out,
            "{},{:e},{:e},{:.2},{},{}",
            r.exponent, r.fast_seconds, r.naive_seconds, r.speedup, r.fast_mulmods, r.naive_adds
        )?;
    }
    Ok(())
}

pub fn cmd_noise_sim(a: &NoiseSimArgs, out: &mut dyn Write) -> Result<()> {
    let sampler: XSampler = a.x_sampler.parse()?;
    let mut params = NoiseParams::new(a.dim, a.noise_bound, a.x_bound, sampler)?;
    if let Some(q) = a.q {
        params = params.with_modulus(q, a.offset);
    }
    match &a.sweep {
        Some(dims) => {
            let reports = sweep(&params, dims, a.trials, a.seed)?;
            write_sweep_csv(&reports, &mut *out)?;
        }
        None => {
            let report = simulate(&params, a.trials, a.seed)?;
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ahe-sim").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["no-such-command"]).0, 2);
        assert_eq!(run_args(&["keygen"]).0, 2);
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn bench_scaling_needs_two_dims() {
        let (code, _, err) = run_args(&["bench-scaling", "--bits", "64", "--dims", "64", "--reps", "1"]);
        assert_eq!(code, 2, "{err}");
    }

    #[test]
    fn noise_sim_is_deterministic() {
        let args = ["noise-sim", "--d", "16", "--B", "1", "--X", "1", "--trials", "500", "--seed", "7"];
        let (c1, a, _) = run_args(&args);
        let (c2, b, _) = run_args(&args);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
        assert!(a.contains("\"empirical_variance\""));
    }

    #[test]
    fn query_parsing() {
        assert_eq!(parse_query("1, 2,-3.5").unwrap(), [1.0, 2.0, -3.5]);
        assert!(parse_query("").unwrap().is_empty());
        assert!(parse_query("1,x").is_err());
    }
}
