//! Wall time of an encrypted inner product against dimension, and fast
//! against naive plaintext-ciphertext multiplication.
//!
//! cargo run --release --example complexity_scaling

use ahe_similarity::ahe::keygen;
use ahe_similarity::bench::{bench_scalar, bench_scaling};
use rand::rngs::OsRng;

fn main() -> ahe_similarity::Result<()> {
    let (pk, sk) = keygen(512, &mut OsRng)?;
    let report = bench_scaling(&pk, &sk, &[64, 128, 256, 512, 1024, 2048], 3, &mut OsRng)?;
    println!("{:>6} {:>12} {:>12}", "d", "measured s", "model s");
    for ((d, t), m) in report.dims.iter().zip(&report.eval_seconds).zip(report.model_seconds()) {
        println!("{d:>6} {t:>12.5} {m:>12.5}");
    }
    println!(
        "fit: {:.3e} s/dim + {:.3e} s, R² = {:.5}",
        report.slope, report.intercept, report.r_squared
    );

    for row in bench_scalar(&pk, &sk, &[16, 256, 4096, 65536], 3, &mut OsRng)? {
        println!(
            "k = {:>6}: {:>3} mulmods vs {:>6} additions, {:.0}x faster",
            row.exponent, row.fast_mulmods, row.naive_adds, row.speedup
        );
    }
    Ok(())
}
