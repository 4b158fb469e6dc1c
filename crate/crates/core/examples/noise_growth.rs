//! Additive noise growth of an inner product over noisy ciphertexts:
//! predicted against simulated variance across dimensions.
//!
//! cargo run --example noise_growth

use ahe_similarity::noise::{predict_variance, sweep, NoiseParams, VarianceForm, XSampler};

fn main() -> ahe_similarity::Result<()> {
    let base = NoiseParams::new(1, 1.0, 4.0, XSampler::UniformInt { lo: -4, hi: 4 })?;
    let dims = [64, 128, 256, 512, 1024];
    let reports = sweep(&base, &dims, 50_000, 1)?;
    println!("{:>5} {:>12} {:>12} {:>12} {:>10} {:>10}", "d", "predicted", "(B² form)", "empirical", "max|e|", "dXB");
    for r in &reports {
        println!(
            "{:>5} {:>12.2} {:>12.2} {:>12.2} {:>10.2} {:>10.0}",
            r.dim,
            r.predicted_variance,
            r.predicted_variance_b_squared,
            r.empirical_variance,
            r.max_observed_abs,
            r.worst_case_bound
        );
    }
    let at_256 = base.with_dim(256)?;
    println!(
        "Var(U(-B,B)) = B²/3, so the two predictions differ by {:.1}x",
        predict_variance(&at_256, VarianceForm::BSquared) / predict_variance(&at_256, VarianceForm::Exact)
    );
    Ok(())
}
