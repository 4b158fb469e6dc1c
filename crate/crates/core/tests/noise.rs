use ahe_similarity::noise::{
    accumulate_noise, predict_variance, simulate, sweep, worst_case_bound, write_sweep_csv, NoiseParams,
    VarianceForm, XSampler,
};
use ahe_similarity::stats::{intercept_weights, linear_fit};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Plain Monte-Carlo variance of `Σ xᵢeᵢ` with `xᵢ ≡ 1`, using a different
/// generator and a two-pass variance.
fn monte_carlo_variance(dim: usize, b: f64, trials: usize, seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..trials)
        .map(|_| (0..dim).map(|_| rng.gen_range(-b..b)).sum())
        .collect();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / trials as f64
}

fn ones(dim: usize, b: f64) -> NoiseParams {
    NoiseParams::new(dim, b, 1.0, XSampler::Constant(1.0)).unwrap()
}

#[test]
fn accumulate_examples() {
    let got = accumulate_noise(&[1.0, 1.0, 1.0], &[0.5, -0.2, 0.1]).unwrap();
    assert!((got - 0.4).abs() <= f64::EPSILON);
    assert_eq!(accumulate_noise(&[3.0, -2.0], &[0.0, 0.0]).unwrap(), 0.0);
    assert!(accumulate_noise(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn predicted_variance_matches_monte_carlo() {
    let params = ones(100, 3.0);
    let predicted = predict_variance(&params, VarianceForm::Exact);
    assert_eq!(predicted, 300.0);
    let oracle = monte_carlo_variance(100, 3.0, 1_000_000, 11);
    assert!((predicted / oracle - 1.0).abs() <= 0.02, "predicted {predicted}, oracle {oracle}");
    assert_eq!(predict_variance(&params, VarianceForm::BSquared), 900.0);

    let zero = NoiseParams::new(1, 5.0, 1.0, XSampler::Constant(0.0)).unwrap();
    assert_eq!(predict_variance(&zero, VarianceForm::Exact), 0.0);
}

#[test]
fn worst_case_examples() {
    assert_eq!(worst_case_bound(3, 2.0, 10.0), 60.0);
    assert_eq!(worst_case_bound(0, 2.0, 10.0), 0.0);
    let params = NoiseParams::new(3, 10.0, 2.0, XSampler::UniformInt { lo: -2, hi: 2 }).unwrap();
    let report = simulate(&params, 50_000, 3).unwrap();
    assert_eq!(report.worst_case_bound, 60.0);
    assert!(report.max_observed_abs <= 60.0);
    assert_eq!(report.bound_violations, 0);
}

#[test]
fn simulated_variance_at_256() {
    let report = simulate(&ones(256, 1.0), 100_000, 5).unwrap();
    let target = 256.0 / 3.0;
    assert!((report.empirical_variance / target - 1.0).abs() <= 0.05, "{report:?}");
    let oracle = monte_carlo_variance(256, 1.0, 100_000, 6);
    assert!((report.empirical_variance / oracle - 1.0).abs() <= 0.05);
}

#[test]
fn single_trial_has_zero_variance() {
    let report = simulate(&ones(10, 2.0), 1, 9).unwrap();
    assert_eq!(report.empirical_variance, 0.0);
    assert!(report.empirical_mean.abs() <= report.worst_case_bound);
}

#[test]
fn doubling_dimension_doubles_variance() {
    for d in [32, 128, 512] {
        let small = simulate(&ones(d, 1.0), 100_000, 21).unwrap();
        let large = simulate(&ones(2 * d, 1.0), 100_000, 22).unwrap();
        let ratio = large.empirical_variance / small.empirical_variance;
        assert!((1.9..=2.1).contains(&ratio), "d = {d}: ratio {ratio}");
    }
}

#[test]
fn sweep_is_linear_bounded_and_centred() {
    let dims = [64usize, 128, 256, 512, 1024];
    let trials = 100_000u64;
    let base = NoiseParams::new(1, 1.0, 3.0, XSampler::UniformInt { lo: -3, hi: 3 }).unwrap();
    let reports = sweep(&base, &dims, trials, 31).unwrap();

    for r in &reports {
        assert_eq!(r.bound_violations, 0);
        assert!(r.max_observed_abs <= r.worst_case_bound);
        let sd_mean = (r.predicted_variance / trials as f64).sqrt();
        assert!(r.empirical_mean.abs() <= 4.0 * sd_mean, "{r:?}");
    }

    // E[x²] for x uniform on {−3..3} is 28/7 = 4, so the slope is 4/3.
    let expected_slope = 4.0 / 3.0;
    let xs: Vec<f64> = dims.iter().map(|&d| d as f64).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.empirical_variance).collect();
    let fit = linear_fit(&xs, &ys).unwrap();
    assert!((fit.slope / expected_slope - 1.0).abs() <= 0.05, "{fit:?}");

    // Each sample variance has Var ≈ (μ₄ − σ⁴)/T; for a sum of d i.i.d.
    // terms μ₄/σ⁴ = 3 + κ/d with κ the per-term excess kurtosis.
    let per_term_kurtosis = {
        // x·e with x ∈ {−3..3} uniform and e ~ U(−1, 1): E[(xe)⁴] / E[(xe)²]².
        let ex4 = (2.0 * (1.0 + 16.0 + 81.0) / 7.0) * (1.0 / 5.0);
        let ex2 = 4.0 * (1.0 / 3.0);
        ex4 / (ex2 * ex2) - 3.0
    };
    let weights = intercept_weights(&xs);
    let intercept_var: f64 = dims
        .iter()
        .zip(&weights)
        .map(|(&d, w)| {
            let sigma2 = expected_slope * d as f64;
            let var_of_var = sigma2 * sigma2 * (2.0 + per_term_kurtosis / d as f64) / trials as f64;
            w * w * var_of_var
        })
        .sum();
    assert!(
        fit.intercept.abs() <= 4.0 * intercept_var.sqrt(),
        "intercept {} vs sd {}",
        fit.intercept,
        intercept_var.sqrt()
    );
}

#[test]
fn wraparound_is_counted_when_modulus_set() {
    let params = ones(64, 1.0).with_modulus(20.0, 5.0);
    let report = simulate(&params, 20_000, 41).unwrap();
    // |5 + e_s| ≥ 10 needs e_s ≥ 5 or e_s ≤ −15, which happens for a
    // noticeable fraction of draws with σ ≈ 4.6.
    assert!(report.decode_failures > 0);
    assert!(report.decode_failures < report.trials);
    assert_eq!(simulate(&ones(64, 1.0), 20_000, 41).unwrap().decode_failures, 0);
}

#[test]
fn sweep_csv_layout() {
    let reports = sweep(&ones(1, 1.0), &[4, 8], 1000, 1).unwrap();
    let mut out = Vec::new();
    write_sweep_csv(&reports, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,predicted_var,empirical_var,max_abs,bound");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("4,"));
    assert!(lines[2].starts_with("8,"));
}

#[test]
fn reports_are_reproducible() {
    let params = NoiseParams::new(40, 2.0, 5.0, XSampler::UniformInt { lo: -5, hi: 5 }).unwrap();
    assert_eq!(simulate(&params, 9000, 77).unwrap(), simulate(&params, 9000, 77).unwrap());
    assert_ne!(simulate(&params, 9000, 77).unwrap(), simulate(&params, 9000, 78).unwrap());
}
