use std::sync::OnceLock;

use ahe_similarity::ahe::{keygen, PublicKey, SecretKey};
use ahe_similarity::encoding::{
    decode_score, decode_score_scaled, decode_signed, overflow_budget, EncodingParams,
    PlainVector,
};
use ahe_similarity::similarity::{
    batch_similarity, encrypt_vector, inner_product, inner_product_naive, topk, EncVector,
};
use ahe_similarity::Error;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn key() -> &'static (PublicKey, SecretKey) {
    static KEY: OnceLock<(PublicKey, SecretKey)> = OnceLock::new();
    KEY.get_or_init(|| keygen(512, &mut ChaCha20Rng::seed_from_u64(21)).unwrap())
}

fn int_params(x_max: f64) -> EncodingParams {
    EncodingParams::for_key(0, x_max, &key().0).unwrap()
}

fn dot(x: &[i64], y: &[i64]) -> i128 {
    x.iter().zip(y).map(|(&a, &b)| a as i128 * b as i128).sum()
}

fn as_f64(v: &[i64]) -> Vec<f64> {
    v.iter().map(|&c| c as f64).collect()
}

fn score(params: &EncodingParams, c: &ahe_similarity::ahe::Ciphertext) -> BigInt {
    decode_score_scaled(params, &key().1.decrypt(c).unwrap())
}

#[test]
fn encrypt_vector_round_trips_and_is_randomized() {
    let (pk, sk) = key();
    let params = int_params(100.0);
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let a = encrypt_vector(pk, &params, &[4.0, 5.0, 6.0], "a", &mut rng).unwrap();
    let b = encrypt_vector(pk, &params, &[4.0, 5.0, 6.0], "b", &mut rng).unwrap();
    let decoded: Vec<f64> = a
        .ciphertexts()
        .iter()
        .map(|c| decode_signed(&params, &sk.decrypt(c).unwrap()))
        .collect();
    assert_eq!(decoded, [4.0, 5.0, 6.0]);
    for (ca, cb) in a.ciphertexts().iter().zip(b.ciphertexts()) {
        assert_ne!(ca.value(), cb.value());
    }
    let empty = encrypt_vector(pk, &params, &[], "empty", &mut rng).unwrap();
    assert_eq!(empty.dim(), 0);
}

#[test]
fn encrypt_vector_names_offending_index() {
    let (pk, _) = key();
    let params = int_params(10.0);
    let err = encrypt_vector(pk, &params, &[1.0, -2.0, 11.0], "v", &mut ChaCha20Rng::seed_from_u64(2))
        .unwrap_err();
    assert!(matches!(err, Error::MagnitudeExceeded { index: 2, .. }), "{err}");
}

#[test]
fn inner_product_examples() {
    let (pk, _) = key();
    let params = int_params(100.0);
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let y = encrypt_vector(pk, &params, &[4.0, 5.0, 6.0], "y", &mut rng).unwrap();

    let x = PlainVector::from_i64(&params, &[1, 2, 3]).unwrap();
    let fast = inner_product(pk, &x, &y, &mut rng).unwrap();
    let naive = inner_product_naive(pk, &x, &y, &mut rng).unwrap();
    assert_eq!(score(&params, &fast), BigInt::from(32));
    assert_eq!(score(&params, &naive), BigInt::from(32));

    let zero = PlainVector::from_i64(&params, &[0, 0, 0]).unwrap();
    assert_eq!(score(&params, &inner_product(pk, &zero, &y, &mut rng).unwrap()), BigInt::from(0));
    assert_eq!(score(&params, &inner_product_naive(pk, &zero, &y, &mut rng).unwrap()), BigInt::from(0));

    for (i, expected) in [4, 5, 6].into_iter().enumerate() {
        let mut unit = [0i64; 3];
        unit[i] = 1;
        let e = PlainVector::from_i64(&params, &unit).unwrap();
        assert_eq!(score(&params, &inner_product(pk, &e, &y, &mut rng).unwrap()), BigInt::from(expected));
    }
}

#[test]
fn inner_product_with_fractional_bits() {
    let (pk, sk) = key();
    let params = EncodingParams::for_key(16, 8.0, pk).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let y = encrypt_vector(pk, &params, &[0.5, -1.25, 3.0], "y", &mut rng).unwrap();
    let x = PlainVector::encode(&params, &[2.0, 4.0, -0.75]).unwrap();
    let got = decode_score(&params, &sk.decrypt(&inner_product(pk, &x, &y, &mut rng).unwrap()).unwrap());
    // All inputs lie on the 2⁻¹⁶ grid, so the result is exact.
    assert_eq!(got, 0.5 * 2.0 + -1.25 * 4.0 + 3.0 * -0.75);
}

#[test]
fn inner_product_rejects_bad_operands() {
    let (pk, _) = key();
    let params = int_params(100.0);
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let y = encrypt_vector(pk, &params, &[1.0, 2.0], "y", &mut rng).unwrap();

    let short = PlainVector::from_i64(&params, &[1]).unwrap();
    assert!(matches!(inner_product(pk, &short, &y, &mut rng), Err(Error::DimensionMismatch { .. })));

    let other = EncodingParams::for_key(4, 100.0, pk).unwrap();
    let x = PlainVector::from_i64(&other, &[1, 1]).unwrap();
    assert!(matches!(inner_product(pk, &x, &y, &mut rng), Err(Error::ParamsMismatch { .. })));

    let negative = PlainVector::from_i64(&params, &[1, -1]).unwrap();
    assert!(matches!(inner_product_naive(pk, &negative, &y, &mut rng), Err(Error::NegativeScalar(_))));
}

#[test]
fn inner_product_rejects_budget_violation() {
    let (pk, _) = key();
    // With 2⁵¹¹ < N < 2⁵¹² and M = 2²⁵⁵, d·2M² < N holds for d = 1 only.
    let params = EncodingParams::for_key(0, 2f64.powi(255), pk).unwrap();
    assert!(overflow_budget(&params, 1).ok);
    assert!(!overflow_budget(&params, 2).ok);
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let y = encrypt_vector(pk, &params, &[1.0, 1.0], "y", &mut rng).unwrap();
    let x = PlainVector::from_i64(&params, &[1, 1]).unwrap();
    assert!(matches!(inner_product(pk, &x, &y, &mut rng), Err(Error::BudgetViolated { .. })));
}

#[test]
fn naive_and_fast_agree_on_random_inputs() {
    let (pk, sk) = key();
    let params = int_params(1000.0);
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for _ in 0..100 {
        let d = rng.gen_range(1..=8);
        let xs: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=50)).collect();
        let ys: Vec<i64> = (0..d).map(|_| rng.gen_range(-1000..=1000)).collect();
        let y = encrypt_vector(pk, &params, &as_f64(&ys), "y", &mut rng).unwrap();
        let x = PlainVector::from_i64(&params, &xs).unwrap();
        let fast = sk.decrypt(&inner_product(pk, &x, &y, &mut rng).unwrap()).unwrap();
        let naive = sk.decrypt(&inner_product_naive(pk, &x, &y, &mut rng).unwrap()).unwrap();
        assert_eq!(fast, naive);
        assert_eq!(decode_score_scaled(&params, &fast), BigInt::from(dot(&xs, &ys)));
    }
}

#[test]
fn batch_matches_per_entry_oracle() {
    let (pk, _) = key();
    let params = int_params(100.0);
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let rows = [[1i64, 2, 3], [-4, 0, 9], [7, 7, -7]];
    let db: Vec<EncVector> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| encrypt_vector(pk, &params, &as_f64(r), format!("v{i}"), &mut rng).unwrap())
        .collect();
    let xs = [3i64, -1, 2];
    let x = PlainVector::from_i64(&params, &xs).unwrap();
    let scores = batch_similarity(pk, &x, &db, &mut rng).unwrap();
    assert_eq!(scores.len(), 3);
    for ((label, c), (i, r)) in scores.iter().zip(rows.iter().enumerate()) {
        assert_eq!(label, &format!("v{i}"));
        assert_eq!(score(&params, c), BigInt::from(dot(&xs, r)));
    }
    assert!(batch_similarity(pk, &x, &[], &mut rng).unwrap().is_empty());
}

#[test]
fn batch_names_mismatched_entry() {
    let (pk, _) = key();
    let params = int_params(100.0);
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let good = encrypt_vector(pk, &params, &[1.0, 2.0], "good", &mut rng).unwrap();
    let bad = encrypt_vector(pk, &params, &[1.0, 2.0, 3.0], "odd-one", &mut rng).unwrap();
    let x = PlainVector::from_i64(&params, &[1, 1]).unwrap();
    let err = batch_similarity(pk, &x, &[good, bad], &mut rng).unwrap_err();
    match &err {
        Error::DimensionMismatch { label: Some(l), .. } => assert_eq!(l, "odd-one"),
        other => panic!("unexpected error {other}"),
    }
    assert!(err.to_string().contains("odd-one"));
}

#[test]
fn topk_matches_plaintext_argsort() {
    let (pk, sk) = key();
    let params = int_params(10.0);
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let d = 6;
    let rows: Vec<Vec<i64>> = (0..30)
        .map(|_| (0..d).map(|_| rng.gen_range(-3..=3)).collect())
        .collect();
    let db: Vec<EncVector> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| encrypt_vector(pk, &params, &as_f64(r), format!("row{i:02}"), &mut rng).unwrap())
        .collect();
    let xs: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
    let x = PlainVector::from_i64(&params, &xs).unwrap();
    let scores = batch_similarity(pk, &x, &db, &mut rng).unwrap();
    let top = topk(sk, &params, &scores, 10).unwrap();

    let mut oracle: Vec<(i128, String)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (dot(&xs, r), format!("row{i:02}")))
        .collect();
    oracle.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    assert_eq!(top.len(), 10);
    for (i, (m, (s, label))) in top.iter().zip(&oracle).enumerate() {
        assert_eq!(m.rank, i + 1);
        assert_eq!(&m.label, label);
        assert_eq!(m.score, *s as f64);
    }
}
