//! Private nearest-neighbour search: the evaluator scores a plaintext query
//! against an encrypted database and only the key holder sees the ranking.
//!
//! cargo run --example private_topk

use ahe_similarity::ahe::keygen;
use ahe_similarity::encoding::{EncodingParams, PlainVector};
use ahe_similarity::similarity::{batch_similarity, encrypt_vector, topk};
use rand::rngs::OsRng;
use rand::Rng;

fn main() -> ahe_similarity::Result<()> {
    let (pk, sk) = keygen(1024, &mut OsRng)?;
    let params = EncodingParams::for_key(16, 1.0, &pk)?;

    let mut rng = rand::thread_rng();
    let dim = 16;
    let db = (0..40)
        .map(|i| {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            encrypt_vector(&pk, &params, &v, format!("doc-{i:02}"), &mut OsRng)
        })
        .collect::<ahe_similarity::Result<Vec<_>>>()?;

    let query: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = PlainVector::encode(&params, &query)?;

    // Evaluator side: public key only.
    let scores = batch_similarity(&pk, &x, &db, &mut OsRng)?;

    // Key-holder side.
    for m in topk(&sk, &params, &scores, 5)? {
        println!("{}", m.to_json_line());
    }
    Ok(())
}
