//! One plaintext query against one encrypted vector, computed by the fast
//! path and by the literal repeated-multiplication form.
//!
//! cargo run --example encrypted_inner_product

use ahe_similarity::ahe::keygen;
use ahe_similarity::encoding::{decode_score, EncodingParams, PlainVector};
use ahe_similarity::similarity::{encrypt_vector, inner_product, inner_product_naive};
use rand::rngs::OsRng;

fn main() -> ahe_similarity::Result<()> {
    let (pk, sk) = keygen(1024, &mut OsRng)?;

    // The data owner encrypts y; the evaluator holds x in the clear.
    let params = EncodingParams::for_key(0, 100.0, &pk)?;
    let y = encrypt_vector(&pk, &params, &[4.0, 5.0, 6.0], "y", &mut OsRng)?;
    let x = PlainVector::encode(&params, &[1.0, 2.0, 3.0])?;

    let fast = inner_product(&pk, &x, &y, &mut OsRng)?;
    let naive = inner_product_naive(&pk, &x, &y, &mut OsRng)?;
    println!("<(1,2,3), (4,5,6)> = {}", decode_score(&params, &sk.decrypt(&fast)?));
    println!("literal form agrees: {}", sk.decrypt(&fast)? == sk.decrypt(&naive)?);

    // Real-valued inputs go through the fixed-point encoding.
    let params = EncodingParams::for_key(16, 10.0, &pk)?;
    let y = encrypt_vector(&pk, &params, &[0.25, -1.5, 2.0], "y", &mut OsRng)?;
    let x = PlainVector::encode(&params, &[3.0, 0.5, -0.125])?;
    let score = inner_product(&pk, &x, &y, &mut OsRng)?;
    println!("<(3,0.5,-0.125), (0.25,-1.5,2)> = {}", decode_score(&params, &sk.decrypt(&score)?));
    Ok(())
}
