//! Signed fixed-point encoding and the overflow budget.
//!
//! cargo run --example fixed_point

use ahe_similarity::ahe::keygen;
use ahe_similarity::encoding::{decode_signed, encode_signed, overflow_budget, EncodingParams};
use rand::rngs::OsRng;

fn main() -> ahe_similarity::Result<()> {
    let (pk, _) = keygen(512, &mut OsRng)?;
    let params = EncodingParams::for_key(8, 100.0, &pk)?;

    for v in [-4.0, 2.71, 0.001953125, -0.0009765625] {
        let r = encode_signed(&params, v)?;
        let back = decode_signed(&params, &r);
        println!("{v:>14} -> scaled {:>6} -> {back}", params.scale(v)?);
    }

    match encode_signed(&params, 250.0) {
        Ok(_) => unreachable!("250 exceeds max_abs"),
        Err(e) => println!("encode 250 with X = 100: {e}"),
    }

    for frac_bits in [0, 16, 32] {
        let params = EncodingParams::for_key(frac_bits, 1024.0, &pk)?;
        let budget = overflow_budget(&params, 4096);
        println!(
            "f = {frac_bits:>2}, X = 1024, d = 4096: ok = {}, max safe dimension has {} bits",
            budget.ok,
            budget.max_safe_dim.bits()
        );
    }
    Ok(())
}
