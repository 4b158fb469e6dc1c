//! Key generation, encryption, and the two homomorphic operations.
//!
//! cargo run --example paillier_basics

use ahe_similarity::ahe::{keygen, PlainResidue};
use num_bigint::BigInt;
use rand::rngs::OsRng;

fn main() -> ahe_similarity::Result<()> {
    let (pk, sk) = keygen(1024, &mut OsRng)?;
    println!("{}-bit modulus, fingerprint {}", pk.bits(), pk.fingerprint());

    let a = pk.encrypt(&PlainResidue::from(20u64), &mut OsRng)?;
    let b = pk.encrypt(&PlainResidue::from(22u64), &mut OsRng)?;
    let sum = pk.add(&a, &b)?;
    println!("Dec(Enc(20) ⊗ Enc(22)) = {}", sk.decrypt(&sum)?.value());

    let tripled = pk.scalar_mul(&a, &BigInt::from(3))?;
    println!("Dec(Enc(20)^3) = {}", sk.decrypt(&tripled)?.value());

    // Negative scalars wrap to N − |k|.
    let negated = pk.scalar_mul(&a, &BigInt::from(-1))?;
    let n = pk.modulus();
    println!("Dec(Enc(20)^-1) = N - {}", n - sk.decrypt(&negated)?.value());

    let again = pk.encrypt(&PlainResidue::from(20u64), &mut OsRng)?;
    println!("two encryptions of 20 differ: {}", again.value() != a.value());
    let fresh = pk.rerandomize(&a, &mut OsRng)?;
    println!(
        "rerandomized ciphertext differs: {}, same plaintext: {}",
        fresh.value() != a.value(),
        sk.decrypt(&fresh)? == sk.decrypt(&a)?
    );
    Ok(())
}
