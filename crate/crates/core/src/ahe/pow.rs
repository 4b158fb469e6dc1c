//! Modular exponentiation used for plaintext-ciphertext multiplication.

use num_bigint::BigUint;
use num_traits::One;

/// Exponents up to this many bits use [`square_and_multiply`]; longer ones
/// go through `BigUint::modpow`, whose Montgomery setup only pays off once
/// the exponent is long.
const SHORT_EXPONENT_BITS: u64 = 128;

/// Left-to-right binary exponentiation: one squaring per exponent bit plus
/// one multiplication per set bit.
pub fn square_and_multiply(base: &BigUint, exponent: &BigUint, modulus: &BigUint) -> BigUint {
    let base = base % modulus;
    let mut acc = BigUint::one() % modulus;
    for i in (0..exponent.bits()).rev() {
        acc = (&acc * &acc) % modulus;
        if exponent.bit(i) {
            acc = (&acc * &base) % modulus;
        }
    }
    acc
}

/// Number of modular multiplications [`square_and_multiply`] performs.
pub fn square_and_multiply_cost(exponent: &BigUint) -> u64 {
    exponent.bits() + exponent.count_ones()
}

pub(crate) fn pow_mod(base: &BigUint, exponent: &BigUint, modulus: &BigUint) -> BigUint {
    if exponent.bits() <= SHORT_EXPONENT_BITS {
        square_and_multiply(base, exponent, modulus)
    } else {
        base.modpow(exponent, modulus)
    }
}
