//! Paillier cryptosystem with generator `g = N + 1`.
//!
//! The ciphertext group operation is multiplication modulo `N²`, which maps
//! to addition of plaintexts modulo `N`. Multiplying a ciphertext by a known
//! integer is ciphertext exponentiation.
//!
//! Everything an evaluator needs hangs off [`PublicKey`]; only decryption
//! requires a [`SecretKey`].

mod envelope;
pub mod pow;
pub mod prime;

use std::fmt;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

pub use envelope::{CiphertextEnvelope, PublicKeyEnvelope, SecretKeyEnvelope};

use crate::error::{Error, Result};
use envelope::{decode_biguint, encode_biguint};
use pow::{pow_mod, square_and_multiply};
use prime::{generate_prime, is_probable_prime, MILLER_RABIN_ROUNDS};

/// Smallest accepted modulus size.
pub const MIN_KEY_BITS: u64 = 64;

/// First 16 bytes of SHA-256 over the canonical public-key serialization.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyFingerprint(pub [u8; 16]);

impl KeyFingerprint {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let bytes = hex::decode(text)
            .map_err(|e| Error::Format(format!("key fingerprint is not hex: {e}")))?;
        let bytes: [u8; 16] = bytes
            .try_into()
            .map_err(|_| Error::Format("key fingerprint must be 16 bytes".into()))?;
        Ok(KeyFingerprint(bytes))
    }
}

impl fmt::Display for KeyFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for KeyFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KeyFingerprint({})", self.to_hex())
    }
}

/// A plaintext residue in `[0, N)`. The bound is checked when the residue
/// meets a key.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlainResidue(BigUint);

impl PlainResidue {
    pub fn new(value: BigUint) -> Self {
        PlainResidue(value)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }
}

impl From<u64> for PlainResidue {
    fn from(v: u64) -> Self {
        PlainResidue(BigUint::from(v))
    }
}

impl From<BigUint> for PlainResidue {
    fn from(v: BigUint) -> Self {
        PlainResidue(v)
    }
}

/// An element of `Z*_{N²}` tagged with the fingerprint of the key that
/// produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    value: BigUint,
    key_fingerprint: KeyFingerprint,
}

impl Ciphertext {
    /// Rebuilds a ciphertext received from elsewhere. Only the range
    /// `0 < value < N²` is checked here; coprimality with `N` is checked at
    /// decryption.
    pub fn from_parts(pk: &PublicKey, value: BigUint) -> Result<Self> {
        if value.is_zero() || value >= pk.n_squared {
            return Err(Error::CorruptCiphertext("value outside (0, N²)"));
        }
        Ok(Ciphertext {
            value,
            key_fingerprint: pk.fingerprint,
        })
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn key_fingerprint(&self) -> KeyFingerprint {
        self.key_fingerprint
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.value.to_bytes_be()
    }

    pub fn to_envelope(&self) -> CiphertextEnvelope {
        CiphertextEnvelope {
            v: encode_biguint(&self.value),
            kfp: self.key_fingerprint.to_hex(),
        }
    }

    /// Parses an envelope. The embedded fingerprint is kept as-is, so a
    /// ciphertext from another key is caught by the next operation that
    /// sees it.
    pub fn from_envelope(env: &CiphertextEnvelope) -> Result<Self> {
        let value = decode_biguint("v", &env.v)?;
        if value.is_zero() {
            return Err(Error::CorruptCiphertext("zero value"));
        }
        Ok(Ciphertext {
            value,
            key_fingerprint: KeyFingerprint::from_hex(&env.kfp)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    n: BigUint,
    n_squared: BigUint,
    g: BigUint,
    fingerprint: KeyFingerprint,
}

impl PublicKey {
    /// Builds the public key for modulus `n` with `g = n + 1`.
    pub fn from_modulus(n: BigUint) -> Result<Self> {
        if n.bits() < MIN_KEY_BITS || n.is_even() {
            return Err(Error::KeySanity(format!(
                "modulus must be odd and at least {MIN_KEY_BITS} bits"
            )));
        }
        let n_squared = &n * &n;
        let g = &n + 1u32;
        let fingerprint = fingerprint_of(&PublicKeyEnvelope {
            n: encode_biguint(&n),
            g: encode_biguint(&g),
        });
        Ok(PublicKey {
            n,
            n_squared,
            g,
            fingerprint,
        })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    pub fn modulus_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn generator(&self) -> &BigUint {
        &self.g
    }

    pub fn bits(&self) -> u64 {
        self.n.bits()
    }

    pub fn fingerprint(&self) -> KeyFingerprint {
        self.fingerprint
    }

    pub fn to_envelope(&self) -> PublicKeyEnvelope {
        PublicKeyEnvelope {
            n: encode_biguint(&self.n),
            g: encode_biguint(&self.g),
        }
    }

    pub fn from_envelope(env: &PublicKeyEnvelope) -> Result<Self> {
        let n = decode_biguint("n", &env.n)?;
        let g = decode_biguint("g", &env.g)?;
        let pk = PublicKey::from_modulus(n)?;
        if g != pk.g {
            return Err(Error::KeySanity("generator is not N + 1".into()));
        }
        Ok(pk)
    }

    /// Encrypts `m` as `(1 + mN) · rᴺ mod N²` with fresh `r ∈ Z*_N`.
    pub fn encrypt<R>(&self, m: &PlainResidue, rng: &mut R) -> Result<Ciphertext>
    where
        R: RngCore + CryptoRng + ?Sized,
    {
        if m.0 >= self.n {
            return Err(Error::PlaintextOutOfRange);
        }
        let gm = (&m.0 * &self.n + 1u32) % &self.n_squared;
        let value = (gm * self.random_mask(rng)) % &self.n_squared;
        Ok(self.wrap(value))
    }

    /// Homomorphic addition: `Dec(add(a, b)) = Dec(a) + Dec(b) mod N`.
    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.wrap((&a.value * &b.value) % &self.n_squared))
    }

    /// Plaintext-ciphertext multiplication by square-and-multiply:
    /// `Dec(scalar_mul(c, k)) = k · Dec(c) mod N`.
    ///
    /// `k` is reduced into `[0, N)`. Residues above `N/2` stand for negative
    /// scalars and are applied as `(c⁻¹)^(N − k)`, so the cost tracks
    /// `log |k|` for signed fixed-point coefficients.
    pub fn scalar_mul(&self, c: &Ciphertext, k: &BigInt) -> Result<Ciphertext> {
        self.check(c)?;
        let k = reduce_mod(k, &self.n);
        let half = &self.n >> 1u32;
        let value = if k <= half {
            pow_mod(&c.value, &k, &self.n_squared)
        } else {
            let inverse = c
                .value
                .modinv(&self.n_squared)
                .ok_or(Error::CorruptCiphertext("ciphertext is not invertible mod N²"))?;
            pow_mod(&inverse, &(&self.n - k), &self.n_squared)
        };
        Ok(self.wrap(value))
    }

    /// Textbook square-and-multiply over the full residue `k mod N`, with
    /// no negative-scalar shortcut.
    pub fn scalar_mul_unsigned(&self, c: &Ciphertext, k: &BigUint) -> Result<Ciphertext> {
        self.check(c)?;
        let k = k % &self.n;
        Ok(self.wrap(square_and_multiply(&c.value, &k, &self.n_squared)))
    }

    /// Plaintext-ciphertext multiplication as literal repeated addition:
    /// `k − 1` applications of [`PublicKey::add`]. `k = 0` yields a fresh
    /// encryption of zero.
    pub fn scalar_mul_naive<R>(&self, c: &Ciphertext, k: &BigInt, rng: &mut R) -> Result<Ciphertext>
    where
        R: RngCore + CryptoRng + ?Sized,
    {
        self.check(c)?;
        if k.sign() == Sign::Minus {
            return Err(Error::NegativeScalar(k.to_string()));
        }
        let times = k
            .to_u64()
            .ok_or_else(|| Error::InvalidParameter(format!("scalar {k} too large for repeated addition")))?;
        if times == 0 {
            return self.encrypt(&PlainResidue::from(0), rng);
        }
        let mut acc = c.clone();
        for _ in 1..times {
            acc = self.add(&acc, c)?;
        }
        Ok(acc)
    }

    /// Multiplies by a fresh encryption of zero. The result decrypts to the
    /// same plaintext but is unlinkable to the input.
    pub fn rerandomize<R>(&self, c: &Ciphertext, rng: &mut R) -> Result<Ciphertext>
    where
        R: RngCore + CryptoRng + ?Sized,
    {
        self.check(c)?;
        Ok(self.wrap((&c.value * self.random_mask(rng)) % &self.n_squared))
    }

    /// The ciphertext `1`, which decrypts to zero. Deterministic; callers
    /// that hand it out should rerandomize it.
    pub fn identity(&self) -> Ciphertext {
        self.wrap(BigUint::one())
    }

    pub(crate) fn check(&self, c: &Ciphertext) -> Result<()> {
        if c.key_fingerprint != self.fingerprint {
            return Err(Error::KeyMismatch {
                expected: self.fingerprint,
                found: c.key_fingerprint,
            });
        }
        Ok(())
    }

    fn wrap(&self, value: BigUint) -> Ciphertext {
        Ciphertext {
            value,
            key_fingerprint: self.fingerprint,
        }
    }

    /// `rᴺ mod N²` for uniform `r ∈ Z*_N`.
    fn random_mask<R>(&self, rng: &mut R) -> BigUint
    where
        R: RngCore + CryptoRng + ?Sized,
    {
        let one = BigUint::one();
        let r = loop {
            let r = rng.gen_biguint_range(&one, &self.n);
            if r.gcd(&self.n).is_one() {
                break r;
            }
        };
        r.modpow(&self.n, &self.n_squared)
    }
}

fn fingerprint_of(env: &PublicKeyEnvelope) -> KeyFingerprint {
    let canonical = serde_json::to_vec(env).expect("envelope serializes");
    let digest = Sha256::digest(&canonical);
    let mut out = [0u8; 16];
    out.copy_from_slice(&digest[..16]);
    KeyFingerprint(out)
}

fn reduce_mod(k: &BigInt, n: &BigUint) -> BigUint {
    let n = BigInt::from(n.clone());
    k.mod_floor(&n)
        .to_biguint()
        .expect("mod_floor with positive modulus is nonnegative")
}

#[derive(Clone)]
pub struct SecretKey {
    p: BigUint,
    q: BigUint,
    lambda: BigUint,
    mu: BigUint,
    public: PublicKey,
    crt: CrtParams,
}

#[derive(Clone)]
struct CrtParams {
    p_squared: BigUint,
    q_squared: BigUint,
    p_minus_one: BigUint,
    q_minus_one: BigUint,
    hp: BigUint,
    hq: BigUint,
    q_inv_mod_p: BigUint,
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecretKey")
            .field("fingerprint", &self.public.fingerprint)
            .finish_non_exhaustive()
    }
}

impl SecretKey {
    /// Derives the full secret key from two distinct primes. Primality is
    /// not checked here; see [`SecretKey::from_envelope`].
    pub fn from_primes(p: BigUint, q: BigUint) -> Result<Self> {
        if p == q {
            return Err(Error::KeySanity("p and q must differ".into()));
        }
        let (p, q) = if p > q { (p, q) } else { (q, p) };
        let public = PublicKey::from_modulus(&p * &q)?;
        let n = &public.n;
        let p_minus_one = &p - 1u32;
        let q_minus_one = &q - 1u32;
        let lambda = p_minus_one.lcm(&q_minus_one);
        let mu = l_function(&public.g.modpow(&lambda, &public.n_squared), n)
            .modinv(n)
            .ok_or_else(|| Error::KeySanity("gcd(N, φ(N)) ≠ 1".into()))?;

        let p_squared = &p * &p;
        let q_squared = &q * &q;
        let hp = l_function(&public.g.modpow(&p_minus_one, &p_squared), &p)
            .modinv(&p)
            .ok_or_else(|| Error::KeySanity("no CRT inverse modulo p".into()))?;
        let hq = l_function(&public.g.modpow(&q_minus_one, &q_squared), &q)
            .modinv(&q)
            .ok_or_else(|| Error::KeySanity("no CRT inverse modulo q".into()))?;
        let q_inv_mod_p = q
            .modinv(&p)
            .ok_or_else(|| Error::KeySanity("p and q are not coprime".into()))?;

        Ok(SecretKey {
            crt: CrtParams {
                p_squared,
                q_squared,
                p_minus_one,
                q_minus_one,
                hp,
                hq,
                q_inv_mod_p,
            },
            p,
            q,
            lambda,
            mu,
            public,
        })
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.public
    }

    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn mu(&self) -> &BigUint {
        &self.mu
    }

    /// Decrypts with CRT over `p` and `q`.
    pub fn decrypt(&self, c: &Ciphertext) -> Result<PlainResidue> {
        self.validate(c)?;
        let crt = &self.crt;
        let mp = (l_function(&c.value.modpow(&crt.p_minus_one, &crt.p_squared), &self.p) * &crt.hp)
            % &self.p;
        let mq = (l_function(&c.value.modpow(&crt.q_minus_one, &crt.q_squared), &self.q) * &crt.hq)
            % &self.q;
        // m = mq + q · ((mp − mq) · q⁻¹ mod p)
        let diff = (&mp + &self.p - (&mq % &self.p)) % &self.p;
        let m = mq + &self.q * ((diff * &crt.q_inv_mod_p) % &self.p);
        Ok(PlainResidue(m))
    }

    /// Textbook decryption `L(c^λ mod N²) · μ mod N`.
    pub fn decrypt_without_crt(&self, c: &Ciphertext) -> Result<PlainResidue> {
        self.validate(c)?;
        let n = &self.public.n;
        let u = c.value.modpow(&self.lambda, &self.public.n_squared);
        Ok(PlainResidue((l_function(&u, n) * &self.mu) % n))
    }

    pub fn to_envelope(&self) -> SecretKeyEnvelope {
        SecretKeyEnvelope {
            p: encode_biguint(&self.p),
            q: encode_biguint(&self.q),
        }
    }

    /// Rebuilds a secret key from its envelope and checks it against the
    /// public key: `p · q = N`, both factors probable primes.
    pub fn from_envelope(env: &SecretKeyEnvelope, public: &PublicKey) -> Result<Self> {
        let p = decode_biguint("p", &env.p)?;
        let q = decode_biguint("q", &env.q)?;
        if &p * &q != public.n {
            return Err(Error::KeySanity("p · q ≠ N".into()));
        }
        let mut rng = rand::thread_rng();
        for (name, f) in [("p", &p), ("q", &q)] {
            if !is_probable_prime(f, MILLER_RABIN_ROUNDS, &mut rng) {
                return Err(Error::KeySanity(format!("{name} is not prime")));
            }
        }
        SecretKey::from_primes(p, q)
    }

    fn validate(&self, c: &Ciphertext) -> Result<()> {
        self.public.check(c)?;
        if c.value.is_zero() || c.value >= self.public.n_squared {
            return Err(Error::CorruptCiphertext("value outside (0, N²)"));
        }
        if !c.value.gcd(&self.public.n).is_one() {
            return Err(Error::CorruptCiphertext("value shares a factor with N"));
        }
        Ok(())
    }
}

/// `L(x) = (x − 1) / d`.
fn l_function(x: &BigUint, d: &BigUint) -> BigUint {
    (x - 1u32) / d
}

/// Generates a key pair with a `bits`-bit modulus.
pub fn keygen<R>(bits: u64, rng: &mut R) -> Result<(PublicKey, SecretKey)>
where
    R: RngCore + CryptoRng + ?Sized,
{
    if bits < MIN_KEY_BITS {
        return Err(Error::InvalidParameter(format!(
            "key size {bits} is below the minimum of {MIN_KEY_BITS} bits"
        )));
    }
    if !bits.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("key size {bits} must be even")));
    }
    loop {
        let p = generate_prime(bits / 2, rng);
        let q = generate_prime(bits / 2, rng);
        if p == q {
            continue;
        }
        match SecretKey::from_primes(p, q) {
            Ok(sk) => {
                debug_assert_eq!(sk.public.bits(), bits);
                return Ok((sk.public.clone(), sk));
            }
            Err(Error::KeySanity(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}
