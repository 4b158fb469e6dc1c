//! Inner-product similarity between plaintext vectors and vectors encrypted
//! under the Paillier cryptosystem.
//!
//! An evaluator holding only a [`PublicKey`](ahe::PublicKey) computes
//! `Enc(Σ xᵢyᵢ)` from a plaintext query `x` and an encrypted vector
//! `Enc(y)` using ciphertext multiplication (addition of plaintexts) and
//! exponentiation (multiplication by a known scalar). The key holder
//! decrypts and ranks.
//!
//! - [`ahe`]: key generation, encryption, homomorphic operations.
//! - [`encoding`]: signed fixed-point encoding and the overflow budget.
//! - [`similarity`]: encrypted inner products, batch scoring, top-k.
//! - [`noise`]: noise-growth predictor and Monte-Carlo simulator for noisy
//!   additive schemes.
//! - [`store`]: key files and the encrypted vector store format.
//! - [`bench`]: timing harness for the cost model.
//! - [`cli`]: the `ahe-sim` command-line front end.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod ahe;
pub mod bench;
pub mod cli;
pub mod encoding;
pub mod error;
pub mod noise;
pub mod similarity;
pub mod stats;
pub mod store;

pub use error::{Error, Result};
