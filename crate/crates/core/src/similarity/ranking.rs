//! Key-holder side: decrypt encrypted scores and rank them.

use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

use crate::ahe::{Ciphertext, SecretKey};
use crate::encoding::{decode_score, decode_score_scaled, EncodingParams};
use crate::error::Result;

/// One ranked result. Ranks are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoredMatch {
    pub label: String,
    pub rank: usize,
    #[serde(serialize_with = "serialize_score")]
    pub score: f64,
}

impl ScoredMatch {
    /// `{"label": ..., "rank": ..., "score": ...}` on one line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("match serializes")
    }
}

/// Integral scores are written without a fractional part.
fn serialize_score<S: Serializer>(score: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    const EXACT: f64 = 9_007_199_254_740_992.0; // 2^53
    if score.fract() == 0.0 && score.abs() < EXACT {
        s.serialize_i64(*score as i64)
    } else {
        s.serialize_f64(*score)
    }
}

/// Decrypts and decodes every score, then returns the best `k` by score
/// descending, ties broken by ascending label.
///
/// Ordering uses the exact decoded integers, so ties are never created or
/// broken by floating-point rounding.
pub fn topk(
    sk: &SecretKey,
    params: &EncodingParams,
    scores: &[(String, Ciphertext)],
    k: usize,
) -> Result<Vec<ScoredMatch>> {
    let mut decoded: Vec<(BigInt, f64, &str)> = scores
        .iter()
        .map(|(label, c)| {
            let r = sk.decrypt(c)?;
            Ok((decode_score_scaled(params, &r), decode_score(params, &r), label.as_str()))
        })
        .collect::<Result<_>>()?;
    decoded.sort_by(|a, b| match b.0.cmp(&a.0) {
        Ordering::Equal => a.2.cmp(b.2),
        other => other,
    });
    Ok(decoded
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (_, score, label))| ScoredMatch {
            label: label.to_owned(),
            rank: i + 1,
            score,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ahe::{keygen, PlainResidue};
    use crate::error::Error;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup() -> (SecretKey, EncodingParams, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (pk, sk) = keygen(128, &mut rng).unwrap();
        let params = EncodingParams::for_key(0, 100.0, &pk).unwrap();
        (sk, params, rng)
    }

    fn scored(sk: &SecretKey, rng: &mut ChaCha20Rng, items: &[(&str, u64)]) -> Vec<(String, Ciphertext)> {
        items
            .iter()
            .map(|(l, v)| {
                let c = sk.public_key().encrypt(&PlainResidue::from(*v), rng).unwrap();
                (l.to_string(), c)
            })
            .collect()
    }

    #[test]
    fn tie_breaks_by_ascending_label() {
        let (sk, params, mut rng) = setup();
        let scores = scored(&sk, &mut rng, &[("c", 9), ("a", 5), ("b", 9)]);
        let top = topk(&sk, &params, &scores, 2).unwrap();
        assert_eq!(
            top,
            vec![
                ScoredMatch { label: "b".into(), rank: 1, score: 9.0 },
                ScoredMatch { label: "c".into(), rank: 2, score: 9.0 },
            ]
        );
    }

    #[test]
    fn k_zero_and_k_past_end() {
        let (sk, params, mut rng) = setup();
        let scores = scored(&sk, &mut rng, &[("a", 1), ("b", 2), ("c", 3)]);
        assert!(topk(&sk, &params, &scores, 0).unwrap().is_empty());
        let all = topk(&sk, &params, &scores, 10).unwrap();
        let labels: Vec<_> = all.iter().map(|m| m.label.as_str()).collect();
        assert_eq!(labels, ["c", "b", "a"]);
        assert_eq!(all.iter().map(|m| m.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn negative_scores_rank_below_positive() {
        let (sk, params, mut rng) = setup();
        let n = sk.public_key().modulus().clone();
        let minus_two = sk
            .public_key()
            .encrypt(&PlainResidue::new(&n - 2u32), &mut rng)
            .unwrap();
        let mut scores = scored(&sk, &mut rng, &[("pos", 1)]);
        scores.push(("neg".into(), minus_two));
        let top = topk(&sk, &params, &scores, 2).unwrap();
        assert_eq!(top[0].label, "pos");
        assert_eq!(top[1].score, -2.0);
    }

    #[test]
    fn foreign_ciphertext_is_a_key_mismatch() {
        let (sk, params, mut rng) = setup();
        let (other_pk, _) = keygen(128, &mut rng).unwrap();
        let c = other_pk.encrypt(&PlainResidue::from(1), &mut rng).unwrap();
        let err = topk(&sk, &params, &[("x".into(), c)], 1).unwrap_err();
        assert!(matches!(err, Error::KeyMismatch { .. }));
    }

    #[test]
    fn json_line_format() {
        let m = ScoredMatch { label: "a".into(), rank: 1, score: 32.0 };
        assert_eq!(m.to_json_line(), r#"{"label":"a","rank":1,"score":32}"#);
        let m = ScoredMatch { label: "b".into(), rank: 2, score: -0.25 };
        assert_eq!(m.to_json_line(), r#"{"label":"b","rank":2,"score":-0.25}"#);
    }
}
