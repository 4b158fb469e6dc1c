//! On-disk formats: encrypted vector databases, key files and encrypted
//! score lists.
//!
//! A database file is the 8-byte magic `AHEVDB01`, one JSON header line
//! ending in `\n`, then `count` records. Each record is a 4-byte
//! little-endian length followed by that many bytes:
//!
//! ```text
//! u32 LE label length | label (UTF-8)
//! dim × ( u32 LE ciphertext length | ciphertext, big-endian )
//! ```
//!
//! Every file is written to a temporary sibling and renamed into place.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::ahe::{
    Ciphertext, CiphertextEnvelope, KeyFingerprint, PublicKey, PublicKeyEnvelope, SecretKey,
    SecretKeyEnvelope,
};
use crate::encoding::{EncodingParams, ParamsHeader};
use crate::error::{Error, Result};
use crate::similarity::EncVector;

pub const MAGIC: &[u8; 8] = b"AHEVDB01";
pub const MAX_LABEL_BYTES: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoreHeader {
    #[serde(rename = "kfp", with = "fingerprint_hex")]
    pub key_fingerprint: KeyFingerprint,
    pub dim: usize,
    pub count: usize,
    pub params: ParamsHeader,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

impl StoreHeader {
    pub fn new(pk: &PublicKey, params: &EncodingParams, dim: usize, count: usize) -> Self {
        StoreHeader {
            key_fingerprint: pk.fingerprint(),
            dim,
            count,
            params: params.header(),
            created_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    /// Fails with a key-mismatch error unless the store was written for `pk`.
    pub fn check_key(&self, pk: &PublicKey) -> Result<()> {
        if self.key_fingerprint != pk.fingerprint() {
            return Err(Error::KeyMismatch {
                expected: pk.fingerprint(),
                found: self.key_fingerprint,
            });
        }
        Ok(())
    }
}

mod fingerprint_hex {
    use super::KeyFingerprint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(fp: &KeyFingerprint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fp.to_hex())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<KeyFingerprint, D::Error> {
        let text = String::deserialize(d)?;
        KeyFingerprint::from_hex(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoreRecord {
    pub label: String,
    /// Serialized ciphertexts, big-endian without leading zeros.
    pub cts: Vec<Vec<u8>>,
}

impl StoreRecord {
    pub fn from_enc_vector(v: &EncVector) -> Self {
        StoreRecord {
            label: v.label().to_owned(),
            cts: v.ciphertexts().iter().map(Ciphertext::to_bytes).collect(),
        }
    }

    pub fn to_enc_vector(&self, pk: &PublicKey, params: &EncodingParams) -> Result<EncVector> {
        let cts = self
            .cts
            .iter()
            .map(|b| Ciphertext::from_parts(pk, BigUint::from_bytes_be(b)))
            .collect::<Result<Vec<_>>>()?;
        EncVector::from_parts(pk, params.clone(), self.label.clone(), cts)
    }
}

/// Builds a header and records for a set of encrypted vectors that share a
/// key, parameters and dimension.
pub fn db_from_vectors(
    pk: &PublicKey,
    params: &EncodingParams,
    dim: usize,
    vectors: &[EncVector],
) -> Result<(StoreHeader, Vec<StoreRecord>)> {
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
                label: Some(v.label().to_owned()),
            });
        }
        if v.params() != params {
            return Err(Error::ParamsMismatch {
                label: Some(v.label().to_owned()),
            });
        }
        if v.key_fingerprint() != pk.fingerprint() {
            return Err(Error::KeyMismatch {
                expected: pk.fingerprint(),
                found: v.key_fingerprint(),
            });
        }
    }
    let header = StoreHeader::new(pk, params, dim, vectors.len());
    Ok((header, vectors.iter().map(StoreRecord::from_enc_vector).collect()))
}

fn validate(header: &StoreHeader, records: &[StoreRecord]) -> Result<()> {
    if header.count != records.len() {
        return Err(Error::InvalidParameter(format!(
            "header count {} but {} records",
            header.count,
            records.len()
        )));
    }
    let mut seen = HashSet::new();
    for r in records {
        validate_label(&r.label)?;
        if !seen.insert(r.label.as_str()) {
            return Err(Error::DuplicateLabel(r.label.clone()));
        }
        if r.cts.len() != header.dim {
            return Err(Error::DimensionMismatch {
                expected: header.dim,
                found: r.cts.len(),
                label: Some(r.label.clone()),
            });
        }
    }
    Ok(())
}

pub fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::InvalidLabel("empty label".into()));
    }
    if label.len() > MAX_LABEL_BYTES {
        return Err(Error::InvalidLabel(format!(
            "label of {} bytes exceeds {MAX_LABEL_BYTES}",
            label.len()
        )));
    }
    Ok(())
}

/// Serializes a database to bytes.
pub fn encode_db(header: &StoreHeader, records: &[StoreRecord]) -> Result<Vec<u8>> {
    validate(header, records)?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    serde_json::to_writer(&mut out, header)?;
    out.push(b'\n');
    for r in records {
        let mut body = Vec::new();
        put_chunk(&mut body, r.label.as_bytes());
        for ct in &r.cts {
            put_chunk(&mut body, ct);
        }
        put_chunk(&mut out, &body);
    }
    Ok(out)
}

fn put_chunk(out: &mut Vec<u8>, bytes: &[u8]) {
    let len = u32::try_from(bytes.len()).expect("chunk under 4 GiB");
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(bytes);
}

/// Parses database bytes, validating magic, header, record count and
/// per-record dimension before returning anything.
pub fn decode_db(bytes: &[u8]) -> Result<(StoreHeader, Vec<StoreRecord>)> {
    if bytes.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(bytes) {
            Error::Corruption("file ends inside the magic tag".into())
        } else {
            Error::Format("not a vector store (bad magic)".into())
        });
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Format("not a vector store (bad magic)".into()));
    }
    let rest = &bytes[MAGIC.len()..];
    let newline = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Corruption("header line is not terminated".into()))?;
    let header: StoreHeader = serde_json::from_slice(&rest[..newline])
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;

    let mut cursor = Cursor(&rest[newline + 1..]);
    let mut records = Vec::with_capacity(header.count.min(1 << 20));
    for i in 0..header.count {
        let body = cursor
            .chunk()
            .ok_or_else(|| Error::Corruption(format!("truncated at record {i} of {}", header.count)))?;
        let mut inner = Cursor(body);
        let label = inner
            .chunk()
            .ok_or_else(|| Error::Corruption(format!("record {i}: truncated label")))?;
        let label = String::from_utf8(label.to_vec())
            .map_err(|_| Error::Corruption(format!("record {i}: label is not UTF-8")))?;
        let mut cts = Vec::with_capacity(header.dim);
        while !inner.0.is_empty() {
            let ct = inner
                .chunk()
                .ok_or_else(|| Error::Corruption(format!("record {i}: truncated ciphertext")))?;
            cts.push(ct.to_vec());
        }
        if cts.len() != header.dim {
            return Err(Error::Corruption(format!(
                "record {label:?} has {} ciphertexts, header says {}",
                cts.len(),
                header.dim
            )));
        }
        records.push(StoreRecord { label, cts });
    }
    if !cursor.0.is_empty() {
        return Err(Error::Corruption(format!(
            "{} trailing bytes after {} records",
            cursor.0.len(),
            header.count
        )));
    }
    validate(&header, &records).map_err(|e| Error::Corruption(e.to_string()))?;
    Ok((header, records))
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn chunk(&mut self) -> Option<&'a [u8]> {
        let len_bytes: [u8; 4] = self.0.get(..4)?.try_into().ok()?;
        let len = u32::from_le_bytes(len_bytes) as usize;
        let body = self.0.get(4..4 + len)?;
        self.0 = &self.0[4 + len..];
        Some(body)
    }
}

pub fn save_db(path: &Path, header: &StoreHeader, records: &[StoreRecord]) -> Result<()> {
    let bytes = encode_db(header, records)?;
    write_atomic(path, &bytes, false)
}

pub fn load_db(path: &Path) -> Result<(StoreHeader, Vec<StoreRecord>)> {
    decode_db(&fs::read(path)?)
}

/// Loads a database and rebuilds its vectors under `pk`.
pub fn load_db_for_key(path: &Path, pk: &PublicKey) -> Result<(StoreHeader, Vec<EncVector>)> {
    let (header, records) = load_db(path)?;
    header.check_key(pk)?;
    let params = EncodingParams::from_header(&header.params, pk)?;
    let vectors = records
        .iter()
        .map(|r| r.to_enc_vector(pk, &params))
        .collect::<Result<Vec<_>>>()?;
    Ok((header, vectors))
}

/// Writes both key files. The secret key file is readable by its owner
/// only.
pub fn save_keys(pub_path: &Path, sec_path: &Path, pk: &PublicKey, sk: &SecretKey) -> Result<()> {
    if sk.public_key() != pk {
        return Err(Error::KeyMismatch {
            expected: pk.fingerprint(),
            found: sk.public_key().fingerprint(),
        });
    }
    save_public_key(pub_path, pk)?;
    let mut json = serde_json::to_vec(&sk.to_envelope())?;
    json.push(b'\n');
    write_atomic(sec_path, &json, true)
}

pub fn save_public_key(path: &Path, pk: &PublicKey) -> Result<()> {
    let mut json = serde_json::to_vec(&pk.to_envelope())?;
    json.push(b'\n');
    write_atomic(path, &json, false)
}

pub fn load_public_key(path: &Path) -> Result<PublicKey> {
    let env: PublicKeyEnvelope = serde_json::from_slice(&fs::read(path)?)?;
    PublicKey::from_envelope(&env)
}

/// Loads a key pair, checking that the secret factors match the public
/// modulus and are prime.
pub fn load_keys(pub_path: &Path, sec_path: &Path) -> Result<(PublicKey, SecretKey)> {
    let pk = load_public_key(pub_path)?;
    let env: SecretKeyEnvelope = serde_json::from_slice(&fs::read(sec_path)?)?;
    let sk = SecretKey::from_envelope(&env, &pk)?;
    Ok((pk, sk))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ScoresHeader {
    #[serde(with = "fingerprint_hex")]
    kfp: KeyFingerprint,
    params: ParamsHeader,
    count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ScoreLine {
    label: String,
    #[serde(flatten)]
    ct: CiphertextEnvelope,
}

/// Writes encrypted scores as JSON lines: a header line
/// `{"kfp", "params", "count"}` then one `{"label", "v", "kfp"}` per score.
pub fn save_scores(
    path: &Path,
    pk: &PublicKey,
    params: &EncodingParams,
    scores: &[(String, Ciphertext)],
) -> Result<()> {
    let mut out = Vec::new();
    let header = ScoresHeader {
        kfp: pk.fingerprint(),
        params: params.header(),
        count: scores.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.push(b'\n');
    for (label, ct) in scores {
        serde_json::to_writer(
            &mut out,
            &ScoreLine {
                label: label.clone(),
                ct: ct.to_envelope(),
            },
        )?;
        out.push(b'\n');
    }
    write_atomic(path, &out, false)
}

/// Reads a file written by [`save_scores`] for the key holder of `pk`.
pub fn load_scores(path: &Path, pk: &PublicKey) -> Result<(EncodingParams, Vec<(String, Ciphertext)>)> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Corruption("empty score file".into()))??;
    let header: ScoresHeader =
        serde_json::from_str(&first).map_err(|e| Error::Format(format!("bad score header: {e}")))?;
    if header.kfp != pk.fingerprint() {
        return Err(Error::KeyMismatch {
            expected: pk.fingerprint(),
            found: header.kfp,
        });
    }
    let params = EncodingParams::from_header(&header.params, pk)?;
    let mut scores = Vec::with_capacity(header.count);
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let entry: ScoreLine = serde_json::from_str(&line)?;
        let ct = Ciphertext::from_envelope(&entry.ct)?;
        scores.push((entry.label, ct));
    }
    if scores.len() != header.count {
        return Err(Error::Corruption(format!(
            "score file lists {} entries, header says {}",
            scores.len(),
            header.count
        )));
    }
    Ok((params, scores))
}

/// Writes via a temporary file in the same directory and renames it over
/// `path`.
fn write_atomic(path: &Path, bytes: &[u8], owner_only: bool) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    set_mode(tmp.path(), owner_only)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(unix)]
fn set_mode(path: &Path, owner_only: bool) -> Result<()> {
    use std::os::unix::fs::PermissionsExt;
    let mode = if owner_only { 0o600 } else { 0o644 };
    fs::set_permissions(path, fs::Permissions::from_mode(mode))?;
    Ok(())
}

#[cfg(not(unix))]
fn set_mode(_path: &Path, _owner_only: bool) -> Result<()> {
    Ok(())
}
