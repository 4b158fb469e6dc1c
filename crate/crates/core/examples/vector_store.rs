//! Writing an encrypted vector store and key files, then reading them back.
//!
//! cargo run --example vector_store

use ahe_similarity::ahe::keygen;
use ahe_similarity::encoding::{decode_signed, EncodingParams};
use ahe_similarity::similarity::encrypt_vector;
use ahe_similarity::store::{db_from_vectors, load_db_for_key, load_keys, save_db, save_keys};
use rand::rngs::OsRng;

fn main() -> ahe_similarity::Result<()> {
    let dir = tempfile::tempdir()?;
    let (pub_path, sec_path, db_path) = (dir.path().join("key.pub"), dir.path().join("key.sec"), dir.path().join("vectors.ahe"));

    let (pk, sk) = keygen(1024, &mut OsRng)?;
    save_keys(&pub_path, &sec_path, &pk, &sk)?;

    let params = EncodingParams::for_key(16, 10.0, &pk)?;
    let rows = [("apple", [1.0, 0.5, -2.0]), ("pear", [0.0, 3.25, 1.0]), ("plum", [-7.5, 0.0, 0.125])];
    let vectors = rows
        .iter()
        .map(|(label, v)| encrypt_vector(&pk, &params, v, *label, &mut OsRng))
        .collect::<ahe_similarity::Result<Vec<_>>>()?;
    let (header, records) = db_from_vectors(&pk, &params, 3, &vectors)?;
    save_db(&db_path, &header, &records)?;
    println!("wrote {} bytes", std::fs::metadata(&db_path)?.len());

    let (pk, sk) = load_keys(&pub_path, &sec_path)?;
    let (header, loaded) = load_db_for_key(&db_path, &pk)?;
    println!("header: dim {}, count {}, key {}", header.dim, header.count, header.key_fingerprint);
    for v in &loaded {
        let values = v
            .ciphertexts()
            .iter()
            .map(|c| Ok(decode_signed(&params, &sk.decrypt(c)?)))
            .collect::<ahe_similarity::Result<Vec<_>>>()?;
        println!("{:>6}: {values:?}", v.label());
    }
    Ok(())
}
