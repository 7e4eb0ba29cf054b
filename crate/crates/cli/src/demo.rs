//! The two-point worked example, replayed with its scripted draws and
//! compared against its reference values.

use anyhow::{bail, Result};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use sknn_core::arith::{format_rational, to_f64, Rational};
use sknn_core::paillier;
use sknn_core::proposed::{
    augment, csp_knn, csp_score, do_blind_query, encrypt_tuple_traced, qu_build_request, qu_unwrap,
    QueryPolicy,
};
use sknn_core::toy::{self, expected, ToyProfile};

pub fn run(paillier_bits: u64, seed: u64) -> Result<()> {
    let key = toy::key();
    let mut src = ToyProfile::new(seed);
    let mut edb = Vec::new();
    let mut nom_p = None;
    for (i, p) in toy::database().iter().enumerate() {
        let (ct, secrets) = encrypt_tuple_traced(&key, i, p, &mut src)?;
        if i == 0 {
            nom_p = augment(&key, p, &secrets).last().cloned();
        }
        edb.push(ct);
    }
    let (pk, sk) = paillier::keygen(paillier_bits, &mut ChaCha20Rng::seed_from_u64(seed))?;
    let req = qu_build_request(&toy::QUERY, key.query_bound(), &pk, &mut src)?;
    let (bq, secrets) = do_blind_query(&key, &req, QueryPolicy::AllowAll, &mut src)?;
    let nom_q = sk.decrypt(&secrets.r_enc[key.last_one()])?;
    let q = qu_unwrap(&sk, &bq)?;
    let scores = edb
        .iter()
        .map(|ct| csp_score(ct, &q).map(|s| to_f64(&s)))
        .collect::<Result<Vec<_>, _>>()?;
    let winner = csp_knn(&edb, &q, 1)?[0];

    let mut mismatches = Vec::new();
    let want_p = Rational::new(expected::NOM_P.0.into(), expected::NOM_P.1.into());
    let nom_p = nom_p.unwrap_or_default();
    println!("nom_p   {}", format_rational(&nom_p));
    if nom_p != want_p {
        mismatches.push(format!(
            "nom_p: got {}, want {}",
            format_rational(&nom_p),
            format_rational(&want_p)
        ));
    }
    println!("nom_q   {nom_q}");
    if nom_q != BigInt::from(expected::NOM_Q) {
        mismatches.push(format!("nom_q: got {nom_q}, want {}", expected::NOM_Q));
    }
    for (i, (got, want)) in scores.iter().zip(expected::SCORES).enumerate() {
        println!("score{}  {got:.3}", i + 1);
        if (got - want).abs() >= expected::TOLERANCE {
            mismatches.push(format!("score{}: got {got:.3}, want {want:.3}", i + 1));
        }
    }
    println!("nearest p{}", winner + 1);
    if winner != expected::NEAREST {
        mismatches.push(format!(
            "nearest: got p{}, want p{}",
            winner + 1,
            expected::NEAREST + 1
        ));
    }
    if !mismatches.is_empty() {
        bail!("worked example diverged:\n  {}", mismatches.join("\n  "));
    }
    println!("all values match the reference values");
    Ok(())
}
