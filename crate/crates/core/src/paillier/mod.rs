//! Paillier cryptosystem with `g = n + 1` and signed plaintexts.
//!
//! Plaintexts are integers in `(−n/2, n/2)`, encoded as residues mod `n`;
//! residues above `n/2` decode as negatives. This lets the query protocol
//! carry negated blinding terms.

mod prime;

pub use prime::{is_probable_prime, random_prime, MILLER_RABIN_ROUNDS};

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::metrics;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PaillierError {
    #[error("plaintext magnitude must be below n/2")]
    PlaintextOutOfRange,
    #[error("ciphertext is not a unit modulo n²")]
    InvalidCiphertext,
    #[error("key size must be an even number of bits ≥ 64, got {0}")]
    InvalidKeySize(u64),
    #[error("malformed key: {0}")]
    MalformedKey(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    n: BigUint,
    n_squared: BigUint,
    g: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    lambda: BigUint,
    mu: BigUint,
    public: PublicKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext(BigUint);

impl Ciphertext {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.to_str_radix(16)
    }

    pub fn from_hex(text: &str) -> Result<Self, PaillierError> {
        BigUint::parse_bytes(text.as_bytes(), 16)
            .map(Ciphertext)
            .ok_or(PaillierError::InvalidCiphertext)
    }

    /// Wraps a raw residue without checking it against any key.
    pub fn from_raw(value: BigUint) -> Self {
        Ciphertext(value)
    }
}

impl Serialize for Ciphertext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Ciphertext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Ciphertext::from_hex(&text).map_err(serde::de::Error::custom)
    }
}

/// Generates a keypair whose modulus has exactly `bits` bits.
pub fn keygen<R: Rng + ?Sized>(
    bits: u64,
    rng: &mut R,
) -> Result<(PublicKey, PrivateKey), PaillierError> {
    if bits < 64 || !bits.is_multiple_of(2) {
        return Err(PaillierError::InvalidKeySize(bits));
    }
    loop {
        let p = random_prime(bits / 2, rng);
        let q = random_prime(bits / 2, rng);
        if p == q {
            continue;
        }
        let n = &p * &q;
        let phi = (&p - 1u32) * (&q - 1u32);
        if !n.gcd(&phi).is_one() {
            continue;
        }
        let lambda = (&p - 1u32).lcm(&(&q - 1u32));
        let Some(mu) = lambda.modinv(&n) else {
            continue;
        };
        let public = PublicKey::from_modulus(n);
        return Ok((public.clone(), PrivateKey { lambda, mu, public }));
    }
}

impl PublicKey {
    fn from_modulus(n: BigUint) -> Self {
        let n_squared = &n * &n;
        let g = &n + 1u32;
        Self { n, n_squared, g }
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn bits(&self) -> u64 {
        self.n.bits()
    }

    /// True when `|m| < n/2`, i.e. `m` survives the signed encoding.
    pub fn fits(&self, m: &BigInt) -> bool {
        let twice = m.magnitude() * 2u32;
        twice < self.n
    }

    /// Encodes a signed plaintext as its residue mod `n`.
    pub fn encode(&self, m: &BigInt) -> Result<BigUint, PaillierError> {
        if !self.fits(m) {
            return Err(PaillierError::PlaintextOutOfRange);
        }
        Ok(reduce_signed(m, &self.n))
    }

    /// Decodes a residue, mapping values above `n/2` to negatives.
    pub fn decode(&self, residue: &BigUint) -> BigInt {
        let residue = residue % &self.n;
        if &residue * 2u32 > self.n {
            BigInt::from_biguint(Sign::Minus, &self.n - residue)
        } else {
            BigInt::from_biguint(Sign::Plus, residue)
        }
    }

    pub fn is_valid_ciphertext(&self, c: &Ciphertext) -> bool {
        !c.0.is_zero() && c.0 < self.n_squared && c.0.gcd(&self.n).is_one()
    }

    pub fn encrypt<R: Rng + ?Sized>(
        &self,
        m: &BigInt,
        rng: &mut R,
    ) -> Result<Ciphertext, PaillierError> {
        let residue = self.encode(m)?;
        let r = loop {
            let r = rng.gen_biguint_range(&BigUint::one(), &self.n);
            if r.gcd(&self.n).is_one() {
                break r;
            }
        };
        // g^m = (1 + n)^m = 1 + m·n  (mod n²)
        let gm = (BigUint::one() + residue * &self.n) % &self.n_squared;
        let rn = r.modpow(&self.n, &self.n_squared);
        metrics::record_paillier_enc();
        Ok(Ciphertext(gm * rn % &self.n_squared))
    }

    /// `E(m1)·E(m2) = E(m1 + m2)`.
    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
        Ciphertext(&a.0 * &b.0 % &self.n_squared)
    }

    /// `E(m)^k = E(k·m)`; negative `k` is reduced to `n + k`.
    pub fn scale(&self, c: &Ciphertext, k: &BigInt) -> Ciphertext {
        let exponent = reduce_signed(k, &self.n);
        metrics::record_paillier_exp();
        Ciphertext(c.0.modpow(&exponent, &self.n_squared))
    }

    /// `E(m) ↦ E(−m)`.
    pub fn neg(&self, c: &Ciphertext) -> Ciphertext {
        let minus_one = BigInt::from_biguint(Sign::Plus, &self.n - 1u32);
        self.scale(c, &minus_one)
    }

    /// The deterministic encryption of zero (the multiplicative identity).
    pub fn identity(&self) -> Ciphertext {
        Ciphertext(BigUint::one())
    }
}

fn reduce_signed(m: &BigInt, n: &BigUint) -> BigUint {
    let n = BigInt::from_biguint(Sign::Plus, n.clone());
    m.mod_floor(&n)
        .to_biguint()
        .expect("non-negative after mod_floor")
}

impl PrivateKey {
    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn mu(&self) -> &BigUint {
        &self.mu
    }

    pub fn decrypt(&self, c: &Ciphertext) -> Result<BigInt, PaillierError> {
        let pk = &self.public;
        if !pk.is_valid_ciphertext(c) {
            return Err(PaillierError::InvalidCiphertext);
        }
        let u = c.0.modpow(&self.lambda, &pk.n_squared);
        let l = (u - 1u32) / &pk.n;
        let residue = l * &self.mu % &pk.n;
        metrics::record_paillier_dec();
        Ok(pk.decode(&residue))
    }

    /// Rebuilds a private key from its serialized parts, checking that
    /// `μ·λ ≡ 1 (mod n)` and `g = n + 1`.
    pub fn from_parts(
        n: BigUint,
        g: BigUint,
        lambda: BigUint,
        mu: BigUint,
    ) -> Result<Self, PaillierError> {
        let public = PublicKey::from_parts(n, g)?;
        if !(&lambda * &mu % &public.n).is_one() {
            return Err(PaillierError::MalformedKey(
                "mu is not the inverse of lambda".into(),
            ));
        }
        Ok(Self { lambda, mu, public })
    }
}

impl PublicKey {
    pub fn from_parts(n: BigUint, g: BigUint) -> Result<Self, PaillierError> {
        if n.is_even() || n.bits() < 16 {
            return Err(PaillierError::MalformedKey("modulus must be odd".into()));
        }
        if g != &n + 1u32 {
            return Err(PaillierError::MalformedKey(
                "generator must be n + 1".into(),
            ));
        }
        Ok(Self::from_modulus(n))
    }
}

pub fn encrypt<R: Rng + ?Sized>(
    pk: &PublicKey,
    m: &BigInt,
    rng: &mut R,
) -> Result<Ciphertext, PaillierError> {
    pk.encrypt(m, rng)
}

pub fn decrypt(sk: &PrivateKey, c: &Ciphertext) -> Result<BigInt, PaillierError> {
    sk.decrypt(c)
}

pub fn hom_add(pk: &PublicKey, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
    pk.add(a, b)
}

pub fn hom_scale(pk: &PublicKey, c: &Ciphertext, k: &BigInt) -> Ciphertext {
    pk.scale(c, k)
}

pub fn hom_neg(pk: &PublicKey, c: &Ciphertext) -> Ciphertext {
    pk.neg(c)
}

#[derive(Serialize, Deserialize)]
struct KeyDoc {
    n: String,
    g: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<String>,
}

/// Accepts decimal, or hexadecimal with a `0x` prefix.
fn parse_uint(text: &str) -> Result<BigUint, PaillierError> {
    let parsed = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => BigUint::parse_bytes(hex.as_bytes(), 16),
        None => BigUint::parse_bytes(text.as_bytes(), 10),
    };
    parsed.ok_or_else(|| PaillierError::MalformedKey(format!("not an integer: {text:?}")))
}

impl Serialize for PublicKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        KeyDoc {
            n: self.n.to_string(),
            g: self.g.to_string(),
            lambda: None,
            mu: None,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PublicKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = KeyDoc::deserialize(d)?;
        let n = parse_uint(&doc.n).map_err(serde::de::Error::custom)?;
        let g = parse_uint(&doc.g).map_err(serde::de::Error::custom)?;
        PublicKey::from_parts(n, g).map_err(serde::de::Error::custom)
    }
}

impl Serialize for PrivateKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        KeyDoc {
            n: self.public.n.to_string(),
            g: self.public.g.to_string(),
            lambda: Some(self.lambda.to_string()),
            mu: Some(self.mu.to_string()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PrivateKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = KeyDoc::deserialize(d)?;
        let field = |v: Option<String>, name: &str| {
            v.ok_or_else(|| D::Error::custom(format!("missing field {name}")))
                .and_then(|t| parse_uint(&t).map_err(D::Error::custom))
        };
        let n = parse_uint(&doc.n).map_err(D::Error::custom)?;
        let g = parse_uint(&doc.g).map_err(D::Error::custom)?;
        let lambda = field(doc.lambda, "lambda")?;
        let mu = field(doc.mu, "mu")?;
        PrivateKey::from_parts(n, g, lambda, mu).map_err(D::Error::custom)
    }
}
