//! k-of-n secret sharing, byte-wise over GF(2^8).
//!
//! Field arithmetic uses the reduction polynomial x^8 + x^4 + x^3 + x + 1
//! (0x11b). Each secret byte is the constant term of its own random
//! polynomial of degree k-1; share `i` holds the polynomials evaluated at
//! x = i.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

pub const MAX_SECRET_LEN: usize = 64;
pub const MAX_SHARES: usize = 255;

const REDUCTION: u16 = 0x11b;

fn gf_mul(mut a: u8, mut b: u8) -> u8 {
    let mut acc = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        let carry = a & 0x80 != 0;
        a <<= 1;
        if carry {
            a ^= (REDUCTION & 0xff) as u8;
        }
        b >>= 1;
    }
    acc
}

// a^254 = a^-1 for nonzero a.
fn gf_inv(a: u8) -> u8 {
    debug_assert!(a != 0);
    let mut result = 1u8;
    let mut base = a;
    let mut exp = 254u32;
    while exp > 0 {
        if exp & 1 == 1 {
            result = gf_mul(result, base);
        }
        base = gf_mul(base, base);
        exp >>= 1;
    }
    result
}

fn gf_div(a: u8, b: u8) -> u8 {
    gf_mul(a, gf_inv(b))
}

#[derive(Clone, PartialEq, Eq)]
pub struct Secret(Vec<u8>);

impl Secret {
    pub fn new(bytes: Vec<u8>) -> Result<Self> {
        if bytes.is_empty() || bytes.len() > MAX_SECRET_LEN {
            return Err(Error::InvalidParameter(format!(
                "secret must be 1 to {MAX_SECRET_LEN} bytes, got {}",
                bytes.len()
            )));
        }
        Ok(Secret(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

// Never print secret material.
impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Secret({} bytes)", self.0.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Share {
    pub index: u8,
    pub payload: Vec<u8>,
}

/// `index:hex-payload`, e.g. `3:a1ff07`.
impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.index, hex::encode(&self.payload))
    }
}

impl FromStr for Share {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (idx, payload) =
            s.trim().split_once(':').ok_or_else(|| Error::MalformedShare(format!("missing ':' in {s:?}")))?;
        let index: u8 = idx.trim().parse().map_err(|_| Error::MalformedShare(format!("bad index {idx:?}")))?;
        if index == 0 {
            return Err(Error::MalformedShare("share index 0 is reserved for the secret".into()));
        }
        let payload = hex::decode(payload.trim()).map_err(|e| Error::MalformedShare(e.to_string()))?;
        if payload.is_empty() {
            return Err(Error::MalformedShare("empty payload".into()));
        }
        Ok(Share { index, payload })
    }
}

fn check_params(threshold: usize, shares: usize) -> Result<()> {
    if threshold == 0 || threshold > shares || shares > MAX_SHARES {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n <= {MAX_SHARES}, got k={threshold} n={shares}")));
    }
    Ok(())
}

/// Splits `secret` into `shares` shares, any `threshold` of which recover it.
pub fn split<R: Rng + ?Sized>(secret: &Secret, threshold: usize, shares: usize, rng: &mut R) -> Result<Vec<Share>> {
    check_params(threshold, shares)?;
    let len = secret.0.len();
    // coeffs[b] = [secret byte, c1, ..., c_{k-1}] for byte b
    let coeffs: Vec<Vec<u8>> = secret
        .0
        .iter()
        .map(|&s| {
            let mut c = Vec::with_capacity(threshold);
            c.push(s);
            c.extend((1..threshold).map(|_| rng.random::<u8>()));
            c
        })
        .collect();

    Ok((1..=shares as u8)
        .map(|x| {
            let payload = (0..len).map(|b| coeffs[b].iter().rev().fold(0u8, |acc, &c| gf_mul(acc, x) ^ c)).collect();
            Share { index: x, payload }
        })
        .collect())
}

/// `split` driven by a ChaCha20 stream seeded with `seed`.
pub fn split_seeded(secret: &Secret, threshold: usize, shares: usize, seed: u64) -> Result<Vec<Share>> {
    split(secret, threshold, shares, &mut ChaCha20Rng::seed_from_u64(seed))
}

/// Interpolates the first `threshold` shares at zero.
pub fn reconstruct(shares: &[Share], threshold: usize) -> Result<Secret> {
    if threshold == 0 {
        return Err(Error::InvalidParameter("threshold must be at least 1".into()));
    }
    let mut seen = HashSet::new();
    for s in shares {
        if s.index == 0 {
            return Err(Error::MalformedShare("share index 0".into()));
        }
        if !seen.insert(s.index) {
            return Err(Error::DuplicateShare(s.index));
        }
    }
    if shares.len() < threshold {
        return Err(Error::InsufficientShares { need: threshold, got: shares.len() });
    }
    let quorum = &shares[..threshold];
    let len = quorum[0].payload.len();
    if quorum.iter().any(|s| s.payload.len() != len) {
        return Err(Error::MalformedShare("shares have different payload lengths".into()));
    }

    // Lagrange basis at zero: l_i = prod_{j != i} x_j / (x_j - x_i).
    let basis: Vec<u8> = quorum
        .iter()
        .map(|si| {
            quorum
                .iter()
                .filter(|sj| sj.index != si.index)
                .fold(1u8, |acc, sj| gf_mul(acc, gf_div(sj.index, sj.index ^ si.index)))
        })
        .collect();
    let bytes =
        (0..len).map(|b| quorum.iter().zip(&basis).fold(0u8, |acc, (s, l)| acc ^ gf_mul(s.payload[b], *l))).collect();
    Secret::new(bytes)
}
