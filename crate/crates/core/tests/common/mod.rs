//! Reference arithmetic shared by the integration tests. Nothing here goes
//! through the crate's own arithmetic.

#![allow(dead_code)]

use midsize::{BigUint, Limb};
use num_bigint::BigUint as Big;

pub fn to_big<W: Limb>(x: &BigUint<W>) -> Big {
    let bytes = (W::BITS / 8) as usize;
    let mut le = Vec::with_capacity(x.len() * bytes);
    for limb in x.limbs() {
        le.extend_from_slice(&limb.to_u64().to_le_bytes()[..bytes]);
    }
    Big::from_bytes_le(&le)
}

/// Low `m` limbs of `v`.
pub fn from_big<W: Limb>(v: &Big, m: usize) -> BigUint<W> {
    let bytes = (W::BITS / 8) as usize;
    let mut le = v.to_bytes_le();
    le.resize(m * bytes, 0);
    let limbs = le[..m * bytes]
        .chunks(bytes)
        .map(|c| {
            let mut word = [0u8; 8];
            word[..bytes].copy_from_slice(c);
            W::from_u64(u64::from_le_bytes(word))
        })
        .collect();
    BigUint::from_limbs(limbs).unwrap()
}

pub fn add_mod<W: Limb>(a: &BigUint<W>, b: &BigUint<W>) -> BigUint<W> {
    from_big(&(to_big(a) + to_big(b)), a.len())
}

pub fn mul_mod<W: Limb>(a: &BigUint<W>, b: &BigUint<W>) -> BigUint<W> {
    from_big(&(to_big(a) * to_big(b)), a.len())
}

/// Value of little-endian base-`2^d` digits.
pub fn digits_value(digits: &[u64], d: u32) -> Big {
    digits
        .iter()
        .rev()
        .fold(Big::from(0u32), |acc, &x| (acc << d) + Big::from(x))
}

pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

/// `out[j] = sum_i xs[i] * omega^(i*j) mod p`, evaluated directly.
pub fn direct_dft(xs: &[u64], omega: u64, p: u64) -> Vec<u64> {
    let m = xs.len() as u64;
    (0..m)
        .map(|j| {
            let s: u128 = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| mulmod(x, powmod(omega, i as u64 * j % m, p), p) as u128)
                .sum();
            (s % p as u128) as u64
        })
        .collect()
}
