//! Arithmetic in `Z_p` for primes `p = k * 2^n + 1`, prime search and
//! root-of-unity tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan_add::exclusive_scan;

/// A prime field with `2^n`-th roots of unity.
///
/// `g` has multiplicative order exactly `2^n`. Elements live in a `word_bits`
/// container; digits fed to the transform use half of it and products are
/// formed in twice its width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub k: u64,
    pub n: u32,
    pub g: u64,
    pub word_bits: u32,
}

pub const PRIME_FIELD_32: FieldSpec = FieldSpec {
    p: 3221225473,
    k: 3,
    n: 30,
    g: 13,
    word_bits: 32,
};

pub const PRIME_FIELD_64: FieldSpec = FieldSpec {
    p: 4179340454199820289,
    k: 29,
    n: 57,
    g: 21,
    word_bits: 64,
};

impl FieldSpec {
    pub fn half_bits(&self) -> u32 {
        self.word_bits / 2
    }

    pub fn full_bits(&self) -> u32 {
        self.word_bits
    }

    pub fn double_bits(&self) -> u32 {
        self.word_bits * 2
    }

    pub fn by_word_bits(word_bits: u32) -> Result<Self> {
        match word_bits {
            32 => Ok(PRIME_FIELD_32),
            64 => Ok(PRIME_FIELD_64),
            other => Err(Error::InvalidFieldSpec(format!("no preset field for {other}-bit words"))),
        }
    }

    pub fn check_reduced(&self, x: u64) -> Result<u64> {
        if x < self.p {
            Ok(x)
        } else {
            Err(Error::NotReduced { value: x, p: self.p })
        }
    }

    #[inline]
    pub fn add(&self, x: u64, y: u64) -> u64 {
        let mut r = x as u128 + y as u128;
        if r >= self.p as u128 {
            r -= self.p as u128;
        }
        r as u64
    }

    #[inline]
    pub fn sub(&self, x: u64, y: u64) -> u64 {
        let mut r = x as u128;
        if x < y {
            r += self.p as u128;
        }
        (r - y as u128) as u64
    }

    #[inline]
    pub fn mul(&self, x: u64, y: u64) -> u64 {
        if self.p <= u32::MAX as u64 {
            (x * y) % self.p
        } else {
            ((x as u128 * y as u128) % self.p as u128) as u64
        }
    }

    pub fn pow(&self, mut x: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, x);
            }
            x = self.mul(x, x);
            e >>= 1;
        }
        r
    }

    /// `x^(p-2)`.
    pub fn inv(&self, x: u64) -> Result<u64> {
        if x % self.p == 0 {
            return Err(Error::InverseOfZero);
        }
        Ok(self.pow(x, self.p - 2))
    }

    /// `x^(2^e)` by repeated squaring.
    fn pow2k(&self, mut x: u64, e: u32) -> u64 {
        for _ in 0..e {
            x = self.mul(x, x);
        }
        x
    }

    /// Shape, primality and generator order.
    pub fn verify(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFieldSpec(msg));
        if self.word_bits != 32 && self.word_bits != 64 {
            return bad(format!("word_bits {} is not 32 or 64", self.word_bits));
        }
        if self.n == 0 || self.n >= self.word_bits {
            return bad(format!("n = {} out of range", self.n));
        }
        if self.k % 2 == 0 {
            return bad(format!("k = {} is even", self.k));
        }
        let shaped = (self.k as u128) << self.n;
        if shaped + 1 != self.p as u128 {
            return bad(format!("{} != {} * 2^{} + 1", self.p, self.k, self.n));
        }
        if (self.p as u128) >> self.word_bits != 0 {
            return bad(format!("p does not fit {} bits", self.word_bits));
        }
        if !is_prime(self.p) {
            return bad(format!("{} is not prime", self.p));
        }
        if self.g == 0 || self.g >= self.p {
            return bad(format!("g = {} not in Z_p^*", self.g));
        }
        if self.pow2k(self.g, self.n) != 1 || self.pow2k(self.g, self.n - 1) == 1 {
            return bad(format!("g = {} does not have order 2^{}", self.g, self.n));
        }
        Ok(())
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for
/// all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// First prime `k * 2^n + 1 < 2^word_bits` with `n >= n_min`, scanning `n`
/// upward and odd `k` upward, with `g = a^k` for the first `a` of order `2^n`.
pub fn find_ntt_prime(n_min: u32, word_bits: u32) -> Result<FieldSpec> {
    if word_bits != 32 && word_bits != 64 {
        return Err(Error::InvalidFieldSpec(format!("word_bits {word_bits} is not 32 or 64")));
    }
    if n_min == 0 {
        return Err(Error::InvalidFieldSpec("n_min must be at least 1".into()));
    }
    let limit = 1u128 << word_bits;
    for n in n_min..word_bits {
        let mut k = 1u64;
        while ((k as u128) << n) + 1 < limit {
            let p = (k << n) + 1;
            if is_prime(p) {
                let mut spec = FieldSpec {
                    p,
                    k,
                    n,
                    g: 0,
                    word_bits,
                };
                for a in 2..p {
                    let g = spec.pow(a, k);
                    if spec.pow2k(g, n - 1) != 1 {
                        spec.g = g;
                        return Ok(spec);
                    }
                }
            }
            k += 2;
        }
    }
    Err(Error::NoPrimeFound { n_min, word_bits })
}

/// Powers of an `M`-th root of unity and the inverse length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaTable {
    pub spec: FieldSpec,
    pub lg_m: u32,
    pub omega: u64,
    pub omegas: Vec<u64>,
    pub omegas_inv: Vec<u64>,
    pub inv_m: u64,
}

impl OmegaTable {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// `omega = g^(2^(n - lg m))`, tables built as exclusive product scans.
pub fn omega_table(spec: &FieldSpec, m: usize) -> Result<OmegaTable> {
    if !m.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("transform length {m} is not a power of two")));
    }
    let lg_m = m.trailing_zeros();
    if lg_m > spec.n {
        return Err(Error::TransformTooLong { len: m, n: spec.n });
    }
    let omega = spec.pow2k(spec.g, spec.n - lg_m);
    let omega_inv = spec.inv(omega)?;
    let mul = |x, y| spec.mul(x, y);
    Ok(OmegaTable {
        spec: *spec,
        lg_m,
        omega,
        omegas: exclusive_scan(mul, 1, &vec![omega; m]),
        omegas_inv: exclusive_scan(mul, 1, &vec![omega_inv; m]),
        inv_m: spec.inv(m as u64 % spec.p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIELDS: [FieldSpec; 2] = [PRIME_FIELD_32, PRIME_FIELD_64];

    #[test]
    fn published_constants_verify() {
        for f in FIELDS {
            f.verify().unwrap();
        }
    }

    #[test]
    fn verify_rejects_bad_specs() {
        let mut f = PRIME_FIELD_32;
        f.g = 3221225472; // order 2
        assert!(f.verify().is_err());
        let mut f = PRIME_FIELD_32;
        f.k = 5;
        assert!(f.verify().is_err());
        let f = FieldSpec {
            p: (1 << 30) + 1,
            k: 1,
            n: 30,
            g: 3,
            word_bits: 32,
        };
        assert!(f.verify().is_err(), "2^30+1 is composite");
    }

    #[test]
    fn arithmetic_examples() {
        for f in FIELDS {
            let p = f.p;
            assert_eq!(f.add(p - 1, 1), 0);
            assert_eq!(f.add(0, 17), 17);
            assert_eq!(f.add(p - 1, p - 1), p - 2);
            assert_eq!(f.sub(0, 1), p - 1);
            assert_eq!(f.sub(12345, 12345), 0);
            assert_eq!(f.mul(p - 1, p - 1), 1);
            assert_eq!(f.mul(777, 1), 777);
            assert_eq!(f.mul(777, 0), 0);
            assert_eq!(f.pow(777, 0), 1);
            assert_eq!(f.inv(0), Err(Error::InverseOfZero));
        }
        assert_eq!(PRIME_FIELD_32.pow(13, 1 << 30), 1);
    }

    #[test]
    fn primality() {
        let primes = [2u64, 3, 5, 97, 3221225473, 4179340454199820289, 18446744073709551557];
        for p in primes {
            assert!(is_prime(p), "{p}");
        }
        // strong pseudoprimes to several small bases
        let composites = [0u64, 1, 4, 561, 3215031751, 3825123056546413051, u64::MAX];
        for c in composites {
            assert!(!is_prime(c), "{c}");
        }
    }

    #[test]
    fn prime_search() {
        let f = find_ntt_prime(30, 32).unwrap();
        assert_eq!((f.p, f.k, f.n), (3221225473, 3, 30));
        f.verify().unwrap();
        let f = find_ntt_prime(57, 64).unwrap();
        assert!(f.n >= 57);
        f.verify().unwrap();
        let f = find_ntt_prime(1, 32).unwrap();
        assert_eq!(f.p, 3);
        f.verify().unwrap();
        assert!(find_ntt_prime(31, 32).is_err());
        assert!(find_ntt_prime(10, 48).is_err());
    }

    #[test]
    fn omega_examples() {
        let f = PRIME_FIELD_32;
        assert_eq!(omega_table(&f, 1).unwrap().omegas, vec![1]);
        assert_eq!(omega_table(&f, 2).unwrap().omega, 3221225472);
        let t = omega_table(&f, 4).unwrap();
        assert_eq!(f.pow(t.omega, 4), 1);
        assert_eq!(f.pow(t.omega, 2), f.p - 1);
        assert!(omega_table(&f, 1 << 31).is_err());
        assert!(omega_table(&f, 6).is_err());
    }
}
