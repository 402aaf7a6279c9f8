//! Limb and digit representations of fixed-width unsigned integers.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limb::{low_mask, Limb};

/// An unsigned integer modulo `2^(W::BITS * len)` stored as little-endian limbs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigUint<W: Limb> {
    limbs: Vec<W>,
}

impl<W: Limb> BigUint<W> {
    pub fn from_limbs(limbs: Vec<W>) -> Result<Self> {
        if limbs.is_empty() {
            return Err(Error::ZeroLength);
        }
        Ok(Self { limbs })
    }

    /// # Panics
    ///
    /// Panics if `m == 0`.
    pub fn zero(m: usize) -> Self {
        assert!(m > 0, "a BigUint needs at least one limb");
        Self {
            limbs: vec![W::ZERO; m],
        }
    }

    pub fn one(m: usize) -> Self {
        let mut x = Self::zero(m);
        x.limbs[0] = W::ONE;
        x
    }

    /// Uniformly random value with `m` limbs.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Self {
        assert!(m > 0, "a BigUint needs at least one limb");
        Self {
            limbs: (0..m).map(|_| W::from_u64(rng.gen())).collect(),
        }
    }

    /// The value `2^(W::BITS * m) - 1`.
    pub fn all_max(m: usize) -> Self {
        assert!(m > 0, "a BigUint needs at least one limb");
        Self {
            limbs: vec![W::MAX; m],
        }
    }

    pub fn len(&self) -> usize {
        self.limbs.len()
    }

    // A BigUint is never empty; `len` is the fixed limb count.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width_bits(&self) -> u32 {
        W::BITS
    }

    pub fn limbs(&self) -> &[W] {
        &self.limbs
    }

    pub fn into_limbs(self) -> Vec<W> {
        self.limbs
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == W::ZERO)
    }

    /// Zero-extends to `m` limbs.
    pub fn padded(&self, m: usize) -> Result<Self> {
        if m < self.len() {
            return Err(Error::InvalidConfig(format!(
                "cannot pad {} limbs down to {m}",
                self.len()
            )));
        }
        let mut limbs = self.limbs.clone();
        limbs.resize(m, W::ZERO);
        Ok(Self { limbs })
    }

    /// Zero-extends to the next multiple of `multiple` limbs.
    pub fn padded_to_multiple(&self, multiple: usize) -> Result<Self> {
        if multiple == 0 {
            return Err(Error::ZeroLength);
        }
        self.padded(self.len().div_ceil(multiple) * multiple)
    }

    /// Keeps the low `m` limbs, i.e. reduces modulo `2^(W::BITS * m)`.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.len() {
            return Err(Error::InvalidConfig(format!(
                "cannot truncate {} limbs to {m}",
                self.len()
            )));
        }
        Ok(Self {
            limbs: self.limbs[..m].to_vec(),
        })
    }

    /// Number of significant bits (0 for zero).
    pub fn bit_len(&self) -> usize {
        match self.limbs.iter().rposition(|&l| l != W::ZERO) {
            None => 0,
            Some(i) => i * W::BITS as usize + (64 - self.limbs[i].to_u64().leading_zeros()) as usize,
        }
    }

    /// Parses lowercase or uppercase hexadecimal into `m` limbs.
    pub fn from_hex(text: &str, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroLength);
        }
        if text.is_empty() {
            return Err(Error::EmptyHex);
        }
        let mut nibbles = Vec::with_capacity(text.len());
        for c in text.chars() {
            let v = c.to_digit(16).ok_or(Error::InvalidHex(c))?;
            nibbles.push(v as u64);
        }
        let first = nibbles.iter().position(|&n| n != 0).unwrap_or(nibbles.len());
        let significant = &nibbles[first..];
        let needed = match significant.first() {
            None => 0,
            Some(&top) => (significant.len() - 1) * 4 + (64 - top.leading_zeros()) as usize,
        };
        let capacity = m * W::BITS as usize;
        if needed > capacity {
            return Err(Error::Capacity { needed, capacity });
        }
        let mut limbs = vec![0u64; m];
        for (pos, &nib) in significant.iter().rev().enumerate() {
            let bit = pos * 4;
            limbs[bit / W::BITS as usize] |= nib << (bit % W::BITS as usize);
        }
        Ok(Self {
            limbs: limbs.into_iter().map(W::from_u64).collect(),
        })
    }

    /// Lowercase hexadecimal without leading zeros ("0" for zero).
    pub fn to_hex(&self) -> String {
        let Some(top) = self.limbs.iter().rposition(|&l| l != W::ZERO) else {
            return "0".to_string();
        };
        let width = (W::BITS / 4) as usize;
        let mut s = format!("{:x}", self.limbs[top]);
        for limb in self.limbs[..top].iter().rev() {
            s.push_str(&format!("{:0width$x}", limb, width = width));
        }
        s
    }

    /// Re-expresses the value in base `2^digit_bits`, using exactly
    /// `ceil(W::BITS * len / digit_bits)` digits.
    pub fn to_digits(&self, digit_bits: u32) -> Result<DigitVector> {
        words_to_digits(self, digit_bits)
    }
}

impl<W: Limb> fmt::Debug for BigUint<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigUint<u{}>[{}](0x{})", W::BITS, self.len(), self.to_hex())
    }
}

/// Little-endian digits in base `2^digit_bits`, each stored in a cell of
/// `container_bits` bits (`digit_bits < container_bits`).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitVector {
    digits: Vec<u64>,
    digit_bits: u32,
    container_bits: u32,
}

/// Smallest standard cell width strictly wider than `digit_bits`.
pub fn container_for(digit_bits: u32) -> Option<u32> {
    [8, 16, 32, 64].into_iter().find(|&c| c > digit_bits)
}

impl DigitVector {
    pub fn new(digits: Vec<u64>, digit_bits: u32, container_bits: u32) -> Result<Self> {
        if digit_bits == 0 || digit_bits >= container_bits || ![8, 16, 32, 64].contains(&container_bits) {
            return Err(Error::InvalidDigitWidth {
                digit_bits,
                container_bits,
            });
        }
        if digits.is_empty() {
            return Err(Error::ZeroLength);
        }
        let limit = low_mask(digit_bits);
        if let Some(&bad) = digits.iter().find(|&&x| x > limit) {
            return Err(Error::Capacity {
                needed: (64 - bad.leading_zeros()) as usize,
                capacity: digit_bits as usize,
            });
        }
        Ok(Self {
            digits,
            digit_bits,
            container_bits,
        })
    }

    /// Digits in the default container for `digit_bits`.
    pub fn with_digit_bits(digits: Vec<u64>, digit_bits: u32) -> Result<Self> {
        let container = container_for(digit_bits).ok_or(Error::InvalidDigitWidth {
            digit_bits,
            container_bits: 64,
        })?;
        Self::new(digits, digit_bits, container)
    }

    pub(crate) fn from_parts_unchecked(digits: Vec<u64>, digit_bits: u32, container_bits: u32) -> Self {
        debug_assert!(digits.iter().all(|&x| x <= low_mask(digit_bits)));
        Self {
            digits,
            digit_bits,
            container_bits,
        }
    }

    pub fn zero(len: usize, digit_bits: u32) -> Result<Self> {
        Self::with_digit_bits(vec![0; len], digit_bits)
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn into_digits(self) -> Vec<u64> {
        self.digits
    }

    pub fn digit_bits(&self) -> u32 {
        self.digit_bits
    }

    pub fn container_bits(&self) -> u32 {
        self.container_bits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Zero-extends to `len` digits.
    pub fn padded(&self, len: usize) -> Result<Self> {
        if len < self.len() {
            return Err(Error::InvalidConfig(format!(
                "cannot pad {} digits down to {len}",
                self.len()
            )));
        }
        let mut digits = self.digits.clone();
        digits.resize(len, 0);
        Ok(Self { digits, ..*self })
    }

    /// Zero-extends to the next power of two.
    pub fn padded_pow2(&self) -> Self {
        self.padded(self.len().next_power_of_two())
            .expect("next power of two is never shorter")
    }

    /// Keeps the low `len` digits.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::InvalidConfig(format!(
                "cannot truncate {} digits to {len}",
                self.len()
            )));
        }
        Ok(Self {
            digits: self.digits[..len].to_vec(),
            ..*self
        })
    }
}

impl fmt::Debug for DigitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DigitVector<d={}>{:?}", self.digit_bits, self.digits)
    }
}

/// Splits limbs into `digit_bits`-bit digits; the value is preserved and the
/// length is `ceil(W::BITS * len / digit_bits)`.
pub fn words_to_digits<W: Limb>(x: &BigUint<W>, digit_bits: u32) -> Result<DigitVector> {
    let container = container_for(digit_bits).ok_or(Error::InvalidDigitWidth {
        digit_bits,
        container_bits: 64,
    })?;
    if digit_bits == 0 {
        return Err(Error::InvalidDigitWidth {
            digit_bits,
            container_bits: container,
        });
    }
    let total_bits = x.len() * W::BITS as usize;
    let count = total_bits.div_ceil(digit_bits as usize);
    let mask = low_mask(digit_bits) as u128;
    let mut digits = Vec::with_capacity(count);
    let mut acc: u128 = 0;
    let mut acc_bits = 0u32;
    let mut limbs = x.limbs().iter();
    while digits.len() < count {
        while acc_bits < digit_bits {
            match limbs.next() {
                Some(&l) => {
                    acc |= (l.to_u64() as u128) << acc_bits;
                    acc_bits += W::BITS;
                }
                None => acc_bits = digit_bits,
            }
        }
        digits.push((acc & mask) as u64);
        acc >>= digit_bits;
        acc_bits -= digit_bits;
    }
    Ok(DigitVector::from_parts_unchecked(digits, digit_bits, container))
}

fn repack<W: Limb>(v: &DigitVector, m: usize, check: bool) -> Result<BigUint<W>> {
    if m == 0 {
        return Err(Error::ZeroLength);
    }
    let mut limbs = Vec::with_capacity(m);
    let mut acc: u128 = 0;
    let mut acc_bits = 0u32;
    let d = v.digit_bits();
    let mut digits = v.digits().iter();
    let mut exhausted = false;
    while limbs.len() < m {
        while acc_bits < W::BITS && !exhausted {
            match digits.next() {
                Some(&x) => {
                    acc |= (x as u128) << acc_bits;
                    acc_bits += d;
                }
                None => exhausted = true,
            }
        }
        limbs.push(W::from_u64((acc & low_mask(W::BITS) as u128) as u64));
        acc >>= W::BITS;
        acc_bits = acc_bits.saturating_sub(W::BITS);
    }
    if check {
        let leftover = acc != 0 || digits.any(|&x| x != 0);
        if leftover {
            return Err(Error::Capacity {
                needed: bit_len_digits(v),
                capacity: m * W::BITS as usize,
            });
        }
    }
    Ok(BigUint { limbs })
}

fn bit_len_digits(v: &DigitVector) -> usize {
    match v.digits().iter().rposition(|&x| x != 0) {
        None => 0,
        Some(i) => i * v.digit_bits() as usize + (64 - v.digits()[i].leading_zeros()) as usize,
    }
}

/// Packs digits back into `m` limbs; fails if the value does not fit.
pub fn digits_to_words<W: Limb>(v: &DigitVector, m: usize) -> Result<BigUint<W>> {
    repack(v, m, true)
}

/// Packs digits into `m` limbs, reducing modulo `2^(W::BITS * m)`.
pub fn digits_to_words_truncated<W: Limb>(v: &DigitVector, m: usize) -> Result<BigUint<W>> {
    repack(v, m, false)
}

/// Execution parameters of one virtual block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockConfig {
    /// Limbs (or digits) per instance.
    pub m: usize,
    /// Per-thread sequentialization factor.
    pub q: usize,
    /// Instances per block.
    pub ipb: usize,
}

impl BlockConfig {
    /// Requires `2q | m`; pad the operands first when it does not hold.
    pub fn new(m: usize, q: usize, ipb: usize) -> Result<Self> {
        if m == 0 || q == 0 || ipb == 0 {
            return Err(Error::InvalidConfig(format!(
                "m={m}, q={q}, ipb={ipb} must all be positive"
            )));
        }
        if m % (2 * q) != 0 {
            return Err(Error::InvalidConfig(format!("2*q = {} does not divide m = {m}", 2 * q)));
        }
        Ok(Self { m, q, ipb })
    }

    /// Total elements handled by the block.
    pub fn total(&self) -> usize {
        self.ipb * self.m
    }

    /// Threads for classical multiplication and addition: `ipb*m/(2q)`.
    pub fn mul_threads(&self) -> usize {
        self.ipb * self.m / (2 * self.q)
    }

    pub fn add_threads(&self) -> usize {
        self.mul_threads()
    }

    /// Threads for one transform of length `m`: `m/q`.
    pub fn fft_threads(&self) -> usize {
        (self.m / self.q).max(1)
    }

    /// Threads that cooperate on a single instance.
    pub fn threads_per_instance(&self) -> usize {
        self.m / (2 * self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_examples() {
        assert_eq!(BigUint::<u8>::from_hex("0", 4).unwrap().limbs(), &[0, 0, 0, 0]);
        assert_eq!(BigUint::<u8>::from_hex("1ff", 2).unwrap().limbs(), &[0xff, 0x01]);
        assert_eq!(BigUint::<u8>::from_hex("ffff", 2).unwrap().limbs(), &[0xff, 0xff]);
        assert_eq!(BigUint::<u8>::from_limbs(vec![0, 0]).unwrap().to_hex(), "0");
        assert_eq!(BigUint::<u8>::from_limbs(vec![0xff, 1]).unwrap().to_hex(), "1ff");
        assert_eq!(BigUint::<u8>::from_limbs(vec![1, 0, 0, 1]).unwrap().to_hex(), "1000001");
    }

    #[test]
    fn hex_errors() {
        assert_eq!(BigUint::<u8>::from_hex("1g", 2), Err(Error::InvalidHex('g')));
        assert_eq!(BigUint::<u8>::from_hex("", 2), Err(Error::EmptyHex));
        assert_eq!(
            BigUint::<u8>::from_hex("10000", 2),
            Err(Error::Capacity {
                needed: 17,
                capacity: 16
            })
        );
        // leading zeros do not count against capacity
        assert_eq!(BigUint::<u8>::from_hex("000ff", 1).unwrap().limbs(), &[0xff]);
        assert_eq!(BigUint::<u32>::from_hex("ABCDEF0123", 2).unwrap().to_hex(), "abcdef0123");
    }

    #[test]
    fn digit_examples() {
        let x = BigUint::<u8>::from_limbs(vec![0xff, 0x01]).unwrap();
        let v = words_to_digits(&x, 4).unwrap();
        assert_eq!(v.digits(), &[0xf, 0xf, 0x1, 0x0]);
        assert_eq!(v.container_bits(), 8);
        assert_eq!(digits_to_words::<u8>(&v, 2).unwrap(), x);

        let y = BigUint::<u8>::from_limbs(vec![0x00, 0x80]).unwrap();
        let v = words_to_digits(&y, 15).unwrap().padded_pow2();
        assert_eq!(v.digits(), &[0, 1]);
        assert_eq!(v.container_bits(), 16);

        let z = words_to_digits(&BigUint::<u64>::zero(3), 22).unwrap();
        assert!(z.digits().iter().all(|&d| d == 0));
        assert_eq!(z.len(), 9);
        assert!(digits_to_words::<u64>(&z, 3).unwrap().is_zero());
    }

    #[test]
    fn digits_to_words_overflow() {
        let v = DigitVector::with_digit_bits(vec![0xf, 0xf, 0x1], 4).unwrap();
        assert!(matches!(digits_to_words::<u8>(&v, 1), Err(Error::Capacity { .. })));
        assert_eq!(digits_to_words_truncated::<u8>(&v, 1).unwrap().limbs(), &[0xff]);
    }

    #[test]
    fn digit_vector_validation() {
        assert!(DigitVector::new(vec![16], 4, 8).is_err());
        assert!(DigitVector::new(vec![1], 8, 8).is_err());
        assert!(DigitVector::new(vec![1], 4, 12).is_err());
        assert!(DigitVector::new(vec![], 4, 8).is_err());
        assert!(DigitVector::new(vec![15], 4, 8).is_ok());
    }

    #[test]
    fn block_config() {
        let cfg = BlockConfig::new(64, 4, 2).unwrap();
        assert_eq!(cfg.mul_threads(), 16);
        assert_eq!(cfg.fft_threads(), 16);
        assert!(BlockConfig::new(12, 4, 1).is_err());
        assert!(BlockConfig::new(8, 0, 1).is_err());
    }

    #[test]
    fn padding_and_truncation() {
        let x = BigUint::<u16>::from_hex("123456", 2).unwrap();
        let p = x.padded_to_multiple(4).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.to_hex(), "123456");
        assert_eq!(p.truncated(1).unwrap().to_hex(), "3456");
        assert!(x.padded(1).is_err());
    }
}
