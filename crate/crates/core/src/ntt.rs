//! Multiplication through the number-theoretic transform.
//!
//! Operands are split into `d`-bit digits, zero-padded to a power-of-two
//! length `N >= 2*M_d`, transformed, multiplied pointwise and transformed
//! back. The resulting convolution coefficients are exact provided
//! `L * (2^d - 1)^2 < p`, where `L` bounds the number of terms per
//! coefficient. The coefficients are then folded back into base `2^d` by
//! splitting runs of `Q` of them into low digits, a high digit and a carry,
//! and adding the two resulting digit vectors.

use crate::error::{Error, Result};
use crate::field::{omega_table, FieldSpec, OmegaTable};
use crate::limb::{low_mask, Limb};
use crate::scan_add::badd_base;
use crate::types::{digits_to_words_truncated, words_to_digits, BigUint, DigitVector};

/// Elements of `Z_p`, length a power of two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldVector {
    pub elems: Vec<u64>,
    pub spec: FieldSpec,
}

impl FieldVector {
    pub fn new(elems: Vec<u64>, spec: FieldSpec) -> Result<Self> {
        if !elems.len().is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "field vector length {} is not a power of two",
                elems.len()
            )));
        }
        for &x in &elems {
            spec.check_reduced(x)?;
        }
        Ok(Self { elems, spec })
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn lg_len(&self) -> u32 {
        self.elems.len().trailing_zeros()
    }
}

/// Reverses the low `lg` bits of `i`.
#[inline]
pub fn bit_reverse(i: usize, lg: u32) -> usize {
    if lg == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - lg)
    }
}

/// In-place bit-reversal permutation: swaps each pair once.
pub fn permute_in_place(xs: &mut [u64]) {
    let lg = xs.len().trailing_zeros();
    for i in 0..xs.len() {
        let r = bit_reverse(i, lg);
        if i < r {
            xs.swap(i, r);
        }
    }
}

pub fn bit_reverse_permute(v: &FieldVector, lg_m: u32) -> Result<FieldVector> {
    if v.len() != 1 << lg_m {
        return Err(Error::LengthMismatch {
            left: v.len(),
            right: 1 << lg_m,
        });
    }
    let mut out = v.clone();
    permute_in_place(&mut out.elems);
    Ok(out)
}

/// Indices `(lo, hi, root)` touched by butterfly `vtid < M/2` of stage `t`
/// (1-based) in a transform of length `m`.
#[inline]
pub fn butterfly_indices(m: usize, t: u32, vtid: usize) -> (usize, usize, usize) {
    let l = 1usize << t;
    let half = l >> 1;
    let r = m >> t;
    let k = vtid >> (t - 1);
    let j = vtid & (half - 1);
    let klj = k * l + j;
    (klj, klj + half, r * j)
}

/// Butterfly stage `t` (1-based) for virtual thread `vtid < M/2`.
#[inline]
pub fn butterfly(xs: &mut [u64], omegas: &[u64], spec: &FieldSpec, t: u32, vtid: usize) {
    let (lo, hi, root) = butterfly_indices(xs.len(), t, vtid);
    let tau = spec.mul(omegas[root], xs[hi]);
    let x = xs[lo];
    xs[lo] = spec.add(x, tau);
    xs[hi] = spec.sub(x, tau);
}

/// Iterative Cooley-Tukey transform with the given root powers.
pub fn transform_in_place(xs: &mut [u64], omegas: &[u64], spec: &FieldSpec) {
    permute_in_place(xs);
    let lg = xs.len().trailing_zeros();
    for t in 1..=lg {
        for vtid in 0..xs.len() / 2 {
            butterfly(xs, omegas, spec, t, vtid);
        }
    }
}

fn check_table(v: &FieldVector, tbl: &OmegaTable) -> Result<()> {
    if v.len() != tbl.len() {
        return Err(Error::LengthMismatch {
            left: v.len(),
            right: tbl.len(),
        });
    }
    if v.spec != tbl.spec {
        return Err(Error::InvalidFieldSpec("vector and table use different fields".into()));
    }
    Ok(())
}

/// `out[j] = sum_i v[i] * omega^(i*j)`.
pub fn ntt_forward(v: &FieldVector, tbl: &OmegaTable) -> Result<FieldVector> {
    check_table(v, tbl)?;
    let mut out = v.clone();
    transform_in_place(&mut out.elems, &tbl.omegas, &tbl.spec);
    Ok(out)
}

/// Forward transform with the inverse roots, scaled by `1/M`.
pub fn ntt_inverse(v: &FieldVector, tbl: &OmegaTable) -> Result<FieldVector> {
    check_table(v, tbl)?;
    let mut out = v.clone();
    transform_in_place(&mut out.elems, &tbl.omegas_inv, &tbl.spec);
    for x in &mut out.elems {
        *x = tbl.spec.mul(tbl.inv_m, *x);
    }
    Ok(out)
}

/// Largest `d` with `conv_len * (2^d - 1)^2 < p`.
pub fn max_safe_digit_width(spec: &FieldSpec, conv_len: u64) -> Result<u32> {
    if conv_len == 0 {
        return Err(Error::InvalidConfig("convolution length must be positive".into()));
    }
    let fits = |d: u32| {
        let digit = (1u128 << d) - 1;
        digit
            .checked_mul(digit)
            .and_then(|sq| sq.checked_mul(conv_len as u128))
            .is_some_and(|bound| bound < spec.p as u128)
    };
    (1..64).rev().find(|&d| fits(d)).ok_or(Error::FieldTooSmall(conv_len))
}

/// `Q` coefficients folded into base `2^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDigits {
    pub lows: Vec<u64>,
    pub high: u64,
    pub carry: u64,
}

/// Rewrites `sum vals[q] * 2^(d*q)` as `Q` low digits, a high digit and a carry.
pub fn split_digits(vals: &[u64], digit_bits: u32) -> Result<SplitDigits> {
    let d = digit_bits;
    if d == 0 || d >= 64 {
        return Err(Error::InvalidDigitWidth {
            digit_bits: d,
            container_bits: 64,
        });
    }
    let mask = low_mask(d) as u128;
    let mut lows = Vec::with_capacity(vals.len());
    // pending value at the current position; stays below 2^64 + 2^(64-d+1)
    let mut acc: u128 = 0;
    for &v in vals {
        acc += v as u128;
        lows.push((acc & mask) as u64);
        acc >>= d;
    }
    let high = (acc & mask) as u64;
    acc >>= d;
    let carry = (acc & mask) as u64;
    if acc >> d != 0 {
        return Err(Error::SplitOverflow {
            q: vals.len(),
            digit_bits: d,
        });
    }
    Ok(SplitDigits { lows, high, carry })
}

/// Whether runs of any length `Q` of coefficients below `p` always fit in
/// `Q + 2` digits: `(p-1) < 2^(2d) * (2^d - 1)`.
pub fn split_fits(spec: &FieldSpec, digit_bits: u32) -> bool {
    let d = digit_bits;
    d >= 43 || ((spec.p - 1) as u128) < (1u128 << (2 * d)) * ((1u128 << d) - 1)
}

/// Default run length for the final split; when short runs cannot hold the
/// worst case the whole transform is a single run (its value is the product,
/// which always fits).
pub fn split_factor(spec: &FieldSpec, digit_bits: u32, transform_len: usize) -> usize {
    if split_fits(spec, digit_bits) {
        2.min(transform_len)
    } else {
        transform_len
    }
}

/// Places split runs of `q` coefficients into a low vector and a
/// high/carry vector, each of length `vals.len()`.
pub fn publish_split(vals: &[u64], digit_bits: u32, q: usize) -> Result<(Vec<u64>, Vec<u64>)> {
    let n = vals.len();
    let mut low = vec![0u64; n];
    let mut hc = vec![0u64; n];
    for (chunk, run) in vals.chunks(q).enumerate() {
        let s = chunk * q;
        let split = split_digits(run, digit_bits)?;
        low[s..s + run.len()].copy_from_slice(&split.lows);
        for (off, x) in [(q, split.high), (q + 1, split.carry)] {
            if s + off < n {
                hc[s + off] = x;
            } else if x != 0 {
                return Err(Error::SplitOverflow {
                    q,
                    digit_bits,
                });
            }
        }
    }
    Ok((low, hc))
}

/// Length of the zero-padded transform for `m_d` digits.
pub fn transform_len(spec: &FieldSpec, m_d: usize) -> Result<usize> {
    let n = (2 * m_d).next_power_of_two();
    if n.trailing_zeros() > spec.n {
        return Err(Error::TransformTooLong { len: n, n: spec.n });
    }
    Ok(n)
}

fn check_operands(a: &DigitVector, b: &DigitVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.digit_bits() != b.digit_bits() {
        return Err(Error::WidthMismatch {
            left: a.digit_bits(),
            right: b.digit_bits(),
        });
    }
    Ok(())
}

/// Rejects digit widths whose convolution would wrap modulo `p`.
pub fn check_digit_width(spec: &FieldSpec, digit_bits: u32, m_d: usize) -> Result<()> {
    let conv_len = 2 * m_d as u64;
    let max_safe = max_safe_digit_width(spec, conv_len)?;
    if digit_bits > max_safe {
        return Err(Error::UnsafeDigitWidth {
            digit_bits,
            max_safe,
            conv_len,
        });
    }
    Ok(())
}

/// `a * b mod 2^(d*M_d)` for digit vectors of equal length and width.
pub fn bmul_ntt(a: &DigitVector, b: &DigitVector, spec: &FieldSpec) -> Result<DigitVector> {
    check_operands(a, b)?;
    check_digit_width(spec, a.digit_bits(), a.len())?;
    bmul_ntt_unchecked(a, b, spec)
}

/// [`bmul_ntt`] without the digit-width guard. With an unsafe width the
/// coefficients wrap modulo `p` and the product is wrong; this exists to
/// demonstrate that the guard is tight.
pub fn bmul_ntt_unchecked(a: &DigitVector, b: &DigitVector, spec: &FieldSpec) -> Result<DigitVector> {
    check_operands(a, b)?;
    let m_d = a.len();
    let n = transform_len(spec, m_d)?;
    let tbl = omega_table(spec, n)?;
    let lift = |v: &DigitVector| {
        let mut xs = v.digits().to_vec();
        xs.resize(n, 0);
        xs
    };
    let (mut fa, mut fb) = (lift(a), lift(b));
    transform_in_place(&mut fa, &tbl.omegas, spec);
    transform_in_place(&mut fb, &tbl.omegas, spec);
    for (x, &y) in fa.iter_mut().zip(&fb) {
        *x = spec.mul(*x, y);
    }
    transform_in_place(&mut fa, &tbl.omegas_inv, spec);
    for x in &mut fa {
        *x = spec.mul(tbl.inv_m, *x);
    }
    let d = a.digit_bits();
    let q = split_factor(spec, d, n);
    let (low, hc) = publish_split(&fa, d, q)?;
    let low = DigitVector::new(low, d, a.container_bits())?;
    let hc = DigitVector::new(hc, d, a.container_bits())?;
    badd_base(&low, &hc)?.truncated(m_d)
}

/// Largest digit width that is safe for `num_bits`-bit operands.
pub fn preset_digit_width(spec: &FieldSpec, num_bits: usize) -> Result<u32> {
    for d in (1..=spec.half_bits()).rev() {
        let m_d = num_bits.div_ceil(d as usize);
        if transform_len(spec, m_d).is_err() {
            continue;
        }
        if check_digit_width(spec, d, m_d).is_ok() {
            return Ok(d);
        }
    }
    Err(Error::FieldTooSmall(num_bits as u64))
}

/// Limb-level product modulo `2^(w*M)` via `d`-bit digits.
pub fn mul_ntt_words<W: Limb>(
    a: &BigUint<W>,
    b: &BigUint<W>,
    spec: &FieldSpec,
    digit_bits: u32,
) -> Result<BigUint<W>> {
    let da = words_to_digits(a, digit_bits)?;
    let db = words_to_digits(b, digit_bits)?;
    let prod = bmul_ntt(&da, &db, spec)?;
    digits_to_words_truncated(&prod, a.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PRIME_FIELD_32, PRIME_FIELD_64};

    #[test]
    fn permute_examples() {
        let v = FieldVector::new(vec![10, 11, 12, 13], PRIME_FIELD_32).unwrap();
        assert_eq!(bit_reverse_permute(&v, 2).unwrap().elems, vec![10, 12, 11, 13]);
        let one = FieldVector::new(vec![5], PRIME_FIELD_32).unwrap();
        assert_eq!(bit_reverse_permute(&one, 0).unwrap(), one);
        assert!(bit_reverse_permute(&v, 3).is_err());
    }

    #[test]
    fn transform_of_delta_and_zero() {
        let f = PRIME_FIELD_64;
        let tbl = omega_table(&f, 8).unwrap();
        let mut delta = vec![0; 8];
        delta[0] = 1;
        let v = FieldVector::new(delta.clone(), f).unwrap();
        assert_eq!(ntt_forward(&v, &tbl).unwrap().elems, vec![1; 8]);
        let ones = FieldVector::new(vec![1; 8], f).unwrap();
        assert_eq!(ntt_inverse(&ones, &tbl).unwrap().elems, delta);
        let z = FieldVector::new(vec![0; 8], f).unwrap();
        assert_eq!(ntt_forward(&z, &tbl).unwrap(), z);
    }

    #[test]
    fn safe_width_examples() {
        assert_eq!(max_safe_digit_width(&PRIME_FIELD_32, 3).unwrap(), 15);
        assert_eq!(max_safe_digit_width(&PRIME_FIELD_32, 4).unwrap(), 14);
        assert_eq!(max_safe_digit_width(&PRIME_FIELD_64, 1 << 17).unwrap(), 22);
        assert!(max_safe_digit_width(&PRIME_FIELD_32, 1 << 40).is_err());
        assert!(max_safe_digit_width(&PRIME_FIELD_32, 0).is_err());
    }

    #[test]
    fn split_examples() {
        let s = split_digits(&[3, 4, 5], 15).unwrap();
        assert_eq!(s, SplitDigits { lows: vec![3, 4, 5], high: 0, carry: 0 });
        let s = split_digits(&[0; 4], 15).unwrap();
        assert_eq!(s, SplitDigits { lows: vec![0; 4], high: 0, carry: 0 });
        // 2^40 needs three 4-bit digits beyond a single low digit
        assert!(split_digits(&[1 << 40], 4).is_err());
    }

    #[test]
    fn ntt_mul_examples() {
        let f = PRIME_FIELD_32;
        let a = DigitVector::with_digit_bits(vec![2, 3], 4).unwrap();
        let b = DigitVector::with_digit_bits(vec![4, 5], 4).unwrap();
        assert_eq!(bmul_ntt(&a, &b, &f).unwrap().digits(), &[8, 6]);
        let one = DigitVector::with_digit_bits(vec![1, 0], 4).unwrap();
        assert_eq!(bmul_ntt(&a, &one, &f).unwrap(), a);
        let zero = DigitVector::zero(2, 4).unwrap();
        assert_eq!(bmul_ntt(&a, &zero, &f).unwrap(), zero);
    }

    #[test]
    fn unsafe_width_rejected() {
        let f = PRIME_FIELD_32;
        let a = DigitVector::with_digit_bits(vec![(1 << 15) - 1; 4], 15).unwrap();
        assert!(matches!(
            bmul_ntt(&a, &a, &f),
            Err(Error::UnsafeDigitWidth { max_safe: 14, .. })
        ));
    }

    #[test]
    fn presets() {
        assert_eq!(preset_digit_width(&PRIME_FIELD_64, 1 << 18).unwrap(), 23);
        let d = preset_digit_width(&PRIME_FIELD_32, 1 << 18).unwrap();
        assert!(check_digit_width(&PRIME_FIELD_32, d, (1usize << 18).div_ceil(d as usize)).is_ok());
    }
}
