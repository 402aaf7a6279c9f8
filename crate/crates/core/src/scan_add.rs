//! Addition as map, exclusive carry scan, map.
//!
//! Each limb position produces a partial sum together with two flags:
//! whether the limb addition overflowed and whether the partial sum is the
//! all-ones word. An exclusive scan with the carry operator turns those flags
//! into the incoming carry of every position, which the final map adds in.

use crate::error::{Error, Result};
use crate::limb::{low_mask, Limb};
use crate::types::{BigUint, BlockConfig, DigitVector};

/// Packed carry flags: bit 0 overflow, bit 1 is-max, bit 2 segment start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CarryFlags(pub u32);

impl CarryFlags {
    pub const OVERFLOW: u32 = 1;
    pub const IS_MAX: u32 = 2;
    pub const SEGMENT_START: u32 = 4;

    /// Neutral element of both the plain and the segmented operator.
    pub const NEUTRAL: CarryFlags = CarryFlags(2);

    pub fn pack(overflow: bool, is_max: bool, segment_start: bool) -> Self {
        CarryFlags(overflow as u32 | (is_max as u32) << 1 | (segment_start as u32) << 2)
    }

    pub fn overflow(self) -> bool {
        self.0 & Self::OVERFLOW != 0
    }

    pub fn is_max(self) -> bool {
        self.0 & Self::IS_MAX != 0
    }

    pub fn segment_start(self) -> bool {
        self.0 & Self::SEGMENT_START != 0
    }

    pub fn with_segment_start(self, start: bool) -> Self {
        if start {
            CarryFlags(self.0 | Self::SEGMENT_START)
        } else {
            CarryFlags(self.0 & !Self::SEGMENT_START)
        }
    }

    /// Carry-in for the position this flag was scanned into.
    pub fn carry(self) -> bool {
        self.overflow()
    }
}

/// Carry operator over `(overflow, is_max)` pairs; neutral element `(false, true)`.
pub fn carry_op_nice((ov1, mx1): (bool, bool), (ov2, mx2): (bool, bool)) -> (bool, bool) {
    ((ov1 && mx2) || ov2, mx1 && mx2)
}

/// Bit-packed form of [`carry_op_nice`].
#[inline]
pub fn carry_op_eff(c1: CarryFlags, c2: CarryFlags) -> CarryFlags {
    let (c1, c2) = (c1.0, c2.0);
    CarryFlags((c1 & c2 & 2) | (((c1 & (c2 >> 1)) | c2) & 1))
}

/// Segmented lifting of [`carry_op_eff`]: a right operand that starts a
/// segment absorbs everything to its left.
#[inline]
pub fn carry_op_sgm(c1: CarryFlags, c2: CarryFlags) -> CarryFlags {
    if c2.0 & 4 != 0 {
        c2
    } else {
        CarryFlags(carry_op_eff(c1, c2).0 | ((c1.0 | c2.0) & 4))
    }
}

/// `[e, x0, x0·x1, ..., x0·…·x(n-2)]`.
pub fn exclusive_scan<T: Copy, F: Fn(T, T) -> T>(op: F, neutral: T, xs: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = neutral;
    for &x in xs {
        out.push(acc);
        acc = op(acc, x);
    }
    out
}

/// `[x0, x0·x1, ..., x0·…·x(n-1)]`.
pub fn inclusive_scan<T: Copy, F: Fn(T, T) -> T>(op: F, xs: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(xs.len());
    let mut iter = xs.iter();
    if let Some(&first) = iter.next() {
        let mut acc = first;
        out.push(acc);
        for &x in iter {
            acc = op(acc, x);
            out.push(acc);
        }
    }
    out
}

/// Exclusive scan restarting at every segment start: positions flagged by
/// `is_start` receive `neutral`, the rest the inclusive segmented prefix of
/// their left neighbour.
pub fn segmented_exclusive_scan<T, F, S>(op: F, neutral: T, xs: &[T], is_start: S) -> Vec<T>
where
    T: Copy,
    F: Fn(T, T) -> T,
    S: Fn(usize) -> bool,
{
    let inclusive = inclusive_scan(op, xs);
    (0..xs.len())
        .map(|i| if i == 0 || is_start(i) { neutral } else { inclusive[i - 1] })
        .collect()
}

/// First map of the addition: partial sum and its carry flags.
#[inline]
pub fn limb_partial<W: Limb>(a: W, b: W) -> (W, CarryFlags) {
    let p = a.wrapping_add(b);
    (p, CarryFlags::pack(p < a, p == W::MAX, false))
}

/// Final map: add the scanned carry-in.
#[inline]
pub fn apply_carry<W: Limb>(p: W, incoming: CarryFlags) -> W {
    if incoming.carry() {
        p.wrapping_add(W::ONE)
    } else {
        p
    }
}

fn check_same<W: Limb>(a: &BigUint<W>, b: &BigUint<W>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// `a + b mod 2^(W::BITS * M)`.
pub fn badd<W: Limb>(a: &BigUint<W>, b: &BigUint<W>) -> Result<BigUint<W>> {
    check_same(a, b)?;
    let (partials, flags): (Vec<W>, Vec<CarryFlags>) = a
        .limbs()
        .iter()
        .zip(b.limbs())
        .map(|(&x, &y)| limb_partial(x, y))
        .unzip();
    let carries = exclusive_scan(carry_op_eff, CarryFlags::NEUTRAL, &flags);
    let limbs = partials
        .into_iter()
        .zip(carries)
        .map(|(p, c)| apply_carry(p, c))
        .collect();
    BigUint::from_limbs(limbs)
}

/// `ipb` independent additions of `m`-limb integers laid out back to back,
/// propagated with a single segmented scan.
pub fn badd_batch<W: Limb>(a: &[W], b: &[W], cfg: &BlockConfig) -> Result<Vec<W>> {
    let total = cfg.total();
    for len in [a.len(), b.len()] {
        if len != total {
            return Err(Error::LengthMismatch {
                left: len,
                right: total,
            });
        }
    }
    let m = cfg.m;
    let (partials, flags): (Vec<W>, Vec<CarryFlags>) = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (&x, &y))| {
            let (p, f) = limb_partial(x, y);
            (p, f.with_segment_start(i % m == 0))
        })
        .unzip();
    let carries = segmented_exclusive_scan(carry_op_sgm, CarryFlags::NEUTRAL, &flags, |i| i % m == 0);
    Ok(partials
        .into_iter()
        .zip(carries)
        .map(|(p, c)| apply_carry(p, c))
        .collect())
}

/// Flags for one digit position of the doubled-digit addition.
///
/// Digits are doubled into a `(d+1)`-bit machine word, so a machine overflow
/// is exactly a base-`2^d` carry. The propagate condition is the largest even
/// word `2^(d+1) - 2` (twice the largest digit), not the all-ones word.
#[inline]
pub fn doubled_partial(a: u64, b: u64, digit_bits: u32) -> (u64, CarryFlags) {
    let mask = low_mask(digit_bits + 1);
    let a2 = a << 1;
    let p = a2.wrapping_add(b << 1) & mask;
    (p, CarryFlags::pack(p < a2, p == mask - 1, false))
}

/// Halves a doubled sum, reinjecting the carry recorded in its low bit.
#[inline]
pub fn doubled_finish(p: u64, incoming: CarryFlags, digit_bits: u32) -> u64 {
    let r = p + incoming.carry() as u64;
    ((r >> 1) + (r & 1)) & low_mask(digit_bits)
}

/// Base-`2^d` addition over digit vectors by doubling every digit, adding in
/// the `(d+1)`-bit machine base with the carry scan, and halving back.
pub fn badd_base(a: &DigitVector, b: &DigitVector) -> Result<DigitVector> {
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
    let d = a.digit_bits();
    let (partials, flags): (Vec<u64>, Vec<CarryFlags>) = a
        .digits()
        .iter()
        .zip(b.digits())
        .map(|(&x, &y)| doubled_partial(x, y, d))
        .unzip();
    let carries = exclusive_scan(carry_op_eff, CarryFlags::NEUTRAL, &flags);
    let digits = partials
        .into_iter()
        .zip(carries)
        .map(|(p, c)| doubled_finish(p, c, d))
        .collect();
    Ok(DigitVector::from_parts_unchecked(digits, d, a.container_bits()))
}

/// Direct base-`2^d` ripple-carry addition, the reference for [`badd_base`].
pub fn add_base_direct(a: &DigitVector, b: &DigitVector) -> Result<DigitVector> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let d = a.digit_bits();
    let mask = low_mask(d) as u128;
    let mut carry = 0u128;
    let digits = a
        .digits()
        .iter()
        .zip(b.digits())
        .map(|(&x, &y)| {
            let s = x as u128 + y as u128 + carry;
            carry = s >> d;
            (s & mask) as u64
        })
        .collect();
    Ok(DigitVector::from_parts_unchecked(digits, d, a.container_bits()))
}
