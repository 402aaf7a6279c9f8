//! Machine words used as limbs, together with their double-width companions.

use std::fmt::{Debug, LowerHex};

/// An unsigned machine word usable as a big-integer limb.
///
/// `Wide` is the double-width type (`ubig`) that holds a full limb product
/// without overflow.
pub trait Limb:
    Copy + Clone + Default + Eq + Ord + Debug + LowerHex + Send + Sync + 'static
{
    type Wide: Copy + Clone + Default + Eq + Ord + Debug + Send + Sync + 'static;

    const BITS: u32;
    const ZERO: Self;
    const ONE: Self;
    const MAX: Self;

    fn to_u64(self) -> u64;
    /// Keeps the low `BITS` bits of `v`.
    fn from_u64(v: u64) -> Self;

    fn wrapping_add(self, rhs: Self) -> Self;

    fn mul_wide(self, rhs: Self) -> Self::Wide;
    fn wide_from(self) -> Self::Wide;
    fn wide_wrapping_add(a: Self::Wide, b: Self::Wide) -> Self::Wide;
    fn wide_low(a: Self::Wide) -> Self;
    fn wide_high(a: Self::Wide) -> Self;
    fn wide_to_u128(a: Self::Wide) -> u128;
}

macro_rules! impl_limb {
    ($t:ty, $wide:ty) => {
        impl Limb for $t {
            type Wide = $wide;

            const BITS: u32 = <$t>::BITS;
            const ZERO: Self = 0;
            const ONE: Self = 1;
            const MAX: Self = <$t>::MAX;

            #[inline]
            fn to_u64(self) -> u64 {
                self as u64
            }
            #[inline]
            fn from_u64(v: u64) -> Self {
                v as $t
            }
            #[inline]
            fn wrapping_add(self, rhs: Self) -> Self {
                <$t>::wrapping_add(self, rhs)
            }
            #[inline]
            fn mul_wide(self, rhs: Self) -> $wide {
                (self as $wide) * (rhs as $wide)
            }
            #[inline]
            fn wide_from(self) -> $wide {
                self as $wide
            }
            #[inline]
            fn wide_wrapping_add(a: $wide, b: $wide) -> $wide {
                a.wrapping_add(b)
            }
            #[inline]
            fn wide_low(a: $wide) -> Self {
                a as $t
            }
            #[inline]
            fn wide_high(a: $wide) -> Self {
                (a >> <$t>::BITS) as $t
            }
            #[inline]
            fn wide_to_u128(a: $wide) -> u128 {
                a as u128
            }
        }
    };
}

impl_limb!(u8, u16);
impl_limb!(u16, u32);
impl_limb!(u32, u64);
impl_limb!(u64, u128);

/// Mask with the low `bits` bits set (`bits` in `0..=64`).
#[inline]
pub(crate) fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}
