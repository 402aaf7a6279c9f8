//! Schoolbook reference arithmetic.
//!
//! Works one limb at a time through a `u128` scalar and sequential ripple
//! carries. Nothing here calls into the kernel modules.

use crate::error::{Error, Result};
use crate::limb::Limb;
use crate::types::BigUint;

fn lengths<W: Limb>(a: &BigUint<W>, b: &BigUint<W>) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.len())
}

/// Sequential ripple-carry addition truncated to `M` limbs.
pub fn oracle_add<W: Limb>(a: &BigUint<W>, b: &BigUint<W>) -> Result<BigUint<W>> {
    let m = lengths(a, b)?;
    let bits = W::BITS;
    let mask = u128::MAX >> (128 - bits);
    let mut out = Vec::with_capacity(m);
    let mut carry = 0u128;
    for i in 0..m {
        let s = a.limbs()[i].to_u64() as u128 + b.limbs()[i].to_u64() as u128 + carry;
        out.push(W::from_u64((s & mask) as u64));
        carry = s >> bits;
    }
    BigUint::from_limbs(out)
}

/// Double-loop product reduced modulo `2^(W::BITS * M)`.
pub fn oracle_mul<W: Limb>(a: &BigUint<W>, b: &BigUint<W>) -> Result<BigUint<W>> {
    let m = lengths(a, b)?;
    let bits = W::BITS;
    let mask = u128::MAX >> (128 - bits);
    let mut acc = vec![0u128; m];
    for i in 0..m {
        let ai = a.limbs()[i].to_u64() as u128;
        if ai == 0 {
            continue;
        }
        let mut carry = 0u128;
        for j in 0..m - i {
            // ai*bj + acc + carry < 2^(2*bits) for bits <= 64
            let t = ai * b.limbs()[j].to_u64() as u128 + acc[i + j] + carry;
            acc[i + j] = t & mask;
            carry = t >> bits;
        }
    }
    BigUint::from_limbs(acc.into_iter().map(|x| W::from_u64(x as u64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_examples() {
        let a = BigUint::<u8>::from_limbs(vec![0xff, 0xff]).unwrap();
        let b = BigUint::<u8>::from_limbs(vec![1, 0]).unwrap();
        assert_eq!(oracle_add(&a, &b).unwrap().limbs(), &[0, 0]);
        assert_eq!(oracle_add(&a, &BigUint::zero(2)).unwrap(), a);
    }

    #[test]
    fn mul_examples() {
        let a = BigUint::<u8>::from_limbs(vec![2, 3]).unwrap();
        let b = BigUint::<u8>::from_limbs(vec![4, 5]).unwrap();
        let p = oracle_mul(&a, &b).unwrap();
        // 770 * 1284 = 0xf1608
        assert_eq!(p.limbs(), &[8, 22]);
        let x = BigUint::<u8>::all_max(2);
        assert_eq!(oracle_mul(&x, &x).unwrap().limbs(), &[1, 0]);
        assert_eq!(oracle_mul(&a, &BigUint::one(2)).unwrap(), a);
        assert!(oracle_mul(&a, &BigUint::zero(2)).unwrap().is_zero());
    }

    #[test]
    fn mul_full_width_u64() {
        let x = BigUint::<u64>::all_max(2);
        // (2^128 - 1)^2 mod 2^128 = 1
        assert_eq!(oracle_mul(&x, &x).unwrap().limbs(), &[1, 0]);
    }
}
