mod common;

use midsize::classical::{bmul_classical, bmul_classical_batch, conv_partial_at, tiled_mul_reference};
use midsize::field::{omega_table, PRIME_FIELD_32, PRIME_FIELD_64};
use midsize::ntt::{bmul_ntt, ntt_forward, ntt_inverse, split_digits, FieldVector};
use midsize::oracle::{oracle_add, oracle_mul};
use midsize::scan_add::{add_base_direct, badd, badd_base, badd_batch};
use midsize::types::{digits_to_words, words_to_digits};
use midsize::{BigUint, BlockConfig, DigitVector, Error};
use num_bigint::BigUint as Big;
use proptest::prelude::*;

fn limbs<T: Arbitrary + Clone>(m: usize) -> impl Strategy<Value = Vec<T>> {
    proptest::collection::vec(any::<T>(), m)
}

/// Limbs biased toward the all-ones word, which stresses carry chains.
fn carry_heavy_u8(m: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(prop_oneof![3 => Just(u8::MAX), 1 => any::<u8>()], m)
}

fn pow2_len() -> impl Strategy<Value = usize> {
    (1u32..=8).prop_map(|e| 1usize << e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn add_matches_bigint(m in pow2_len(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = BigUint::<u32>::random(&mut rng, m);
        let b = BigUint::<u32>::random(&mut rng, m);
        prop_assert_eq!(badd(&a, &b).unwrap(), common::add_mod(&a, &b));
    }

    #[test]
    fn add_carry_heavy((a, b) in (1usize..48).prop_flat_map(|m| (carry_heavy_u8(m), carry_heavy_u8(m)))) {
        let a = BigUint::from_limbs(a).unwrap();
        let b = BigUint::from_limbs(b).unwrap();
        let want = common::add_mod(&a, &b);
        prop_assert_eq!(badd(&a, &b).unwrap(), want.clone());
        prop_assert_eq!(oracle_add(&a, &b).unwrap(), want);
    }

    #[test]
    fn batch_is_independent_additions(ipb in 1usize..6, (xa, xb) in (carry_heavy_u8(40), carry_heavy_u8(40))) {
        let m = 8;
        let cfg = BlockConfig::new(m, 2, ipb).unwrap();
        let n = ipb * m;
        let got = badd_batch(&xa[..n], &xb[..n], &cfg).unwrap();
        for i in 0..ipb {
            let a = BigUint::from_limbs(xa[i * m..(i + 1) * m].to_vec()).unwrap();
            let b = BigUint::from_limbs(xb[i * m..(i + 1) * m].to_vec()).unwrap();
            let want = common::add_mod(&a, &b);
            prop_assert_eq!(&got[i * m..(i + 1) * m], want.limbs());
        }
    }

    #[test]
    fn base_add_matches_direct(d in 1u32..40, raw in proptest::collection::vec((any::<u64>(), any::<u64>(), any::<bool>()), 1..40)) {
        let max = (1u64 << d) - 1;
        let pick = |x: u64, force: bool| if force { max } else { x & max };
        let a: Vec<u64> = raw.iter().map(|&(x, _, f)| pick(x, f)).collect();
        let b: Vec<u64> = raw.iter().map(|&(_, y, f)| pick(y, !f && y % 3 == 0)).collect();
        let a = DigitVector::with_digit_bits(a, d).unwrap();
        let b = DigitVector::with_digit_bits(b, d).unwrap();
        let got = badd_base(&a, &b).unwrap();
        prop_assert_eq!(&got, &add_base_direct(&a, &b).unwrap());
        let modulus = Big::from(1u32) << (d as usize * a.len());
        let want = (common::digits_value(a.digits(), d) + common::digits_value(b.digits(), d)) % modulus;
        prop_assert_eq!(common::digits_value(got.digits(), d), want);
    }

    #[test]
    fn classical_matches_bigint(q in prop_oneof![Just(1usize), Just(2), Just(4)], k in 1usize..6, seed in any::<u64>()) {
        use rand::SeedableRng;
        let m = 2 * q * k;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = BigUint::<u16>::random(&mut rng, m);
        let b = BigUint::<u16>::random(&mut rng, m);
        let want = common::mul_mod(&a, &b);
        prop_assert_eq!(bmul_classical(&a, &b, q).unwrap(), want.clone());
        prop_assert_eq!(tiled_mul_reference(&a, &b, q).unwrap(), want.clone());
        prop_assert_eq!(oracle_mul(&a, &b).unwrap(), want);
    }

    #[test]
    fn conv_partial_is_exact(q in 1usize..5, seed in any::<u64>()) {
        use rand::SeedableRng;
        let m = 16;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = BigUint::<u8>::random(&mut rng, m);
        let b = BigUint::<u8>::random(&mut rng, m);
        for k1 in 0..=m - q {
            let run = conv_partial_at(k1, a.limbs(), b.limbs(), q);
            // sum over positions k1..k1+q of C'_k * 256^(k - k1)
            let mut want = Big::from(0u32);
            for k in (k1..k1 + q).rev() {
                let c: u64 = (0..=k).map(|i| a.limbs()[i] as u64 * b.limbs()[k - i] as u64).sum();
                want = (want << 8) + Big::from(c);
            }
            let mut got = Big::from(run.carry);
            got = (got << 8) + Big::from(run.high);
            for &l in run.lows.iter().rev() {
                got = (got << 8) + Big::from(l);
            }
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn digits_roundtrip(m in 1usize..20, d in 1u32..64, seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = BigUint::<u32>::random(&mut rng, m);
        let digits = words_to_digits(&x, d).unwrap();
        prop_assert_eq!(digits.len(), (32 * m).div_ceil(d as usize));
        prop_assert_eq!(common::digits_value(digits.digits(), d), common::to_big(&x));
        prop_assert_eq!(digits_to_words::<u32>(&digits, m).unwrap(), x);
    }

    #[test]
    fn ntt_product_matches_bigint(m in 1usize..24, d in 4u32..24, seed in any::<u64>(), wide in any::<bool>()) {
        use rand::SeedableRng;
        let f = if wide { PRIME_FIELD_64 } else { PRIME_FIELD_32 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = BigUint::<u64>::random(&mut rng, m);
        let y = BigUint::<u64>::random(&mut rng, m);
        let a = words_to_digits(&x, d).unwrap();
        let b = words_to_digits(&y, d).unwrap();
        let got = match bmul_ntt(&a, &b, &f) {
            Err(Error::UnsafeDigitWidth { .. }) => return Ok(()),
            other => other.unwrap(),
        };
        let modulus = Big::from(1u32) << (d as usize * a.len());
        let want = (common::to_big(&x) * common::to_big(&y)) % modulus;
        prop_assert_eq!(common::digits_value(got.digits(), d), want);
    }

    #[test]
    fn ntt_roundtrip(lg in 0u32..10, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for f in [PRIME_FIELD_32, PRIME_FIELD_64] {
            let tbl = omega_table(&f, 1 << lg).unwrap();
            let v = FieldVector::new((0..1usize << lg).map(|_| rng.gen_range(0..f.p)).collect(), f).unwrap();
            prop_assert_eq!(ntt_inverse(&ntt_forward(&v, &tbl).unwrap(), &tbl).unwrap(), v);
        }
    }

    #[test]
    fn split_preserves_value(vals in proptest::collection::vec(0u64..PRIME_FIELD_32.p, 1..5), d in 12u32..32) {
        let Ok(s) = split_digits(&vals, d) else { return Ok(()) };
        let mut want = Big::from(0u32);
        for &v in vals.iter().rev() {
            want = (want << d) + Big::from(v);
        }
        let mut got = Big::from(s.carry);
        got = (got << d) + Big::from(s.high);
        for &l in s.lows.iter().rev() {
            got = (got << d) + Big::from(l);
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn oracle_ring_laws(a in limbs::<u8>(6), b in limbs::<u8>(6), c in limbs::<u8>(6)) {
        let (a, b, c) = (
            BigUint::from_limbs(a).unwrap(),
            BigUint::from_limbs(b).unwrap(),
            BigUint::from_limbs(c).unwrap(),
        );
        prop_assert_eq!(oracle_mul(&a, &b).unwrap(), oracle_mul(&b, &a).unwrap());
        prop_assert_eq!(oracle_add(&a, &b).unwrap(), oracle_add(&b, &a).unwrap());
        let lhs = oracle_mul(&a, &oracle_add(&b, &c).unwrap()).unwrap();
        let rhs = oracle_add(&oracle_mul(&a, &b).unwrap(), &oracle_mul(&a, &c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn classical_batch_instances_independent() {
    let cfg = BlockConfig::new(8, 2, 3).unwrap();
    let mut a = vec![u32::MAX; 24];
    let b = vec![u32::MAX; 24];
    a[8..16].fill(0);
    let got = bmul_classical_batch(&a, &b, &cfg).unwrap();
    let max = BigUint::<u32>::all_max(8);
    let sq = common::mul_mod(&max, &max);
    assert_eq!(&got[..8], sq.limbs());
    assert_eq!(&got[8..16], &[0; 8]);
    assert_eq!(&got[16..], sq.limbs());
}

#[test]
fn hex_roundtrip_matches_bigint() {
    let x = BigUint::<u16>::from_hex("1234abcd5678ef", 4).unwrap();
    assert_eq!(common::to_big(&x), Big::parse_bytes(b"1234abcd5678ef", 16).unwrap());
    assert_eq!(x.to_hex(), "1234abcd5678ef");
}
