//! Quadratic multiplication with a load-balanced partition of the result.
//!
//! Thread `t` of an instance owns the `Q` result positions starting at `Q*t`
//! and the `Q` positions ending at `M - Q*t`. Low positions have few terms and
//! their mirror images many, so every thread evaluates `Q*M + Q` products.
//! Each owned run is summed exactly into double-width accumulators, folded
//! into `Q` low words plus a high word and a carry, and the runs are merged
//! by adding a low-part integer `L` and high-part integers `H`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::limb::Limb;
use crate::scan_add::badd_batch;
use crate::types::{BigUint, BlockConfig};

/// Result positions owned by one thread of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadRanges {
    pub front: Range<usize>,
    pub back: Range<usize>,
}

pub fn thread_partition(ltid: usize, m: usize, q: usize) -> Result<ThreadRanges> {
    if q == 0 || m % (2 * q) != 0 {
        return Err(Error::InvalidConfig(format!("2*q = {} does not divide m = {m}", 2 * q)));
    }
    let threads = m / (2 * q);
    if ltid >= threads {
        return Err(Error::ThreadOutOfRange { ltid, threads });
    }
    Ok(ThreadRanges {
        front: q * ltid..q * ltid + q,
        back: m - q * (ltid + 1)..m - q * ltid,
    })
}

/// Number of products a convolution run starting at `k1` evaluates.
pub fn conv_terms(k1: usize, q: usize) -> usize {
    q * (k1 + 1) + q * (q - 1) / 2
}

/// A double-width running sum plus a count of its wraparounds; the value is
/// `accum + carry * 2^(2w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AccumPair<W: Limb> {
    pub accum: W::Wide,
    pub carry: u32,
}

impl<W: Limb> AccumPair<W> {
    /// Adds `a * b`. A wraparound is detected by the high half decreasing.
    #[inline]
    pub fn add_term(&mut self, a: W, b: W) {
        let prev_high = W::wide_high(self.accum);
        self.accum = W::wide_wrapping_add(self.accum, a.mul_wide(b));
        self.carry += (W::wide_high(self.accum) < prev_high) as u32;
    }

    /// Adds another accumulator.
    #[inline]
    pub fn absorb(&mut self, other: &AccumPair<W>) {
        let before = self.accum;
        self.accum = W::wide_wrapping_add(self.accum, other.accum);
        self.carry += other.carry + (self.accum < before) as u32;
    }

    /// Exact value as `(low 128 bits, bits above 2w)`; only meaningful as a
    /// whole for `w <= 32`.
    pub fn parts(&self) -> (u128, u32) {
        (W::wide_to_u128(self.accum), self.carry)
    }
}

/// `Q` consecutive result positions starting at `start`, encoded as
/// `sum(lows[q] * 2^(w*q)) + high * 2^(w*Q) + carry * 2^(w*(Q+1))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvPartial<W: Limb> {
    pub start: usize,
    pub lows: Vec<W>,
    pub high: W,
    pub carry: u64,
}

impl<W: Limb> ConvPartial<W> {
    /// `[high, carry words...]` padded to `len` words.
    pub fn tail(&self, len: usize) -> Vec<W> {
        let mut out = Vec::with_capacity(len);
        out.push(self.high);
        let mut c = self.carry;
        for _ in 1..len {
            out.push(W::from_u64(c));
            c = if W::BITS >= 64 { 0 } else { c >> W::BITS };
        }
        assert_eq!(c, 0, "carry {} does not fit {} tail words", self.carry, len);
        out
    }
}

/// Folds per-position accumulators into low words, a high word and a carry.
pub fn combine<W: Limb>(start: usize, accums: &[AccumPair<W>]) -> ConvPartial<W> {
    let mut lows = Vec::with_capacity(accums.len());
    lows.push(W::wide_low(accums[0].accum));
    let mut h_res = W::wide_high(accums[0].accum);
    let mut c_res = accums[0].carry as u64;
    for acc in &accums[1..] {
        let l = W::wide_low(acc.accum);
        let h = W::wide_high(acc.accum);
        let low = l.wrapping_add(h_res);
        lows.push(low);
        let t = h.to_u64() as u128 + c_res as u128 + (low < l) as u128;
        h_res = W::from_u64(t as u64);
        c_res = acc.carry as u64 + (t >> W::BITS) as u64;
    }
    ConvPartial {
        start,
        lows,
        high: h_res,
        carry: c_res,
    }
}

/// Exact convolution for positions `k1..k1+q` restricted to `i <= k`:
/// `C'_k = sum_{i+j=k} a[i] * b[j]`.
pub fn conv_partial_at<W: Limb>(k1: usize, a: &[W], b: &[W], q: usize) -> ConvPartial<W> {
    assert!(q > 0 && k1 + q <= a.len() && a.len() == b.len());
    let mut accums = vec![AccumPair::<W>::default(); q];
    for i in 0..=k1 {
        let ai = a[i];
        let j = k1 - i;
        for (qq, acc) in accums.iter_mut().enumerate() {
            acc.add_term(ai, b[j + qq]);
        }
    }
    // remaining terms have i in k1+1..k1+q
    for qq in 1..q {
        let ai = a[k1 + qq];
        for i in 0..q - qq {
            accums[i + qq].add_term(ai, b[i]);
        }
    }
    combine(k1, &accums)
}

/// Words needed for `[high, carry]` of one run; the carry is below `m`.
pub fn tail_len<W: Limb>(m: usize) -> usize {
    let carry_bits = (usize::BITS - m.leading_zeros()).max(1);
    1 + carry_bits.div_ceil(W::BITS) as usize
}

/// Number of `H` integers needed so that tails of adjacent runs never share
/// a slot: two for `Q = 1`, one for `Q >= 2` at `w >= 32`.
pub fn high_arrays<W: Limb>(m: usize, q: usize) -> usize {
    tail_len::<W>(m).div_ceil(q)
}

/// Position in instance-local coordinates and array index for tail word `t`
/// of a run starting at `start`.
#[inline]
pub fn tail_slot(start: usize, q: usize, t: usize) -> (usize, usize) {
    (t / q, start + q + t)
}

/// Lays out the runs of every thread into `L` and the `H` arrays, dropping
/// positions at or beyond `M`, then sums them with segmented additions.
pub fn publish_and_resolve<W: Limb>(
    partials: &[[ConvPartial<W>; 2]],
    cfg: &BlockConfig,
) -> Result<Vec<W>> {
    if partials.len() != cfg.mul_threads() {
        return Err(Error::LengthMismatch {
            left: partials.len(),
            right: cfg.mul_threads(),
        });
    }
    let (m, q) = (cfg.m, cfg.q);
    let per_instance = cfg.threads_per_instance();
    let tail = tail_len::<W>(m);
    let mut low = vec![W::ZERO; cfg.total()];
    let mut highs = vec![vec![W::ZERO; cfg.total()]; high_arrays::<W>(m, q)];
    for (tid, runs) in partials.iter().enumerate() {
        let offset = (tid / per_instance) * m;
        for run in runs {
            for (i, &l) in run.lows.iter().enumerate() {
                low[offset + run.start + i] = l;
            }
            for (t, w) in run.tail(tail).into_iter().enumerate() {
                let (array, pos) = tail_slot(run.start, q, t);
                if pos < m {
                    highs[array][offset + pos] = w;
                }
            }
        }
    }
    let mut acc = low;
    for h in &highs {
        acc = badd_batch(&acc, h, cfg)?;
    }
    Ok(acc)
}

/// Convolution step of every thread in the block; instance `i` occupies
/// limbs `i*M..(i+1)*M` of `a` and `b`.
pub fn block_partials<W: Limb>(a: &[W], b: &[W], cfg: &BlockConfig) -> Vec<[ConvPartial<W>; 2]> {
    let (m, q) = (cfg.m, cfg.q);
    let per_instance = cfg.threads_per_instance();
    (0..cfg.mul_threads())
        .map(|tid| {
            let offset = (tid / per_instance) * m;
            let (a, b) = (&a[offset..offset + m], &b[offset..offset + m]);
            let ranges = thread_partition(tid % per_instance, m, q).expect("tid within block");
            [
                conv_partial_at(ranges.front.start, a, b, q),
                conv_partial_at(ranges.back.start, a, b, q),
            ]
        })
        .collect()
}

/// `ipb` products modulo `2^(w*M)`, instances laid out back to back.
pub fn bmul_classical_batch<W: Limb>(a: &[W], b: &[W], cfg: &BlockConfig) -> Result<Vec<W>> {
    for len in [a.len(), b.len()] {
        if len != cfg.total() {
            return Err(Error::LengthMismatch {
                left: len,
                right: cfg.total(),
            });
        }
    }
    let partials = block_partials(a, b, cfg);
    publish_and_resolve(&partials, cfg)
}

/// `a * b mod 2^(w*M)`; requires `2q | M`.
pub fn bmul_classical<W: Limb>(a: &BigUint<W>, b: &BigUint<W>, q: usize) -> Result<BigUint<W>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let cfg = BlockConfig::new(a.len(), q, 1)?;
    BigUint::from_limbs(bmul_classical_batch(a.limbs(), b.limbs(), &cfg)?)
}

/// Tiled accumulate-into-`C` multiplication with `t x t` tiles.
pub fn tiled_mul_reference<W: Limb>(a: &BigUint<W>, b: &BigUint<W>, t: usize) -> Result<BigUint<W>> {
    let m = a.len();
    if b.len() != m {
        return Err(Error::LengthMismatch { left: m, right: b.len() });
    }
    if t == 0 || m % t != 0 {
        return Err(Error::InvalidConfig(format!("tile size {t} does not divide m = {m}")));
    }
    let (a, b) = (a.limbs(), b.limbs());
    let mut c = vec![AccumPair::<W>::default(); m];
    let mut tile = vec![AccumPair::<W>::default(); 2 * t];
    for ii in (0..m).step_by(t) {
        for jj in (0..m).step_by(t) {
            if ii + jj >= m {
                continue;
            }
            tile.iter_mut().for_each(|x| *x = AccumPair::default());
            for i in 0..t {
                for j in 0..t {
                    if ii + jj + i + j < m {
                        tile[i + j].add_term(a[ii + i], b[jj + j]);
                    }
                }
            }
            for (tid, part) in tile.iter().enumerate() {
                if ii + jj + tid < m {
                    c[ii + jj + tid].absorb(part);
                }
            }
        }
    }
    // resolve: low word at k, high word at k+1, carry words from k+2
    let carry_words = tail_len::<W>(m) - 1;
    let mut arrays = vec![vec![W::ZERO; m]; 2 + carry_words];
    for (k, acc) in c.iter().enumerate() {
        arrays[0][k] = W::wide_low(acc.accum);
        if k + 1 < m {
            arrays[1][k + 1] = W::wide_high(acc.accum);
        }
        let mut carry = acc.carry as u64;
        for (w, array) in arrays[2..].iter_mut().enumerate() {
            if k + 2 + w < m {
                array[k + 2 + w] = W::from_u64(carry);
            }
            carry = if W::BITS >= 64 { 0 } else { carry >> W::BITS };
        }
    }
    let cfg_m = BlockConfig { m, q: 1, ipb: 1 };
    let mut acc = arrays[0].clone();
    for array in &arrays[1..] {
        acc = badd_batch(&acc, array, &cfg_m)?;
    }
    BigUint::from_limbs(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        let r = thread_partition(0, 8, 2).unwrap();
        assert_eq!((r.front, r.back), (0..2, 6..8));
        let r = thread_partition(1, 8, 2).unwrap();
        assert_eq!((r.front, r.back), (2..4, 4..6));
        assert_eq!(
            thread_partition(2, 8, 2),
            Err(Error::ThreadOutOfRange { ltid: 2, threads: 2 })
        );
        assert!(thread_partition(0, 6, 2).is_err());
    }

    #[test]
    fn partition_tiles_and_balances() {
        for (m, q) in [(64, 4), (64, 1), (8, 2), (96, 3), (4096, 4)] {
            let mut seen = vec![0u32; m];
            for t in 0..m / (2 * q) {
                let r = thread_partition(t, m, q).unwrap();
                for i in r.front.clone().chain(r.back.clone()) {
                    seen[i] += 1;
                }
                assert_eq!(conv_terms(r.front.start, q) + conv_terms(r.back.start, q), q * m + q);
            }
            assert!(seen.iter().all(|&c| c == 1), "m={m} q={q}");
        }
    }

    #[test]
    fn accum_pair_wraps_exactly() {
        let mut acc = AccumPair::<u8>::default();
        for _ in 0..1000 {
            acc.add_term(0xff, 0xff);
        }
        let (lo, hi) = acc.parts();
        assert_eq!(lo + ((hi as u128) << 16), 1000 * 0xfe01);
    }

    #[test]
    fn conv_partial_identity_unit() {
        let a = [1u8, 0, 0, 0, 0, 0, 0, 0];
        let b = [9u8, 8, 7, 6, 5, 4, 3, 2];
        let p = conv_partial_at(0, &a, &b, 2);
        assert_eq!(p.lows, vec![9, 8]);
        assert_eq!((p.high, p.carry), (0, 0));
        let z = [0u8; 8];
        let p = conv_partial_at(3, &z, &z, 4);
        assert_eq!(p.lows, vec![0; 4]);
        assert_eq!((p.high, p.carry), (0, 0));
    }

    #[test]
    fn mul_examples() {
        let a = BigUint::<u8>::from_limbs(vec![2, 3]).unwrap();
        let b = BigUint::<u8>::from_limbs(vec![4, 5]).unwrap();
        assert_eq!(bmul_classical(&a, &b, 1).unwrap().limbs(), &[8, 22]);
        assert_eq!(tiled_mul_reference(&a, &b, 1).unwrap().limbs(), &[8, 22]);
        assert_eq!(tiled_mul_reference(&a, &b, 2).unwrap().limbs(), &[8, 22]);
        let x = BigUint::<u8>::all_max(2);
        assert_eq!(bmul_classical(&x, &x, 1).unwrap().limbs(), &[1, 0]);
        assert_eq!(bmul_classical(&a, &BigUint::one(2), 1).unwrap(), a);
        assert!(bmul_classical(&a, &BigUint::zero(2), 1).unwrap().is_zero());
        assert!(tiled_mul_reference(&a, &BigUint::zero(2), 2).unwrap().is_zero());
        assert!(bmul_classical(&a, &b, 2).is_err());
    }

    #[test]
    fn single_thread_publish_is_l_plus_h() {
        // M = 2Q: one thread, the back run's tail falls off the end.
        let a = BigUint::<u16>::all_max(4);
        let got = bmul_classical(&a, &a, 2).unwrap();
        assert_eq!(got.limbs(), &[1, 0, 0, 0]);
    }

    #[test]
    fn tail_sizes() {
        assert_eq!(tail_len::<u64>(4096), 2);
        assert_eq!(high_arrays::<u64>(4096, 2), 1);
        assert_eq!(high_arrays::<u64>(4096, 1), 2);
        assert_eq!(tail_len::<u8>(4096), 3);
        assert_eq!(tail_len::<u8>(64), 2);
    }
}
