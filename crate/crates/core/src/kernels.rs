//! The addition, classical multiplication and NTT pipelines expressed as
//! phased kernels over virtual threads.
//!
//! Every builder returns a [`PreparedKernel`]: the phase list, the initial
//! buffer contents and the buffer holding the result. Running it with any
//! schedule must reproduce the sequential implementation bit for bit.

use std::sync::Arc;

use crate::block::{check_schedule_independence, run_phased_kernel, PhasedKernel, RunOptions, ScheduleReport};
use crate::classical::{conv_partial_at, high_arrays, tail_len, tail_slot, thread_partition};
use crate::error::{Error, Result};
use crate::field::{omega_table, FieldSpec, OmegaTable};
use crate::limb::{low_mask, Limb};
use crate::ntt::{bit_reverse, butterfly_indices, check_digit_width, split_digits, split_factor, transform_len, FieldVector};
use crate::scan_add::{carry_op_sgm, doubled_finish, doubled_partial, CarryFlags};
use crate::types::{BigUint, BlockConfig, DigitVector};

/// Private registers of a virtual thread.
pub type Regs = Vec<u64>;

/// A kernel together with its inputs.
pub struct PreparedKernel {
    pub kernel: PhasedKernel<Regs>,
    pub inputs: Vec<Vec<u64>>,
    pub output: usize,
    /// Leading words of the output buffer that form the result.
    pub output_len: usize,
}

impl PreparedKernel {
    pub fn run(&self, opts: RunOptions) -> Result<Vec<u64>> {
        let mut buffers = run_phased_kernel(&self.kernel, self.inputs.clone(), opts)?;
        let mut out = std::mem::take(&mut buffers[self.output]);
        out.truncate(self.output_len);
        Ok(out)
    }

    pub fn check_schedules(&self, trials: usize, seed: u64) -> Result<ScheduleReport> {
        check_schedule_independence(&self.kernel, &self.inputs, trials, seed)
    }
}

/// Buffer allocator for kernel builders.
#[derive(Default)]
struct Buffers(Vec<Vec<u64>>);

impl Buffers {
    fn push(&mut self, contents: Vec<u64>) -> usize {
        self.0.push(contents);
        self.0.len() - 1
    }

    fn zeros(&mut self, len: usize) -> usize {
        self.push(vec![0; len])
    }
}

/// Element-level arithmetic of an addition.
#[derive(Debug, Clone, Copy)]
enum AddMode {
    /// Machine words of the given width.
    Words(u32),
    /// Base-`2^d` digits through the doubling trick.
    Doubled(u32),
}

impl AddMode {
    #[inline]
    fn partial(self, a: u64, b: u64) -> (u64, CarryFlags) {
        match self {
            AddMode::Words(w) => {
                let mask = low_mask(w);
                let p = a.wrapping_add(b) & mask;
                (p, CarryFlags::pack(p < a, p == mask, false))
            }
            AddMode::Doubled(d) => doubled_partial(a, b, d),
        }
    }

    #[inline]
    fn finish(self, p: u64, incoming: CarryFlags) -> u64 {
        match self {
            AddMode::Words(w) => p.wrapping_add(incoming.carry() as u64) & low_mask(w),
            AddMode::Doubled(d) => doubled_finish(p, incoming, d),
        }
    }
}

/// Appends a segmented addition `out = a + b` over `n` elements in segments
/// of `seg`, `n / threads` consecutive elements per thread:
/// a map with a thread-local scan, a Hillis-Steele scan over the thread
/// aggregates, and a final map.
fn push_add(
    k: &mut PhasedKernel<Regs>,
    bufs: &mut Buffers,
    (a, b, out): (usize, usize, usize),
    n: usize,
    seg: usize,
    mode: AddMode,
    label: &str,
) {
    let threads = k.threads();
    let e = n / threads;
    let scan = [bufs.zeros(threads), bufs.zeros(threads)];
    k.push_phase(format!("{label}-map"), move |ctx| {
        let base = ctx.tid() * e;
        let mut regs = Vec::with_capacity(2 * e);
        let mut agg = CarryFlags::NEUTRAL;
        for i in base..base + e {
            let (p, f) = mode.partial(ctx.read(a, i)?, ctx.read(b, i)?);
            let f = f.with_segment_start(i % seg == 0);
            agg = carry_op_sgm(agg, f);
            regs.extend([p, f.0 as u64]);
        }
        *ctx.regs() = regs;
        ctx.write(scan[0], ctx.tid(), agg.0 as u64)
    });
    let steps = usize::BITS - (threads - 1).leading_zeros();
    for s in 0..steps {
        let (src, dst) = (scan[s as usize % 2], scan[(s as usize + 1) % 2]);
        let dist = 1usize << s;
        k.push_phase(format!("{label}-scan-{s}"), move |ctx| {
            let t = ctx.tid();
            let mut v = CarryFlags(ctx.read(src, t)? as u32);
            if t >= dist {
                v = carry_op_sgm(CarryFlags(ctx.read(src, t - dist)? as u32), v);
            }
            ctx.write(dst, t, v.0 as u64)
        });
    }
    let fin = scan[steps as usize % 2];
    k.push_phase(format!("{label}-finish"), move |ctx| {
        let t = ctx.tid();
        let mut acc = if t == 0 {
            CarryFlags::NEUTRAL
        } else {
            CarryFlags(ctx.read(fin, t - 1)? as u32)
        };
        let regs = std::mem::take(ctx.regs());
        for (r, pair) in regs.chunks_exact(2).enumerate() {
            let f = CarryFlags(pair[1] as u32);
            let incoming = if f.segment_start() { CarryFlags::NEUTRAL } else { acc };
            ctx.write(out, t * e + r, mode.finish(pair[0], incoming))?;
            acc = carry_op_sgm(acc, f);
        }
        Ok(())
    });
}

fn check_lengths(lens: [usize; 2], expected: usize) -> Result<()> {
    for len in lens {
        if len != expected {
            return Err(Error::LengthMismatch {
                left: len,
                right: expected,
            });
        }
    }
    Ok(())
}

fn to_words<W: Limb>(xs: &[W]) -> Vec<u64> {
    xs.iter().map(|x| x.to_u64()).collect()
}

fn from_words<W: Limb>(xs: &[u64]) -> Vec<W> {
    xs.iter().map(|&x| W::from_u64(x)).collect()
}

/// Batched addition with `ipb*m/(2q)` threads, `2q` limbs each.
pub fn badd_batch_kernel<W: Limb>(a: &[W], b: &[W], cfg: &BlockConfig) -> Result<PreparedKernel> {
    check_lengths([a.len(), b.len()], cfg.total())?;
    let mut bufs = Buffers::default();
    let ia = bufs.push(to_words(a));
    let ib = bufs.push(to_words(b));
    let out = bufs.zeros(cfg.total());
    let mut k = PhasedKernel::new(cfg.add_threads()).with_config(*cfg);
    push_add(&mut k, &mut bufs, (ia, ib, out), cfg.total(), cfg.m, AddMode::Words(W::BITS), "add");
    Ok(PreparedKernel {
        kernel: k,
        inputs: bufs.0,
        output: out,
        output_len: cfg.total(),
    })
}

pub fn badd_kernel<W: Limb>(a: &BigUint<W>, b: &BigUint<W>, q: usize) -> Result<PreparedKernel> {
    check_lengths([b.len(), a.len()], a.len())?;
    badd_batch_kernel(a.limbs(), b.limbs(), &BlockConfig::new(a.len(), q, 1)?)
}

pub fn phased_badd_batch<W: Limb>(a: &[W], b: &[W], cfg: &BlockConfig, opts: RunOptions) -> Result<Vec<W>> {
    Ok(from_words(&badd_batch_kernel(a, b, cfg)?.run(opts)?))
}

pub fn phased_badd<W: Limb>(a: &BigUint<W>, b: &BigUint<W>, q: usize, opts: RunOptions) -> Result<BigUint<W>> {
    BigUint::from_limbs(from_words(&badd_kernel(a, b, q)?.run(opts)?))
}

/// Base-`2^d` addition of digit vectors, `2q` digits per thread.
pub fn badd_base_kernel(a: &DigitVector, b: &DigitVector, q: usize) -> Result<PreparedKernel> {
    check_lengths([b.len(), a.len()], a.len())?;
    if a.digit_bits() != b.digit_bits() {
        return Err(Error::WidthMismatch {
            left: a.digit_bits(),
            right: b.digit_bits(),
        });
    }
    let cfg = BlockConfig::new(a.len(), q, 1)?;
    let mut bufs = Buffers::default();
    let ia = bufs.push(a.digits().to_vec());
    let ib = bufs.push(b.digits().to_vec());
    let out = bufs.zeros(a.len());
    let mut k = PhasedKernel::new(cfg.add_threads()).with_config(cfg);
    push_add(&mut k, &mut bufs, (ia, ib, out), a.len(), a.len(), AddMode::Doubled(a.digit_bits()), "add");
    Ok(PreparedKernel {
        kernel: k,
        inputs: bufs.0,
        output: out,
        output_len: a.len(),
    })
}

/// Classical multiplication of `ipb` instances: a convolution phase, a
/// publish phase into `L` and the `H` arrays, then chained additions.
pub fn bmul_classical_kernel<W: Limb>(a: &[W], b: &[W], cfg: &BlockConfig) -> Result<PreparedKernel> {
    check_lengths([a.len(), b.len()], cfg.total())?;
    let BlockConfig { m, q, .. } = *cfg;
    let total = cfg.total();
    let per_instance = cfg.threads_per_instance();
    let tail = tail_len::<W>(m);
    let mut bufs = Buffers::default();
    let ia = bufs.push(to_words(a));
    let ib = bufs.push(to_words(b));
    let low = bufs.zeros(total);
    let highs: Vec<usize> = (0..high_arrays::<W>(m, q)).map(|_| bufs.zeros(total)).collect();
    let mut k = PhasedKernel::new(cfg.mul_threads()).with_config(*cfg);

    // registers: for each of the two runs, q low words then `tail` words
    k.push_phase("mul-conv", move |ctx| {
        let tid = ctx.tid();
        let offset = (tid / per_instance) * m;
        let mut xa = Vec::with_capacity(m);
        let mut xb = Vec::with_capacity(m);
        for i in offset..offset + m {
            xa.push(W::from_u64(ctx.read(ia, i)?));
            xb.push(W::from_u64(ctx.read(ib, i)?));
        }
        let ranges = thread_partition(tid % per_instance, m, q)?;
        let mut regs = Vec::with_capacity(2 * (q + tail));
        for start in [ranges.front.start, ranges.back.start] {
            let run = conv_partial_at(start, &xa, &xb, q);
            regs.extend(run.lows.iter().map(|l| l.to_u64()));
            regs.extend(run.tail(tail).iter().map(|t| t.to_u64()));
        }
        *ctx.regs() = regs;
        Ok(())
    });
    let hs = highs.clone();
    k.push_phase("mul-publish", move |ctx| {
        let tid = ctx.tid();
        let offset = (tid / per_instance) * m;
        let ranges = thread_partition(tid % per_instance, m, q)?;
        let regs = std::mem::take(ctx.regs());
        for (start, run) in [ranges.front.start, ranges.back.start].into_iter().zip(regs.chunks_exact(q + tail)) {
            for (i, &l) in run[..q].iter().enumerate() {
                ctx.write(low, offset + start + i, l)?;
            }
            for (t, &w) in run[q..].iter().enumerate() {
                let (array, pos) = tail_slot(start, q, t);
                if pos < m {
                    ctx.write(hs[array], offset + pos, w)?;
                }
            }
        }
        Ok(())
    });
    let mut acc = low;
    for (j, &h) in highs.iter().enumerate() {
        let out = bufs.zeros(total);
        push_add(&mut k, &mut bufs, (acc, h, out), total, m, AddMode::Words(W::BITS), &format!("resolve-{j}"));
        acc = out;
    }
    Ok(PreparedKernel {
        kernel: k,
        inputs: bufs.0,
        output: acc,
        output_len: total,
    })
}

pub fn phased_bmul_classical<W: Limb>(a: &BigUint<W>, b: &BigUint<W>, q: usize, opts: RunOptions) -> Result<BigUint<W>> {
    check_lengths([b.len(), a.len()], a.len())?;
    let cfg = BlockConfig::new(a.len(), q, 1)?;
    BigUint::from_limbs(from_words(&bmul_classical_kernel(a.limbs(), b.limbs(), &cfg)?.run(opts)?))
}

/// Appends load, permute and butterfly phases transforming `src` into `dst`
/// with `threads = len/q` threads, each owning virtual indices
/// `tid + j*threads`.
fn push_transform(
    k: &mut PhasedKernel<Regs>,
    (src, dst): (usize, usize),
    len: usize,
    omegas: Arc<Vec<u64>>,
    spec: FieldSpec,
    label: &str,
) {
    let threads = k.threads();
    let lg = len.trailing_zeros();
    k.push_phase(format!("{label}-load"), move |ctx| {
        for v in (ctx.tid()..len).step_by(threads) {
            let x = ctx.read(src, v)?;
            ctx.write(dst, v, x)?;
        }
        Ok(())
    });
    k.push_phase(format!("{label}-permute"), move |ctx| {
        for v in (ctx.tid()..len).step_by(threads) {
            let r = bit_reverse(v, lg);
            if v < r {
                let (x, y) = (ctx.read(dst, v)?, ctx.read(dst, r)?);
                ctx.write(dst, v, y)?;
                ctx.write(dst, r, x)?;
            }
        }
        Ok(())
    });
    for t in 1..=lg {
        let omegas = Arc::clone(&omegas);
        k.push_phase(format!("{label}-stage-{t}"), move |ctx| {
            for vtid in (ctx.tid()..len / 2).step_by(threads) {
                let (lo, hi, root) = butterfly_indices(len, t, vtid);
                let tau = spec.mul(omegas[root], ctx.read(dst, hi)?);
                let x = ctx.read(dst, lo)?;
                ctx.write(dst, lo, spec.add(x, tau))?;
                ctx.write(dst, hi, spec.sub(x, tau))?;
            }
            Ok(())
        });
    }
}

fn push_scale(k: &mut PhasedKernel<Regs>, buf: usize, len: usize, factor: u64, spec: FieldSpec, label: &str) {
    let threads = k.threads();
    k.push_phase(format!("{label}-scale"), move |ctx| {
        for v in (ctx.tid()..len).step_by(threads) {
            let x = ctx.read(buf, v)?;
            ctx.write(buf, v, spec.mul(factor, x))?;
        }
        Ok(())
    });
}

fn fft_threads(len: usize, q: usize) -> Result<usize> {
    if q == 0 || (len > 1 && (q % 2 != 0 || len % q != 0)) {
        return Err(Error::InvalidConfig(format!("q = {q} must be even and divide the transform length {len}")));
    }
    Ok((len / q).max(1))
}

fn transform_kernel(v: &FieldVector, tbl: &OmegaTable, q: usize, inverse: bool) -> Result<PreparedKernel> {
    if v.len() != tbl.len() {
        return Err(Error::LengthMismatch {
            left: v.len(),
            right: tbl.len(),
        });
    }
    if v.spec != tbl.spec {
        return Err(Error::InvalidFieldSpec("vector and table use different fields".into()));
    }
    let len = v.len();
    let mut bufs = Buffers::default();
    let src = bufs.push(v.elems.clone());
    let dst = bufs.zeros(len);
    let mut k = PhasedKernel::new(fft_threads(len, q)?);
    let omegas = if inverse { &tbl.omegas_inv } else { &tbl.omegas };
    push_transform(&mut k, (src, dst), len, Arc::new(omegas.clone()), tbl.spec, "fft");
    if inverse {
        push_scale(&mut k, dst, len, tbl.inv_m, tbl.spec, "fft");
    }
    Ok(PreparedKernel {
        kernel: k,
        inputs: bufs.0,
        output: dst,
        output_len: len,
    })
}

/// Forward transform with `len/q` threads, `2 + lg len` phases.
pub fn ntt_forward_kernel(v: &FieldVector, tbl: &OmegaTable, q: usize) -> Result<PreparedKernel> {
    transform_kernel(v, tbl, q, false)
}

/// Inverse transform: the forward phases with inverse roots plus a scale phase.
pub fn ntt_inverse_kernel(v: &FieldVector, tbl: &OmegaTable, q: usize) -> Result<PreparedKernel> {
    transform_kernel(v, tbl, q, true)
}

/// Whole NTT product: two forward transforms, a pointwise product, an
/// inverse transform, the split into low and high/carry digit vectors and
/// their base-`2^d` addition. `q` elements per thread, `N/q` threads.
pub fn bmul_ntt_kernel(a: &DigitVector, b: &DigitVector, spec: &FieldSpec, q: usize) -> Result<PreparedKernel> {
    check_lengths([b.len(), a.len()], a.len())?;
    if a.digit_bits() != b.digit_bits() {
        return Err(Error::WidthMismatch {
            left: a.digit_bits(),
            right: b.digit_bits(),
        });
    }
    let d = a.digit_bits();
    let m_d = a.len();
    check_digit_width(spec, d, m_d)?;
    let len = transform_len(spec, m_d)?;
    let tbl = omega_table(spec, len)?;
    let spec = *spec;
    let lift = |v: &DigitVector| {
        let mut xs = v.digits().to_vec();
        xs.resize(len, 0);
        xs
    };
    let threads = fft_threads(len, q)?;
    let mut bufs = Buffers::default();
    let da = bufs.push(lift(a));
    let db = bufs.push(lift(b));
    let fa = bufs.zeros(len);
    let fb = bufs.zeros(len);
    let prod = bufs.zeros(len);
    let low = bufs.zeros(len);
    let hc = bufs.zeros(len);
    let out = bufs.zeros(len);
    let mut k = PhasedKernel::new(threads);
    let omegas = Arc::new(tbl.omegas.clone());
    push_transform(&mut k, (da, fa), len, Arc::clone(&omegas), spec, "fft-a");
    push_transform(&mut k, (db, fb), len, omegas, spec, "fft-b");
    k.push_phase("pointwise", move |ctx| {
        for v in (ctx.tid()..len).step_by(threads) {
            let x = spec.mul(ctx.read(fa, v)?, ctx.read(fb, v)?);
            ctx.write(fa, v, x)?;
        }
        Ok(())
    });
    push_transform(&mut k, (fa, prod), len, Arc::new(tbl.omegas_inv.clone()), spec, "ifft");
    push_scale(&mut k, prod, len, tbl.inv_m, spec, "ifft");
    let run = split_factor(&spec, d, len);
    let chunks = len / run;
    k.push_phase("split", move |ctx| {
        for c in (ctx.tid()..chunks).step_by(threads) {
            let s = c * run;
            let vals = (s..s + run).map(|i| ctx.read(prod, i)).collect::<Result<Vec<_>>>()?;
            let split = split_digits(&vals, d)?;
            for (i, &l) in split.lows.iter().enumerate() {
                ctx.write(low, s + i, l)?;
            }
            for (off, x) in [(run, split.high), (run + 1, split.carry)] {
                if s + off < len {
                    ctx.write(hc, s + off, x)?;
                } else if x != 0 {
                    return Err(Error::SplitOverflow { q: run, digit_bits: d });
                }
            }
        }
        Ok(())
    });
    push_add(&mut k, &mut bufs, (low, hc, out), len, len, AddMode::Doubled(d), "add");
    Ok(PreparedKernel {
        kernel: k,
        inputs: bufs.0,
        output: out,
        output_len: m_d,
    })
}

pub fn phased_bmul_ntt(a: &DigitVector, b: &DigitVector, spec: &FieldSpec, q: usize, opts: RunOptions) -> Result<DigitVector> {
    let out = bmul_ntt_kernel(a, b, spec, q)?.run(opts)?;
    DigitVector::new(out, a.digit_bits(), a.container_bits())
}
