//! Benchmark workloads and their throughput metrics.
//!
//! Addition throughput is reported as bytes accessed, `3 * insts * bits / 8`,
//! per second. Multiplication throughput is reported in normalized 32-bit
//! operations, `300 * insts * m * log2(m)` with `m = bits / 32`; the constant
//! models the instruction cost of a transform and is kept as a plain
//! normalization factor. The polynomial workload counts four times that.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::bmul_classical_batch;
use crate::error::{Error, Result};
use crate::field::{FieldSpec, PRIME_FIELD_64};
use crate::ntt::{bmul_ntt, check_digit_width, preset_digit_width};
use crate::oracle::{oracle_add, oracle_mul};
use crate::scan_add::{badd_base, badd_batch};
use crate::types::{digits_to_words_truncated, words_to_digits, BigUint, BlockConfig, DigitVector};

/// Limb type used by every workload.
pub type WorkLimb = u64;

const LIMB_BITS: usize = WorkLimb::BITS as usize;

/// Default cap on `bits * insts`.
pub const DEFAULT_BUDGET: u64 = 1 << 26;

/// Minimum number of instances checked against the oracle.
pub const MIN_CHECKED: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkloadOp {
    Add1,
    Add6,
    MulClassic,
    MulNtt,
    PolyClassic,
    PolyNtt,
}

impl WorkloadOp {
    pub const ALL: [WorkloadOp; 6] = [
        WorkloadOp::Add1,
        WorkloadOp::Add6,
        WorkloadOp::MulClassic,
        WorkloadOp::MulNtt,
        WorkloadOp::PolyClassic,
        WorkloadOp::PolyNtt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WorkloadOp::Add1 => "add1",
            WorkloadOp::Add6 => "add6",
            WorkloadOp::MulClassic => "mul-classic",
            WorkloadOp::MulNtt => "mul-ntt",
            WorkloadOp::PolyClassic => "poly-classic",
            WorkloadOp::PolyNtt => "poly-ntt",
        }
    }

    pub fn is_addition(self) -> bool {
        matches!(self, WorkloadOp::Add1 | WorkloadOp::Add6)
    }

    pub fn is_poly(self) -> bool {
        matches!(self, WorkloadOp::PolyClassic | WorkloadOp::PolyNtt)
    }

    pub fn uses_ntt(self) -> bool {
        matches!(self, WorkloadOp::MulNtt | WorkloadOp::PolyNtt)
    }

    pub fn default_runs(self) -> usize {
        if self.is_poly() {
            125
        } else {
            500
        }
    }
}

impl fmt::Display for WorkloadOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorkloadOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WorkloadOp::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::InvalidWorkload(format!("unknown op {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub op: WorkloadOp,
    pub num_bits: usize,
    pub num_insts: usize,
    /// Field word size, 32 or 64 (NTT only).
    pub field: u32,
    /// Digit width for NTT; the safe preset when absent.
    pub digit_bits: Option<u32>,
    /// Sequentialization factor; the largest of 4, 2, 1 dividing `M/2` when
    /// absent.
    pub q: Option<usize>,
    pub ipb: usize,
    pub runs: usize,
    pub seed: u64,
    pub budget: u64,
}

impl WorkloadSpec {
    pub fn new(op: WorkloadOp, num_bits: usize, num_insts: usize) -> Self {
        Self {
            op,
            num_bits,
            num_insts,
            field: 64,
            digit_bits: None,
            q: None,
            ipb: 1,
            runs: op.default_runs(),
            seed: 0,
            budget: DEFAULT_BUDGET,
        }
    }

    /// Limbs per instance.
    pub fn limbs(&self) -> usize {
        self.num_bits / LIMB_BITS
    }

    pub fn field_spec(&self) -> Result<FieldSpec> {
        FieldSpec::by_word_bits(self.field)
    }

    fn effective_q(&self) -> Result<usize> {
        let m = self.limbs();
        match self.q {
            Some(q) => Ok(q),
            None => [4, 2, 1]
                .into_iter()
                .find(|q| m % (2 * q) == 0)
                .ok_or_else(|| Error::InvalidWorkload(format!("{m} limbs cannot be split into pairs of runs"))),
        }
    }

    fn digit_width(&self) -> Result<u32> {
        let spec = self.field_spec()?;
        let d = match self.digit_bits {
            Some(d) => d,
            None => preset_digit_width(&spec, self.num_bits)?,
        };
        if d == 0 || d >= spec.word_bits {
            return Err(Error::InvalidDigitWidth {
                digit_bits: d,
                container_bits: spec.word_bits,
            });
        }
        check_digit_width(&spec, d, self.num_bits.div_ceil(d as usize))?;
        Ok(d)
    }

    /// Checks sizes, the budget and, for NTT ops, the digit width.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidWorkload(msg));
        if self.num_bits == 0 || self.num_bits % LIMB_BITS != 0 {
            return bad(format!("bits = {} is not a positive multiple of {LIMB_BITS}", self.num_bits));
        }
        if self.num_insts == 0 || self.runs == 0 || self.ipb == 0 {
            return bad("insts, runs and ipb must be positive".into());
        }
        if self.num_insts % self.ipb != 0 {
            return bad(format!("ipb = {} does not divide insts = {}", self.ipb, self.num_insts));
        }
        let work = self.num_bits as u128 * self.num_insts as u128;
        if work > self.budget as u128 {
            return bad(format!("bits * insts = {work} exceeds the budget {}", self.budget));
        }
        BlockConfig::new(self.limbs(), self.effective_q()?, self.ipb)?;
        if self.op.uses_ntt() {
            self.digit_width()?;
        }
        Ok(())
    }
}

/// Formula-derived metrics for one workload execution time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub bytes_accessed: Option<u128>,
    pub u32_ops: Option<u128>,
    pub gb_per_sec: Option<f64>,
    pub gu32ops_per_sec: Option<f64>,
}

/// `3 * insts * bits / 8`.
pub fn bytes_accessed(num_insts: usize, num_bits: usize) -> u128 {
    3 * num_insts as u128 * num_bits as u128 / 8
}

/// `300 * insts * m * log2(m)` with `m = bits / 32`, times four for the
/// polynomial. `log2` is rounded down for sizes that are not powers of two.
pub fn u32_ops(num_insts: usize, num_bits: usize, poly: bool) -> u128 {
    let m = (num_bits / 32) as u128;
    let lg = if m == 0 { 0 } else { m.ilog2() as u128 };
    let per = 300 * num_insts as u128 * m * lg;
    if poly {
        4 * per
    } else {
        per
    }
}

pub fn compute_metrics(spec: &WorkloadSpec, wall_ns: f64) -> Metrics {
    let seconds = wall_ns / 1e9;
    let rate = |count: u128| (wall_ns > 0.0).then(|| count as f64 / seconds / 1e9);
    if spec.op.is_addition() {
        let bytes = bytes_accessed(spec.num_insts, spec.num_bits);
        Metrics {
            bytes_accessed: Some(bytes),
            u32_ops: None,
            gb_per_sec: rate(bytes),
            gu32ops_per_sec: None,
        }
    } else {
        let ops = u32_ops(spec.num_insts, spec.num_bits, spec.op.is_poly());
        Metrics {
            bytes_accessed: None,
            u32_ops: Some(ops),
            gb_per_sec: None,
            gu32ops_per_sec: rate(ops),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub op: WorkloadOp,
    pub bits: usize,
    pub insts: usize,
    pub runs: usize,
    pub seed: u64,
    pub q: usize,
    pub ipb: usize,
    pub field: Option<u32>,
    pub digit_bits: Option<u32>,
    pub wall_ns: Vec<u64>,
    pub wall_ns_mean: f64,
    pub gb_per_sec: Option<f64>,
    pub gu32ops_per_sec: Option<f64>,
    pub checked: usize,
    pub mismatches: Vec<usize>,
    pub correct: bool,
}

/// Seeded operands, instances back to back.
pub fn generate_inputs(spec: &WorkloadSpec) -> (Vec<WorkLimb>, Vec<WorkLimb>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = spec.limbs() * spec.num_insts;
    let a = BigUint::<WorkLimb>::random(&mut rng, total).into_limbs();
    let b = BigUint::<WorkLimb>::random(&mut rng, total).into_limbs();
    (a, b)
}

/// Instances checked against the oracle: all of them when there are few,
/// otherwise an evenly spaced sample including the first and last.
pub fn sample_indices(insts: usize) -> Vec<usize> {
    let k = MIN_CHECKED.max(insts.min(16));
    if insts <= k {
        return (0..insts).collect();
    }
    let mut idx: Vec<usize> = (0..k).map(|i| i * (insts - 1) / (k - 1)).collect();
    idx.dedup();
    idx
}

/// Executes `spec.op` on all instances with the fast sequential kernels.
struct Executor {
    op: WorkloadOp,
    cfg: BlockConfig,
    field: FieldSpec,
    digit_bits: u32,
}

impl Executor {
    fn add(&self, x: &[WorkLimb], y: &[WorkLimb]) -> Result<Vec<WorkLimb>> {
        let n = self.cfg.total();
        let mut out = Vec::with_capacity(x.len());
        for (cx, cy) in x.chunks(n).zip(y.chunks(n)) {
            out.extend(badd_batch(cx, cy, &self.cfg)?);
        }
        Ok(out)
    }

    fn mul_classic(&self, x: &[WorkLimb], y: &[WorkLimb]) -> Result<Vec<WorkLimb>> {
        let n = self.cfg.total();
        let mut out = Vec::with_capacity(x.len());
        for (cx, cy) in x.chunks(n).zip(y.chunks(n)) {
            out.extend(bmul_classical_batch(cx, cy, &self.cfg)?);
        }
        Ok(out)
    }

    fn digits(&self, x: &[WorkLimb]) -> Result<Vec<DigitVector>> {
        x.chunks(self.cfg.m)
            .map(|c| words_to_digits(&BigUint::from_limbs(c.to_vec())?, self.digit_bits))
            .collect()
    }

    fn words(&self, xs: &[DigitVector]) -> Result<Vec<WorkLimb>> {
        let mut out = Vec::with_capacity(xs.len() * self.cfg.m);
        for x in xs {
            out.extend(digits_to_words_truncated::<WorkLimb>(x, self.cfg.m)?.into_limbs());
        }
        Ok(out)
    }

    fn ntt_mul(&self, x: &[DigitVector], y: &[DigitVector]) -> Result<Vec<DigitVector>> {
        x.iter().zip(y).map(|(p, q)| bmul_ntt(p, q, &self.field)).collect()
    }

    fn ntt_add(&self, x: &[DigitVector], y: &[DigitVector]) -> Result<Vec<DigitVector>> {
        x.iter().zip(y).map(|(p, q)| badd_base(p, q)).collect()
    }

    fn run(&self, a: &[WorkLimb], b: &[WorkLimb]) -> Result<Vec<WorkLimb>> {
        match self.op {
            WorkloadOp::Add1 => self.add(a, b),
            WorkloadOp::Add6 => {
                let mut r = a.to_vec();
                for i in 0..6 {
                    r = self.add(&r, if i % 2 == 0 { b } else { a })?;
                }
                Ok(r)
            }
            WorkloadOp::MulClassic => self.mul_classic(a, b),
            WorkloadOp::PolyClassic => {
                let t1 = self.add(&self.mul_classic(a, a)?, b)?;
                let t2 = self.add(&self.mul_classic(b, b)?, b)?;
                self.add(&self.mul_classic(&t1, &t2)?, &self.mul_classic(a, b)?)
            }
            WorkloadOp::MulNtt => {
                let (da, db) = (self.digits(a)?, self.digits(b)?);
                self.words(&self.ntt_mul(&da, &db)?)
            }
            WorkloadOp::PolyNtt => {
                // intermediates stay in digit form
                let (da, db) = (self.digits(a)?, self.digits(b)?);
                let t1 = self.ntt_add(&self.ntt_mul(&da, &da)?, &db)?;
                let t2 = self.ntt_add(&self.ntt_mul(&db, &db)?, &db)?;
                let r = self.ntt_add(&self.ntt_mul(&t1, &t2)?, &self.ntt_mul(&da, &db)?)?;
                self.words(&r)
            }
        }
    }
}

/// Oracle evaluation of `op` on one instance.
pub fn oracle_eval(op: WorkloadOp, a: &BigUint<WorkLimb>, b: &BigUint<WorkLimb>) -> Result<BigUint<WorkLimb>> {
    match op {
        WorkloadOp::Add1 => oracle_add(a, b),
        WorkloadOp::Add6 => (0..6).try_fold(a.clone(), |r, i| oracle_add(&r, if i % 2 == 0 { b } else { a })),
        WorkloadOp::MulClassic | WorkloadOp::MulNtt => oracle_mul(a, b),
        WorkloadOp::PolyClassic | WorkloadOp::PolyNtt => {
            let t1 = oracle_add(&oracle_mul(a, a)?, b)?;
            let t2 = oracle_add(&oracle_mul(b, b)?, b)?;
            oracle_add(&oracle_mul(&t1, &t2)?, &oracle_mul(a, b)?)
        }
    }
}

/// Validates, generates inputs, times `runs` executions and checks a sample
/// of instances from the last run against the oracle.
pub fn run_workload(spec: &WorkloadSpec) -> Result<MetricsReport> {
    spec.validate()?;
    let q = spec.effective_q()?;
    let cfg = BlockConfig::new(spec.limbs(), q, spec.ipb)?;
    let ntt = spec.op.uses_ntt();
    let exec = Executor {
        op: spec.op,
        cfg,
        field: if ntt { spec.field_spec()? } else { PRIME_FIELD_64 },
        digit_bits: if ntt { spec.digit_width()? } else { 0 },
    };
    let (a, b) = generate_inputs(spec);
    log::debug!("running {} at {} bits x {} insts", spec.op, spec.num_bits, spec.num_insts);
    let mut wall_ns = Vec::with_capacity(spec.runs);
    let mut result = Vec::new();
    for _ in 0..spec.runs {
        let start = Instant::now();
        result = exec.run(&a, &b)?;
        wall_ns.push((start.elapsed().as_nanos() as u64).max(1));
    }
    let m = spec.limbs();
    let instance = |xs: &[WorkLimb], i: usize| BigUint::from_limbs(xs[i * m..(i + 1) * m].to_vec());
    let checked = sample_indices(spec.num_insts);
    let mut mismatches = Vec::new();
    for &i in &checked {
        let expected = oracle_eval(spec.op, &instance(&a, i)?, &instance(&b, i)?)?;
        if instance(&result, i)? != expected {
            mismatches.push(i);
        }
    }
    let wall_ns_mean = wall_ns.iter().map(|&x| x as f64).sum::<f64>() / wall_ns.len() as f64;
    let metrics = compute_metrics(spec, wall_ns_mean);
    Ok(MetricsReport {
        op: spec.op,
        bits: spec.num_bits,
        insts: spec.num_insts,
        runs: spec.runs,
        seed: spec.seed,
        q,
        ipb: spec.ipb,
        field: ntt.then_some(spec.field),
        digit_bits: ntt.then_some(exec.digit_bits),
        wall_ns,
        wall_ns_mean,
        gb_per_sec: metrics.gb_per_sec,
        gu32ops_per_sec: metrics.gu32ops_per_sec,
        checked: checked.len(),
        correct: mismatches.is_empty(),
        mismatches,
    })
}
