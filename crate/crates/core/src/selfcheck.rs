//! Randomized property checks of every kernel against the schoolbook
//! oracle, runnable from a release binary.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::block::{RunOptions, Schedule};
use crate::classical::{bmul_classical, tiled_mul_reference};
use crate::field::{omega_table, FieldSpec, PRIME_FIELD_32, PRIME_FIELD_64};
use crate::kernels::{badd_kernel, bmul_classical_kernel, bmul_ntt_kernel, ntt_forward_kernel};
use crate::limb::Limb;
use crate::ntt::{bmul_ntt, bmul_ntt_unchecked, ntt_forward, ntt_inverse, preset_digit_width, FieldVector};
use crate::oracle::{oracle_add, oracle_mul};
use crate::scan_add::{add_base_direct, badd, badd_base, badd_batch, carry_op_eff, carry_op_nice, carry_op_sgm, CarryFlags};
use crate::types::{digits_to_words_truncated, words_to_digits, BigUint, BlockConfig, DigitVector};
use crate::workload::{bytes_accessed, u32_ops};

#[derive(Debug, Clone, Copy)]
pub struct SelfCheckOptions {
    /// Random cases per configuration.
    pub cases: usize,
    pub seed: u64,
    /// Largest operand size exercised.
    pub max_bits: usize,
}

impl Default for SelfCheckOptions {
    fn default() -> Self {
        Self {
            cases: 20,
            seed: 0,
            max_bits: 1 << 14,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

type Outcome = std::result::Result<String, String>;

fn expect(ok: bool, what: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn err(e: crate::Error) -> String {
    e.to_string()
}

fn operators(_: &SelfCheckOptions) -> Outcome {
    let eff: Vec<CarryFlags> = (0..4).map(CarryFlags).collect();
    for &x in &eff {
        for &y in &eff {
            let nice = carry_op_nice((x.overflow(), x.is_max()), (y.overflow(), y.is_max()));
            let packed = carry_op_eff(x, y);
            expect(nice == (packed.overflow(), packed.is_max()), || format!("eff differs from nice at {x:?} {y:?}"))?;
            for &z in &eff {
                expect(carry_op_eff(carry_op_eff(x, y), z) == carry_op_eff(x, carry_op_eff(y, z)), || {
                    format!("eff not associative at {x:?} {y:?} {z:?}")
                })?;
            }
        }
    }
    let sgm: Vec<CarryFlags> = (0..8).map(CarryFlags).collect();
    for &x in &sgm {
        for &y in &sgm {
            for &z in &sgm {
                expect(carry_op_sgm(carry_op_sgm(x, y), z) == carry_op_sgm(x, carry_op_sgm(y, z)), || {
                    format!("sgm not associative at {x:?} {y:?} {z:?}")
                })?;
            }
        }
    }
    Ok("16 pairs, 64 + 512 triples".into())
}

fn sizes(max_bits: usize, w: u32, min_limbs: usize) -> impl Iterator<Item = usize> {
    let max_limbs = (max_bits / w as usize).max(min_limbs);
    (0..).map(move |e| min_limbs << e).take_while(move |&m| m <= max_limbs)
}

fn addition_for<W: Limb>(rng: &mut ChaCha8Rng, opts: &SelfCheckOptions) -> std::result::Result<usize, String> {
    let mut n = 0;
    for m in sizes(opts.max_bits, W::BITS, 4) {
        let cfg = BlockConfig::new(m, 2, 3).map_err(err)?;
        for _ in 0..opts.cases {
            let a = BigUint::<W>::random(rng, m);
            let b = BigUint::<W>::random(rng, m);
            let want = oracle_add(&a, &b).map_err(err)?;
            expect(badd(&a, &b).map_err(err)? == want, || format!("badd w={} m={m}", W::BITS))?;
            let xa = BigUint::<W>::random(rng, 3 * m).into_limbs();
            let xb = BigUint::<W>::random(rng, 3 * m).into_limbs();
            let got = badd_batch(&xa, &xb, &cfg).map_err(err)?;
            for i in 0..3 {
                let inst = |x: &[W]| BigUint::from_limbs(x[i * m..(i + 1) * m].to_vec());
                let want = oracle_add(&inst(&xa).map_err(err)?, &inst(&xb).map_err(err)?).map_err(err)?;
                expect(inst(&got).map_err(err)? == want, || format!("badd_batch w={} m={m}", W::BITS))?;
            }
            n += 1;
        }
        let x = BigUint::<W>::all_max(m);
        expect(badd(&x, &BigUint::one(m)).map_err(err)?.is_zero(), || format!("ripple w={} m={m}", W::BITS))?;
    }
    Ok(n)
}

fn addition(opts: &SelfCheckOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = addition_for::<u8>(&mut rng, opts)? + addition_for::<u32>(&mut rng, opts)? + addition_for::<u64>(&mut rng, opts)?;
    Ok(format!("{n} random pairs"))
}

fn base_addition(opts: &SelfCheckOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 1);
    for d in [1u32, 7, 15, 23, 31] {
        for _ in 0..opts.cases {
            let len = rng.gen_range(1..64);
            let mut digit = || {
                // bias toward the largest digit to exercise long carry chains
                if rng.gen_bool(0.5) {
                    (1u64 << d) - 1
                } else {
                    rng.gen_range(0..1u64 << d)
                }
            };
            let a: Vec<u64> = (0..len).map(|_| digit()).collect();
            let b: Vec<u64> = (0..len).map(|_| digit()).collect();
            let a = DigitVector::with_digit_bits(a, d).map_err(err)?;
            let b = DigitVector::with_digit_bits(b, d).map_err(err)?;
            expect(badd_base(&a, &b).map_err(err)? == add_base_direct(&a, &b).map_err(err)?, || {
                format!("base add d={d}")
            })?;
        }
    }
    Ok("digit widths 1..31".into())
}

fn classical(opts: &SelfCheckOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 2);
    let mut n = 0;
    for q in [1usize, 2, 4] {
        for m in sizes(opts.max_bits, 64, 2 * q) {
            let cases = if m >= 256 { 2 } else { opts.cases };
            for _ in 0..cases {
                let a = BigUint::<u64>::random(&mut rng, m);
                let b = BigUint::<u64>::random(&mut rng, m);
                let want = oracle_mul(&a, &b).map_err(err)?;
                expect(bmul_classical(&a, &b, q).map_err(err)? == want, || format!("classical m={m} q={q}"))?;
                expect(tiled_mul_reference(&a, &b, q).map_err(err)? == want, || format!("tiled m={m} t={q}"))?;
                n += 1;
            }
            let x = BigUint::<u64>::all_max(m);
            let want = oracle_mul(&x, &x).map_err(err)?;
            expect(bmul_classical(&x, &x, q).map_err(err)? == want, || format!("all-max m={m} q={q}"))?;
        }
    }
    let a = BigUint::<u8>::all_max(64);
    expect(bmul_classical(&a, &a, 1).map_err(err)? == oracle_mul(&a, &a).map_err(err)?, || "all-max u8".into())?;
    Ok(format!("{n} random pairs"))
}

/// Direct quadratic evaluation of the transform.
pub fn direct_dft(xs: &[u64], omega: u64, spec: &FieldSpec) -> Vec<u64> {
    let m = xs.len() as u64;
    (0..m)
        .map(|j| {
            xs.iter()
                .enumerate()
                .fold(0, |acc, (i, &x)| spec.add(acc, spec.mul(x, spec.pow(omega, i as u64 * j % m))))
        })
        .collect()
}

fn transforms(opts: &SelfCheckOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 3);
    for spec in [PRIME_FIELD_32, PRIME_FIELD_64] {
        for lg in 0..=6 {
            let tbl = omega_table(&spec, 1 << lg).map_err(err)?;
            let xs: Vec<u64> = (0..1 << lg).map(|_| rng.gen_range(0..spec.p)).collect();
            let v = FieldVector::new(xs.clone(), spec).map_err(err)?;
            let got = ntt_forward(&v, &tbl).map_err(err)?;
            expect(got.elems == direct_dft(&xs, tbl.omega, &spec), || format!("dft p={} m={}", spec.p, 1 << lg))?;
        }
        for lg in [7, 10, 14] {
            let tbl = omega_table(&spec, 1 << lg).map_err(err)?;
            let xs: Vec<u64> = (0..1 << lg).map(|_| rng.gen_range(0..spec.p)).collect();
            let v = FieldVector::new(xs, spec).map_err(err)?;
            let back = ntt_inverse(&ntt_forward(&v, &tbl).map_err(err)?, &tbl).map_err(err)?;
            expect(back == v, || format!("roundtrip p={} m={}", spec.p, 1 << lg))?;
        }
    }
    Ok("direct transform up to 64, roundtrip up to 2^14".into())
}

fn ntt_products(opts: &SelfCheckOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 4);
    let mut n = 0;
    for spec in [PRIME_FIELD_32, PRIME_FIELD_64] {
        for m in sizes(opts.max_bits, 64, 1) {
            let d = preset_digit_width(&spec, 64 * m).map_err(err)?;
            let cases = if m >= 64 { 2 } else { opts.cases };
            for _ in 0..cases {
                let a = BigUint::<u64>::random(&mut rng, m);
                let b = BigUint::<u64>::random(&mut rng, m);
                let da = words_to_digits(&a, d).map_err(err)?;
                let db = words_to_digits(&b, d).map_err(err)?;
                let got = digits_to_words_truncated::<u64>(&bmul_ntt(&da, &db, &spec).map_err(err)?, m).map_err(err)?;
                expect(got == oracle_mul(&a, &b).map_err(err)?, || format!("ntt p={} m={m} d={d}", spec.p))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} random pairs with preset digit widths"))
}

fn constants(_: &SelfCheckOptions) -> Outcome {
    PRIME_FIELD_32.verify().map_err(err)?;
    PRIME_FIELD_64.verify().map_err(err)?;
    Ok("both preset fields".into())
}

fn safe_bound(_: &SelfCheckOptions) -> Outcome {
    // four all-max digits are -1 modulo 2^(4d), so the square is 1
    let exact = |d: u32| -> std::result::Result<bool, String> {
        let a = DigitVector::with_digit_bits(vec![(1u64 << d) - 1; 4], d).map_err(err)?;
        let got = bmul_ntt_unchecked(&a, &a, &PRIME_FIELD_32).map_err(err)?;
        Ok(got.digits() == [1, 0, 0, 0])
    };
    expect(!exact(15)?, || "d = 15 unexpectedly exact".into())?;
    expect(exact(14)?, || "d = 14 inexact".into())?;
    Ok("d = 15 wraps, d = 14 exact".into())
}

fn schedules(opts: &SelfCheckOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 5);
    let trials = 8;
    for m in [64usize, 1024] {
        let a = BigUint::<u64>::random(&mut rng, m);
        let b = BigUint::<u64>::random(&mut rng, m);
        let mut kernels = vec![("add", badd_kernel(&a, &b, 2).map_err(err)?)];
        let cfg = BlockConfig::new(m, 4, 1).map_err(err)?;
        kernels.push(("classical", bmul_classical_kernel(a.limbs(), b.limbs(), &cfg).map_err(err)?));
        let tbl = omega_table(&PRIME_FIELD_64, m).map_err(err)?;
        let xs: Vec<u64> = (0..m).map(|_| rng.gen_range(0..PRIME_FIELD_64.p)).collect();
        let v = FieldVector::new(xs, PRIME_FIELD_64).map_err(err)?;
        kernels.push(("fft", ntt_forward_kernel(&v, &tbl, 2).map_err(err)?));
        let d = 16;
        let da = DigitVector::with_digit_bits((0..m).map(|_| rng.gen_range(0..1 << d)).collect(), d).map_err(err)?;
        let db = DigitVector::with_digit_bits((0..m).map(|_| rng.gen_range(0..1 << d)).collect(), d).map_err(err)?;
        kernels.push(("ntt-mul", bmul_ntt_kernel(&da, &db, &PRIME_FIELD_64, 2).map_err(err)?));
        for (name, k) in kernels {
            let report = k.check_schedules(trials, opts.seed).map_err(err)?;
            expect(report.passed(), || format!("{name} m={m}: {} schedules differ", report.mismatches))?;
            let validated = k.run(RunOptions {
                schedule: Schedule::Shuffled(opts.seed),
                validate: true,
            });
            expect(validated.is_ok(), || format!("{name} m={m}: {}", validated.unwrap_err()))?;
        }
    }
    Ok(format!("{trials} schedules per kernel"))
}

fn metrics(_: &SelfCheckOptions) -> Outcome {
    expect(bytes_accessed(1 << 14, 1 << 18) == 1_610_612_736, || "bytes formula".into())?;
    expect(u32_ops(1, 1 << 15, false) == 3_072_000, || "op formula".into())?;
    Ok("formula examples".into())
}

type Check = (&'static str, fn(&SelfCheckOptions) -> Outcome);

const CHECKS: [Check; 10] = [
    ("carry operators", operators),
    ("addition", addition),
    ("base-2^d addition", base_addition),
    ("classical multiplication", classical),
    ("transforms", transforms),
    ("ntt multiplication", ntt_products),
    ("field constants", constants),
    ("safe digit bound", safe_bound),
    ("schedule independence", schedules),
    ("metric formulas", metrics),
];

/// Runs every check and reports each outcome.
pub fn run_selfcheck(opts: &SelfCheckOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let start = Instant::now();
            let outcome = check(opts);
            let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                name,
                passed,
                detail,
                elapsed_ms,
            }
        })
        .collect()
}
