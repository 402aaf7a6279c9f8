//! Operand generation shared by the benchmarks.

use midsize::workload::{generate_inputs, WorkloadOp, WorkloadSpec};
use midsize::BigUint;

/// Seeded operand pair of `bits` bits in 64-bit limbs.
pub fn operands(bits: usize, seed: u64) -> (BigUint<u64>, BigUint<u64>) {
    let mut spec = WorkloadSpec::new(WorkloadOp::Add1, bits, 1);
    spec.seed = seed;
    let (a, b) = generate_inputs(&spec);
    (
        BigUint::from_limbs(a).expect("bits is a positive multiple of 64"),
        BigUint::from_limbs(b).expect("bits is a positive multiple of 64"),
    )
}

/// Powers of two from `2^lo` to `2^hi` bits.
pub fn sizes(lo: u32, hi: u32) -> impl Iterator<Item = usize> {
    (lo..=hi).map(|e| 1usize << e)
}
