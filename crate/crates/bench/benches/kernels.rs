use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use midsize::classical::bmul_classical;
use midsize::kernels::phased_badd;
use midsize::RunOptions;
use midsize::ntt::{mul_ntt_words, preset_digit_width};
use midsize::oracle::oracle_mul;
use midsize::scan_add::badd;
use midsize::PRIME_FIELD_64;
use midsize_bench::{operands, sizes};

fn addition(c: &mut Criterion) {
    let mut group = c.benchmark_group("add");
    for bits in sizes(10, 18) {
        let (a, b) = operands(bits, 1);
        group.throughput(Throughput::Bytes(3 * bits as u64 / 8));
        group.bench_with_input(BenchmarkId::new("scan", bits), &bits, |bench, _| {
            bench.iter(|| badd(black_box(&a), black_box(&b)).unwrap())
        });
    }
    let (a, b) = operands(1 << 12, 1);
    group.bench_function("phased/4096", |bench| {
        bench.iter(|| phased_badd(black_box(&a), black_box(&b), 4, RunOptions::default()).unwrap())
    });
    group.finish();
}

fn multiplication(c: &mut Criterion) {
    let mut group = c.benchmark_group("mul");
    group.sample_size(10);
    for bits in sizes(10, 16) {
        let (a, b) = operands(bits, 2);
        let d = preset_digit_width(&PRIME_FIELD_64, bits).unwrap();
        group.bench_with_input(BenchmarkId::new("classical", bits), &bits, |bench, _| {
            bench.iter(|| bmul_classical(black_box(&a), black_box(&b), 4).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("ntt", bits), &bits, |bench, _| {
            bench.iter(|| mul_ntt_words(black_box(&a), black_box(&b), &PRIME_FIELD_64, d).unwrap())
        });
        if bits <= 1 << 12 {
            group.bench_with_input(BenchmarkId::new("oracle", bits), &bits, |bench, _| {
                bench.iter(|| oracle_mul(black_box(&a), black_box(&b)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, addition, multiplication);
criterion_main!(benches);
