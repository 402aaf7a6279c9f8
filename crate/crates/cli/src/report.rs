use std::io::Write;

use midsize::selfcheck::CheckResult;
use midsize::workload::MetricsReport;
use midsize::FieldSpec;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Serialize)]
struct CsvRow {
    op: String,
    bits: usize,
    insts: usize,
    runs: usize,
    seed: u64,
    wall_ns_mean: f64,
    gb_per_sec: Option<f64>,
    gu32ops_per_sec: Option<f64>,
    correct: bool,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

pub fn write_reports(out: &mut dyn Write, reports: &[MetricsReport], format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, reports)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in reports {
                w.serialize(CsvRow {
                    op: r.op.to_string(),
                    bits: r.bits,
                    insts: r.insts,
                    runs: r.runs,
                    seed: r.seed,
                    wall_ns_mean: r.wall_ns_mean,
                    gb_per_sec: r.gb_per_sec,
                    gu32ops_per_sec: r.gu32ops_per_sec,
                    correct: r.correct,
                })?;
            }
            w.flush()
        }
        Format::Table => {
            writeln!(
                out,
                "{:<13} {:>7} {:>7} {:>5} {:>3} {:>4} {:>5} {:>14} {:>10} {:>13} {:>8}",
                "op", "bits", "insts", "runs", "q", "ipb", "d", "wall_ns_mean", "GB/s", "Gu32ops/s", "correct"
            )?;
            for r in reports {
                let d = r.digit_bits.map_or_else(|| "-".to_string(), |d| d.to_string());
                writeln!(
                    out,
                    "{:<13} {:>7} {:>7} {:>5} {:>3} {:>4} {:>5} {:>14.0} {:>10} {:>13} {:>8}",
                    r.op.name(),
                    r.bits,
                    r.insts,
                    r.runs,
                    r.q,
                    r.ipb,
                    d,
                    r.wall_ns_mean,
                    opt(r.gb_per_sec),
                    opt(r.gu32ops_per_sec),
                    if r.correct { "pass" } else { "FAIL" }
                )?;
            }
            if let Some(r) = reports.first() {
                writeln!(out, "seed {}", r.seed)?;
            }
            Ok(())
        }
    }
}

pub fn write_checks(out: &mut dyn Write, checks: &[CheckResult], format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, checks)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for c in checks {
                w.serialize(c)?;
            }
            w.flush()
        }
        Format::Table => {
            for c in checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{verdict} {:<26} {:>9.1} ms  {}", c.name, c.elapsed_ms, c.detail)?;
            }
            Ok(())
        }
    }
}

pub fn write_field(out: &mut dyn Write, spec: &FieldSpec, format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, spec)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(spec)?;
            w.flush()
        }
        Format::Table => writeln!(
            out,
            "p = {} = {} * 2^{} + 1, g = {} ({}-bit words)",
            spec.p, spec.k, spec.n, spec.g, spec.word_bits
        ),
    }
}
