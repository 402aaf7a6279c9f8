mod report;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use midsize::field::find_ntt_prime;
use midsize::selfcheck::{run_selfcheck, SelfCheckOptions};
use midsize::workload::{run_workload, WorkloadOp, WorkloadSpec, DEFAULT_BUDGET};

use report::Format;

#[derive(Parser)]
#[command(name = "midsize", version, about = "Midsize big-integer kernels: benchmarks and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time a workload and check sampled instances against the oracle.
    Bench(BenchArgs),
    /// Search for a prime k*2^n+1 below 2^bits with n >= min-n.
    FindPrime {
        #[arg(long, default_value_t = 64)]
        bits: u32,
        #[arg(long)]
        min_n: u32,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run the randomized property suite.
    Verify {
        #[arg(long, default_value_t = 20)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1 << 14)]
        max_bits: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(clap::Args)]
struct BenchArgs {
    /// One or more of add1, add6, mul-classic, mul-ntt, poly-classic, poly-ntt (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    op: Vec<WorkloadOp>,
    #[arg(long)]
    bits: usize,
    #[arg(long)]
    insts: usize,
    /// Prime field word size for the NTT ops.
    #[arg(long, default_value_t = 64)]
    field: u32,
    /// Digit width for the NTT ops; defaults to the largest safe width.
    #[arg(long)]
    digit_bits: Option<u32>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 1)]
    ipb: usize,
    /// Timed repetitions; 500 (125 for poly) by default.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Upper bound on bits * insts.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

const EXIT_INCORRECT: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn bench(args: BenchArgs, out: &mut dyn Write) -> io::Result<ExitCode> {
    let mut reports = Vec::new();
    for op in args.op {
        let spec = WorkloadSpec {
            op,
            num_bits: args.bits,
            num_insts: args.insts,
            field: args.field,
            digit_bits: args.digit_bits,
            q: args.q,
            ipb: args.ipb,
            runs: args.runs.unwrap_or(op.default_runs()),
            seed: args.seed,
            budget: args.budget,
        };
        match run_workload(&spec) {
            Ok(r) => {
                if !r.correct {
                    eprintln!("{op}: instances {:?} differ from the oracle", r.mismatches);
                }
                reports.push(r);
            }
            Err(e) => {
                eprintln!("{op}: {e}");
                return Ok(ExitCode::from(EXIT_INVALID));
            }
        }
    }
    report::write_reports(out, &reports, args.format)?;
    Ok(if reports.iter().all(|r| r.correct) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INCORRECT)
    })
}

fn run(cli: Cli) -> io::Result<ExitCode> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Bench(args) => bench(args, &mut out),
        Command::FindPrime { bits, min_n, format } => match find_ntt_prime(min_n, bits) {
            Ok(spec) => {
                report::write_field(&mut out, &spec, format)?;
                Ok(ExitCode::SUCCESS)
            }
            Err(e) => {
                eprintln!("{e}");
                Ok(ExitCode::from(EXIT_INVALID))
            }
        },
        Command::Verify {
            cases,
            seed,
            max_bits,
            format,
        } => {
            let checks = run_selfcheck(&SelfCheckOptions { cases, seed, max_bits });
            report::write_checks(&mut out, &checks, format)?;
            Ok(if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_INCORRECT)
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("output error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
