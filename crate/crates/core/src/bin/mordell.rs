use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mordell::cf_surd::{expand_sqrt, CfExpansion};
use mordell::harness::{run_range_with, ReportFormat, RunConfig, RunControl, DEFAULT_CHUNK_SIZE, DEFAULT_FULL_EVERY};
use mordell::mordell_verify::{verify_both, Family, Mode, VerificationRecord};
use mordell::pell_unit::{decompose_unit, fundamental_solution};
use mordell::primes::is_prime;

#[derive(Parser)]
#[command(name = "mordell", version, about = "Continued fractions of square roots, Pell units and Mordell verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the periodic continued fraction of sqrt(d).
    Cf {
        d: u64,
        #[arg(long)]
        max_terms: Option<usize>,
    },
    /// Print the fundamental solution of x^2 - d y^2 = ±1.
    Pell {
        d: u64,
        /// Also print y = a*b with a^2 - d b^2 = ±2 (d prime, d ≡ 3 mod 4).
        #[arg(long)]
        decompose: bool,
    },
    /// Verify a conjecture for every prime of the matching class in [from, to).
    Verify {
        #[arg(value_enum)]
        mode: ModeArg,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk: u64,
        /// Cross-check roughly one prime in K with the exact path (0 = off).
        #[arg(long, default_value_t = DEFAULT_FULL_EVERY)]
        full_every: u64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// List primes of the period-2, -4 or -6 polynomial families.
    Families {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=6))]
        period: u64,
        #[arg(long)]
        count: usize,
        /// Check the period and run both verification paths on each prime.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Mordell,
    Aac,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

fn print_record(r: &VerificationRecord) {
    eprintln!(
        "{}: p={} p_mod8={} period_len={} central={} witness_residue={} method={}",
        r.verdict, r.p, r.p_mod_8, r.period_len, r.central, r.witness_residue, r.method
    );
}

fn cmd_cf(d: u64, max_terms: Option<usize>) -> ExitCode {
    let exp = match max_terms {
        Some(m) => expand_sqrt(d, m),
        None => CfExpansion::of(d),
    };
    match exp {
        Ok(e) => {
            println!("sqrt({d}) = {e}");
            println!("period length: {}", e.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_pell(d: u64, decompose: bool) -> ExitCode {
    let sol = match fundamental_solution(d) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("{sol}");
    println!("x = {}", sol.x);
    println!("y = {}", sol.y);
    println!("norm = {}", sol.norm);
    if decompose {
        if d % 4 != 3 || !is_prime(d) {
            eprintln!("note: unit decomposition applies to primes ≡ 3 mod 4 only");
            return ExitCode::SUCCESS;
        }
        match decompose_unit(d, &sol) {
            Ok(u) => {
                println!("a = {}", u.a);
                println!("b = {}", u.b);
                println!("epsilon = {:+}", u.epsilon);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
        }
    }
    ExitCode::SUCCESS
}

fn cmd_verify(cfg: RunConfig) -> ExitCode {
    let report_cx = |r: &VerificationRecord| print_record(r);
    let control = RunControl {
        stop_after_chunks: None,
        on_counterexample: Some(&report_cx),
    };
    match run_range_with(&cfg, &control) {
        Ok(s) => {
            println!("mode: {}", cfg.mode.as_str());
            println!("range: [{}, {})", cfg.from, cfg.to);
            println!("primes checked: {}", s.counts.primes_checked);
            println!("holds: {}", s.counts.holds);
            println!("counterexamples: {}", s.counts.counterexamples);
            if let Some(m) = s.max_witness_seen {
                println!("longest period: {} (p = {})", m.period_len, m.p);
            }
            println!("elapsed: {:.3}s", s.elapsed.as_secs_f64());
            if s.counts.counterexamples > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn cmd_families(period: u64, count: usize, verify: bool) -> ExitCode {
    let Some(family) = Family::from_period(period) else {
        eprintln!("error: period must be 2, 4 or 6");
        return ExitCode::from(2);
    };
    let mut status = ExitCode::SUCCESS;
    for p in family.primes(count) {
        if !verify {
            println!("{p}");
            continue;
        }
        let l = match CfExpansion::of(p) {
            Ok(e) => e.len() as u64,
            Err(e) => {
                eprintln!("error: p = {p}: {e}");
                return ExitCode::from(3);
            }
        };
        let mode = if p % 4 == 3 { Mode::Mordell } else { Mode::Aac };
        match verify_both(mode, p) {
            Ok(r) => println!("{p} period_len={l} verdict={}", r.verdict),
            Err(e) => {
                eprintln!("error: p = {p}: {e}");
                return ExitCode::from(3);
            }
        }
        if l != family.period() {
            eprintln!("error: p = {p} has period {l}, expected {}", family.period());
            status = ExitCode::from(3);
        }
    }
    status
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Cf { d, max_terms } => cmd_cf(d, max_terms),
        Command::Pell { d, decompose } => cmd_pell(d, decompose),
        Command::Verify {
            mode,
            from,
            to,
            jobs,
            chunk,
            full_every,
            checkpoint,
            report,
            format,
        } => {
            let mode = match mode {
                ModeArg::Mordell => Mode::Mordell,
                ModeArg::Aac => Mode::Aac,
            };
            let mut cfg = RunConfig::new(mode, from, to);
            cfg.jobs = jobs.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            cfg.chunk_size = chunk;
            cfg.full_every = full_every;
            cfg.checkpoint_path = checkpoint;
            cfg.report_path = report;
            cfg.format = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Jsonl => ReportFormat::Jsonl,
            };
            cmd_verify(cfg)
        }
        Command::Families { period, count, verify } => cmd_families(period, count, verify),
    }
}
