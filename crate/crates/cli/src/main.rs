//! `wick`: the experiment harness around the chaos-coefficient engine.
//!
//! Subcommands: `verify` runs named identity suites, `converge` runs the
//! limit-theorem and stability studies, `volterra` samples kernel-integral
//! trajectories, `pair` inspects two vectors from text files.
//!
//! Exit codes: 0 when every gate passed; 2 when the run could not execute
//! (bad config, missing seed, violated precondition, I/O failure), in which
//! case no reports are written; 3 when the run executed but at least one
//! numeric gate failed, with the reports written as on success.

mod config;
mod error;
mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use wick_core::{hida_norm, pairing, ChaosVector, Tolerances};

use config::{config_hash, parse_ini, resolve, Resolved};
use error::CliError;
use report::{study_csv, trajectory_csv, write_atomic, RunReport, Status, SuiteReport};
use suites::{
    lookup, run_converge, run_volterra, suite_names, SuiteFn, CONVERGE_SEED_OFFSET, REGISTRY,
    VOLTERRA_SEED_OFFSET,
};

#[derive(Parser)]
#[command(
    name = "wick",
    version,
    about = "Finite-truncation white-noise calculus harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suites and gate each check
    Verify(RunArgs),
    /// Run the convergence and stability studies
    Converge(RunArgs),
    /// Sample Volterra trajectories and measure the dual-path order
    Volterra(RunArgs),
    /// Read two vectors from text files and report their pairing
    Pair(PairArgs),
}

#[derive(Args)]
struct RunArgs {
    /// INI config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the reports (default: run.out from the config, else ".")
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override; without it run.seed from the config is mandatory
    #[arg(long)]
    seed: Option<u64>,
    /// Suite to run, repeatable; verify only (default: run.suites, else all)
    #[arg(long)]
    suite: Vec<String>,
    /// Stdout format; the CSV and JSON files are always written
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct PairArgs {
    /// First vector, in coefficient text form
    a: PathBuf,
    /// Second vector
    b: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Converge(args) => cmd_converge(args),
        Command::Volterra(args) => cmd_volterra(args),
        Command::Pair(args) => cmd_pair(args),
    }
}

struct Run {
    cfg: Resolved,
    seed: u64,
    out: PathBuf,
    hash: String,
}

fn load(args: &RunArgs) -> Result<Run, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io {
        context: format!("reading {}", args.config.display()),
        source: e,
    })?;
    let cfg = resolve(&parse_ini(&text)?)?;
    let seed = args.seed.or(cfg.seed).ok_or_else(|| {
        CliError::Config("a seed is mandatory: set run.seed in the config or pass --seed".into())
    })?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let hash = config_hash(&cfg, seed);
    Ok(Run {
        cfg,
        seed,
        out,
        hash,
    })
}

fn reject_suite_flag(args: &RunArgs) -> Result<(), CliError> {
    if args.suite.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(
            "--suite applies only to the verify subcommand".into(),
        ))
    }
}

fn cmd_verify(args: RunArgs) -> Result<i32, CliError> {
    let run = load(&args)?;
    let selected = select_suites(&args, &run.cfg)?;
    let tol = Tolerances::default();
    let start = Instant::now();
    let results: Vec<SuiteReport> = selected
        .par_iter()
        .map(|entry| run_suite(entry, &run, &tol))
        .collect::<Result<_, _>>()?;
    let report = RunReport::new(
        "verify",
        run.hash.clone(),
        run.seed,
        results,
        start.elapsed(),
    );
    let csv = report.checks_csv();
    emit(&run.out, &report, &csv, args.format)
}

fn run_suite(
    entry: &(&'static str, u64, SuiteFn),
    run: &Run,
    tol: &Tolerances,
) -> Result<SuiteReport, CliError> {
    let start = Instant::now();
    let outcome = (entry.2)(&run.cfg, run.seed.wrapping_add(entry.1), tol)?;
    Ok(SuiteReport {
        name: entry.0.to_string(),
        wall_ms: start.elapsed().as_millis() as u64,
        truncations: outcome.truncations,
        checks: outcome.checks,
    })
}

/// Explicit --suite flags win, then run.suites from the config, then the
/// whole registry. Duplicates collapse to the first mention.
fn select_suites(
    args: &RunArgs,
    cfg: &Resolved,
) -> Result<Vec<&'static (&'static str, u64, SuiteFn)>, CliError> {
    let requested: &[String] = if !args.suite.is_empty() {
        &args.suite
    } else if let Some(s) = &cfg.suites {
        s
    } else {
        return Ok(REGISTRY.iter().collect());
    };
    let mut picked: Vec<&'static (&'static str, u64, SuiteFn)> = Vec::new();
    for name in requested {
        let entry = lookup(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown suite `{name}`; available: {}",
                suite_names().join(", ")
            ))
        })?;
        if !picked.iter().any(|e| e.0 == entry.0) {
            picked.push(entry);
        }
    }
    Ok(picked)
}

fn cmd_converge(args: RunArgs) -> Result<i32, CliError> {
    reject_suite_flag(&args)?;
    let run = load(&args)?;
    let tol = Tolerances::default();
    let start = Instant::now();
    let (outcome, rows) =
        run_converge(&run.cfg, run.seed.wrapping_add(CONVERGE_SEED_OFFSET), &tol)?;
    let elapsed = start.elapsed();
    let suite = SuiteReport {
        name: "converge".to_string(),
        wall_ms: elapsed.as_millis() as u64,
        truncations: outcome.truncations,
        checks: outcome.checks,
    };
    let report = RunReport::new("converge", run.hash.clone(), run.seed, vec![suite], elapsed);
    let csv = study_csv(&run.hash, &rows);
    emit(&run.out, &report, &csv, args.format)
}

fn cmd_volterra(args: RunArgs) -> Result<i32, CliError> {
    reject_suite_flag(&args)?;
    let run = load(&args)?;
    let tol = Tolerances::default();
    let start = Instant::now();
    let (outcome, rows) =
        run_volterra(&run.cfg, run.seed.wrapping_add(VOLTERRA_SEED_OFFSET), &tol)?;
    let elapsed = start.elapsed();
    let suite = SuiteReport {
        name: "volterra".to_string(),
        wall_ms: elapsed.as_millis() as u64,
        truncations: outcome.truncations,
        checks: outcome.checks,
    };
    let report = RunReport::new("volterra", run.hash.clone(), run.seed, vec![suite], elapsed);
    let csv = trajectory_csv(&run.hash, &rows);
    emit(&run.out, &report, &csv, args.format)
}

/// Write both report files, print the chosen format, map pass/fail to the
/// exit code.
fn emit(out_dir: &Path, report: &RunReport, csv: &str, format: Format) -> Result<i32, CliError> {
    let json = report.to_json();
    write_atomic(&out_dir.join(format!("{}.csv", report.subcommand)), csv)?;
    write_atomic(&out_dir.join(format!("{}.json", report.subcommand)), &json)?;
    match format {
        Format::Table => print_table(report, out_dir),
        Format::Csv => print!("{csv}"),
        Format::Json => print!("{json}"),
    }
    Ok(if report.any_failed() { 3 } else { 0 })
}

fn print_table(report: &RunReport, out_dir: &Path) {
    println!(
        "{}  seed {}  config {}",
        report.subcommand,
        report.seed,
        &report.config_hash[..12]
    );
    for suite in &report.suites {
        println!("  {} ({} ms)", suite.name, suite.wall_ms);
        for c in &suite.checks {
            let mark = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
            };
            let mut line = format!("    [{mark}] {}", c.check);
            if let Some(m) = c.metric {
                line.push_str(&format!("  metric {m:.3e}"));
            }
            if let Some(t) = c.threshold {
                line.push_str(&format!("  threshold {t:.3e}"));
            }
            if let Some(n) = &c.note {
                line.push_str(&format!("  ({n})"));
            }
            println!("{line}");
        }
    }
    println!(
        "summary: {} passed, {} failed, {} truncations; reports in {}",
        report.passed,
        report.failed,
        report.truncations,
        out_dir.display()
    );
}

fn read_vector(path: &Path) -> Result<ChaosVector, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })?;
    Ok(ChaosVector::from_text(&text)?)
}

fn cmd_pair(args: PairArgs) -> Result<i32, CliError> {
    let a = read_vector(&args.a)?;
    let b = read_vector(&args.b)?;
    for (label, v) in [("a", &a), ("b", &b)] {
        println!(
            "{label}: {} terms, degree {}, E = {:.16e}",
            v.term_count(),
            v.degree(),
            v.expectation()
        );
    }
    println!("pairing = {:.16e}", pairing(&a, &b));
    for p in [-1i32, 0, 1, 2] {
        println!(
            "hida_norm p={p}: a {:.16e}  b {:.16e}",
            hida_norm(&a, p),
            hida_norm(&b, p)
        );
    }
    Ok(0)
}
