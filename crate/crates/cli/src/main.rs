use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use splitlab::bounds::{audit_schedule, default_grid_steps, lemma2_max, ScheduleAudit, Verdict};
use splitlab::harness::{
    lemma1_campaign, scaling_cross_check, simulate, sweep_error_vs_k, write_json, write_sweep, RunConfig, ScalingConfig,
};
use splitlab::schedules::{Word, WordDoc};
use splitlab::series::{word_series, SeriesDoc};

/// Exact error experiments for product-formula Hamiltonian simulation.
#[derive(Parser)]
#[command(name = "splitlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-state errors of one scheme for each K in the config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error against K with a log-log fit; writes sweep.json and points.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random-instance campaign for the mixed-unitary error bound.
    BoundCheck {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Grid search plus polish for the maximum interleaving sum over N blocks.
    VerifyLemma2 {
        #[arg(long)]
        n: usize,
        /// Grid steps; defaults to 40 up to N = 6 and 20 above.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Third-order series of a word and the audit of one term pair.
    Expand {
        /// JSON file `{"steps": [[term, duration], ...]}` with 1-based terms.
        #[arg(long)]
        word: PathBuf,
        /// Two distinct 1-based term indices, e.g. `1,2`.
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
        /// Durations are divided by this before auditing.
        #[arg(long, default_value_t = 1.0)]
        dt_unit: f64,
    },
    /// Minimal stage counts over time and error grids, with exponent fits.
    Scaling {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected two indices separated by a comma")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad index {x:?}: {e}"));
    let (a, b) = (parse(a)?, parse(b)?);
    if a == 0 || b == 0 || a == b {
        return Err("indices are 1-based and must differ".into());
    }
    Ok((a, b))
}

enum Failure {
    /// Bad input: unreadable file, malformed JSON, invalid parameters.
    Input(splitlab::Error),
    /// The computation ran but a checked property did not hold.
    Assertion(String),
}

impl From<splitlab::Error> for Failure {
    fn from(e: splitlab::Error) -> Self {
        Failure::Input(e)
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(splitlab::Error::from)?;
    println!("{text}");
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    Ok(fs::read_to_string(path).map_err(splitlab::Error::from)?)
}

#[derive(Serialize)]
struct Expansion {
    series: SeriesDoc,
    audit: ScheduleAudit,
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate { config, out } => {
            let cfg = RunConfig::from_json(&read(&config)?)?;
            let report = simulate(&cfg)?;
            let worst = report.points.iter().map(|p| p.error).fold(0.0, f64::max);
            eprintln!(
                "simulated {} at {} K values; largest error {worst:.3e}",
                cfg.scheme,
                report.points.len()
            );
            match out.or(cfg.output) {
                Some(path) => write_json(&path, &report)?,
                None => print_json(&report)?,
            }
        }
        Command::Sweep { config, out } => {
            let cfg = RunConfig::from_json(&read(&config)?)?;
            let result = sweep_error_vs_k(&cfg)?;
            let (json, csv) = write_sweep(&out, &result)?;
            match (result.slope, result.r2) {
                _ if result.commuting => eprintln!("{}: commuting instance, no slope fitted", cfg.scheme),
                (Some(slope), Some(r2)) => eprintln!(
                    "{}: slope {slope:.4} r2 {r2:.4}{}",
                    cfg.scheme,
                    if result.r2_ok {
                        ""
                    } else {
                        " (below r2_min, no verdict)"
                    }
                ),
                _ => eprintln!("{}: too few points for a fit", cfg.scheme),
            }
            eprintln!("wrote {} and {}", json.display(), csv.display());
        }
        Command::BoundCheck { instances, seed } => {
            let report = lemma1_campaign(instances, seed)?;
            print_json(&report)?;
            if !report.passed() {
                return Err(Failure::Assertion(format!(
                    "{} of {} instances exceed the bound (controls exact: {})",
                    report.violations.len(),
                    instances,
                    report.controls_exact
                )));
            }
            eprintln!(
                "bound held on all {instances} instances; max excess {:.3e}",
                report.max_excess
            );
        }
        Command::VerifyLemma2 { n, grid } => {
            let r = lemma2_max(n, grid.unwrap_or_else(|| default_grid_steps(n)))?;
            print_json(&r)?;
            if !r.below_one_third() {
                return Err(Failure::Assertion(format!(
                    "N = {n}: maximum {} is not below 1/3",
                    r.max_s
                )));
            }
            eprintln!("N = {n}: maximum {:.8} < 1/3", r.max_s);
        }
        Command::Expand { word, pair, dt_unit } => {
            let doc: WordDoc = serde_json::from_str(&read(&word)?).map_err(splitlab::Error::from)?;
            let w = Word::<f64>::from_doc(&doc)?;
            let (a, b) = (pair.0 - 1, pair.1 - 1);
            let m = w.min_terms().max(a + 1).max(b + 1);
            let audit = audit_schedule(&w, a, b, dt_unit)?;
            let series = word_series(&w.rescaled(dt_unit)?, m)?.to_doc();
            print_json(&Expansion {
                series,
                audit: audit.clone(),
            })?;
            match audit.verdict {
                Verdict::Obstructed if audit.gap <= 0.0 => {
                    return Err(Failure::Assertion(format!("normalized word reached S = {}", audit.s)));
                }
                Verdict::Obstructed => eprintln!("obstructed: S = {:.6}, gap to 1/3 = {:.6}", audit.s, audit.gap),
                Verdict::Mistimed => eprintln!(
                    "mistimed: term totals {:.6} and {:.6} differ from 1",
                    audit.alpha_sum, audit.beta_sum
                ),
            }
        }
        Command::Scaling { config } => {
            let cfg = ScalingConfig::from_json(&read(&config)?)?;
            let report = scaling_cross_check(&cfg)?;
            print_json(&report)?;
            for f in &report.fits {
                eprintln!(
                    "{} {:?}: exponent {} (want {} ± {}) {}",
                    f.scheme,
                    f.axis,
                    f.exponent.map_or("n/a".to_string(), |e| format!("{e:.3}")),
                    f.expected,
                    f.tolerance,
                    if f.pass { "ok" } else { "MISMATCH" }
                );
            }
            if !report.passed() {
                return Err(Failure::Assertion("scaling exponents out of tolerance".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
