//! `tonebound`: run identity checks, eigenvalue curves and lower-bound
//! verdicts for a scenario file.
//!
//! Exit codes: 0 success (or a bound that is not applicable), 1 a failed
//! check or verdict, 2 a configuration error.

mod commands;
mod config;
mod output;
mod spaces;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CheckResult, CommandError, Context};
use tonebound::bounds::{BoundReport, Verdict};

#[derive(Parser)]
#[command(name = "tonebound", version, about = "First-eigenvalue lower bounds for submanifolds of submersion total spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for random sample points and test fields.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Residual tolerance for identity checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Number of sample points for the constant c.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity and comparison checks.
    Verify { scenario: PathBuf },
    /// Compute the λ₁(r) curve.
    Eigen { scenario: PathBuf },
    /// Evaluate c, c²/4 and the verdict against the λ₁(r) curve.
    Bound { scenario: PathBuf },
    /// Verify, eigen and bound in one run.
    Report { scenario: PathBuf },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn context(cli: &Cli, path: &PathBuf) -> Result<Context, ExitCode> {
    let source = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    let loaded = config::parse_scenario(&source).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    let world = spaces::build(&loaded).map_err(|e| match e {
        spaces::BuildError::Config(e) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(EXIT_CONFIG)
        }
        spaces::BuildError::Hypothesis(e) => {
            eprintln!("check failed: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    })?;
    let sampling = &loaded.scenario.sampling;
    let seed = cli.seed.unwrap_or(sampling.seed);
    let tolerance = cli.tol.unwrap_or(loaded.scenario.tolerances.residual);
    let samples = cli.samples.unwrap_or(sampling.points);
    if samples == 0 || !(tolerance > 0.0) {
        eprintln!("error: samples must be positive and the tolerance must be > 0");
        return Err(ExitCode::from(EXIT_CONFIG));
    }
    Ok(Context {
        stamp: output::Stamp::new(&loaded.scenario.name, &source, seed),
        verify_points: sampling.verify_points,
        loaded,
        world,
        seed,
        tolerance,
        samples,
        out: cli.out.clone(),
    })
}

fn print_checks(checks: &[CheckResult]) {
    for c in checks {
        let tol = c.tolerance.map_or_else(|| "inequality".to_string(), |t| format!("tol {t:.1e}"));
        println!(
            "{:<22} {}  max residual {:.3e} ({tol}, {} samples)",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.max_residual,
            c.samples
        );
    }
}

fn print_bound(r: &BoundReport) {
    println!("c = {:.12} (hyperbolic-base form {:.12}), refined {:.12}", r.c.value, r.c_hyperbolic_form.value, r.c_refined.value);
    match r.bound {
        Some(b) => println!("bound c^2/4 = {b:.12}, min margin {:.6e}", r.min_margin.unwrap_or(f64::NAN)),
        None => println!("bound not applicable (c <= 0)"),
    }
    let v = match r.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::NotApplicable => "NOT APPLICABLE",
    };
    println!("verdict: {v}");
    for reason in &r.reasons {
        println!("  {reason}");
    }
    if r.verdict == Verdict::NotApplicable {
        eprintln!("warning: c <= 0, no eigenvalue bound is claimed");
    }
}

fn run(cli: &Cli) -> Result<u8, CommandError> {
    let (Command::Verify { scenario } | Command::Eigen { scenario } | Command::Bound { scenario } | Command::Report { scenario }) =
        &cli.command;
    let ctx = match context(cli, scenario) {
        Ok(c) => c,
        Err(code) => return Ok(if code == ExitCode::from(EXIT_FAILURE) { EXIT_FAILURE } else { EXIT_CONFIG }),
    };
    Ok(match &cli.command {
        Command::Verify { .. } => {
            let checks = commands::verify(&ctx)?;
            print_checks(&checks);
            if checks.iter().all(|c| c.passed) { 0 } else { EXIT_FAILURE }
        }
        Command::Eigen { .. } => {
            let out = commands::eigen(&ctx)?;
            for r in &out.rows {
                println!("r = {:<6} grid {:<6} lambda1 = {:.12} (estimate {:.3e})", r.r, r.grid, r.lambda1, r.error_estimate);
            }
            match &out.tone {
                commands::ToneOutcome::Estimate(t) => println!("tone estimate {:.6} (fit asymptote {:.6})", t.final_value, t.asymptote),
                commands::ToneOutcome::Declined(why) => println!("tone estimate declined: {why}"),
            }
            0
        }
        Command::Bound { .. } => {
            let out = commands::eigen(&ctx)?;
            let r = commands::bound(&ctx, &out.curve)?;
            print_bound(&r);
            if r.verdict == Verdict::Fail { EXIT_FAILURE } else { 0 }
        }
        Command::Report { .. } => {
            let (checks, _, r, summary) = commands::report(&ctx)?;
            print_checks(&checks);
            print_bound(&r);
            summary.exit_code as u8
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CommandError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
