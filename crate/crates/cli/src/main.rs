use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use alphaleak::{Method, OptimizerConfig};
use alphaleak_cli::io::load_distribution;
use alphaleak_cli::measure::{measure_table, run_measure, MeasureRequest};
use alphaleak_cli::table::Format;
use alphaleak_cli::verify::{run_verify, VerifyConfig};
use alphaleak_cli::{parse_alphas, parse_variants, plot, CliError};
use clap::{Args, Parser, Subcommand};

/// α-mutual information, generalized g-leakage and identity checks on
/// finite distributions. All values are in nats.
#[derive(Debug, Parser)]
#[command(name = "alphaleak", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate measures at a list of orders.
    Measure(MeasureArgs),
    /// Evaluate measures on an order grid, skipping orders a variant rejects.
    Sweep(MeasureArgs),
    /// Check the identities on seeded random instances; exits 1 on failure.
    Verify(VerifyArgs),
    /// Emit g_α(r) = ln_{1/α} r on r = k/grid.
    PlotGain(PlotArgs),
    /// Emit closed-form and finite-difference Arrow–Pratt coefficients.
    RiskAversion(RiskArgs),
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// JSON document with `p_x` and `channel`, or `joint`.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated variants, or `all`.
    #[arg(long, default_value = "all")]
    variant: String,
    /// Orders: `0.5,2` or `start:stop:n`.
    #[arg(long, default_value = "")]
    alpha: String,
    /// closed, optimize or oracle.
    #[arg(long, default_value = "closed")]
    method: String,
    /// Compute each value as the leakage of the matching gain tuple.
    #[arg(long)]
    via_leakage: bool,
    /// json or csv.
    #[arg(long, default_value = "json")]
    output: String,
    /// Optimizer stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Oracle grid resolution.
    #[arg(long)]
    grid_res: Option<f64>,
    /// Optimizer restart seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Replace every identity tolerance with this absolute value.
    #[arg(long)]
    tol: Option<f64>,
    /// Starting oracle grid resolution.
    #[arg(long, default_value_t = 0.05)]
    grid_res: f64,
    #[arg(long, default_value = "0.3,0.6,2,4")]
    alpha: String,
    /// Largest alphabet size drawn (2 to 4).
    #[arg(long, default_value_t = 3)]
    max_size: usize,
    #[arg(long, default_value = "json")]
    output: String,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long, default_value = "0.5,1,2,5")]
    alpha: String,
    /// Number of points; rows at r = k/grid.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Add closed-form Arrow–Pratt columns.
    #[arg(long)]
    arrow_pratt: bool,
    #[arg(long, default_value = "csv")]
    output: String,
}

#[derive(Debug, Args)]
struct RiskArgs {
    #[arg(long, default_value = "0.5,1,2,5")]
    alpha: String,
    /// Number of evenly spaced points in [r-min, 1].
    #[arg(long, default_value_t = 96)]
    grid: usize,
    #[arg(long, default_value_t = 0.05)]
    r_min: f64,
    #[arg(long, default_value = "csv")]
    output: String,
}

fn measure(args: MeasureArgs, sweep: bool) -> Result<String, CliError> {
    let format: Format = args.output.parse()?;
    let dist = load_distribution(&args.input)?;
    let (p, w) = dist.pair();
    let mut cfg = OptimizerConfig::default();
    if let Some(t) = args.tol {
        cfg.tolerance = t;
    }
    if let Some(r) = args.grid_res {
        cfg.grid_resolution = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let alphas = if args.alpha.trim().is_empty() {
        Vec::new()
    } else {
        parse_alphas(&args.alpha)?
    };
    let req = MeasureRequest {
        variants: parse_variants(&args.variant)?,
        alphas,
        method: args
            .method
            .parse::<Method>()
            .map_err(|e| CliError::Usage(e.to_string()))?,
        via_leakage: args.via_leakage,
        skip_invalid: sweep,
        cfg,
    };
    let rows = run_measure(&p, &w, &req)?;
    measure_table(&rows, &req).render(format)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut status = 0;
    let out = match cli.command {
        Command::Measure(a) => measure(a, false),
        Command::Sweep(a) => measure(a, true),
        Command::Verify(a) => (|| {
            let format: Format = a.output.parse()?;
            let cfg = VerifyConfig {
                trials: a.trials,
                seed: a.seed,
                max_size: a.max_size,
                alphas: parse_alphas(&a.alpha)?,
                tol_override: a.tol,
                grid_res: a.grid_res,
                ..VerifyConfig::default()
            };
            let report = run_verify(&cfg)?;
            eprintln!(
                "verify: {} records, {} passed, {} failed (seed {}, {:.1} s)",
                report.records.len(),
                report.passed(),
                report.failed(),
                report.seed,
                report.seconds
            );
            if !report.all_passed() {
                status = 1;
            }
            report.table().render(format)
        })(),
        Command::PlotGain(a) => (|| {
            let format: Format = a.output.parse()?;
            plot::plot_gain(&parse_alphas(&a.alpha)?, a.grid, a.arrow_pratt)?.render(format)
        })(),
        Command::RiskAversion(a) => (|| {
            let format: Format = a.output.parse()?;
            plot::risk_aversion(&parse_alphas(&a.alpha)?, a.grid, a.r_min)?.render(format)
        })(),
    };
    match out {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
