use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use guessbound::harness::commands::{self, Options};
use guessbound::harness::generate::{gen_product, gen_random};
use guessbound::harness::instance::{load_instance, save_instance};
use guessbound::harness::report::{save_report, RunReport};
use guessbound::harness::verify::{VerifyConfig, DEFAULT_ETA_GRID};
use guessbound::harness::{HarnessError, HarnessResult};
use guessbound::search::DEFAULT_BUDGET;

#[derive(Parser)]
#[command(name = "guessbound", version, about = "Guessing probability from encoded side information and its MI bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Case 1-3 optima, mutual information and bounds for one instance
    Analyze(InstanceArgs),
    /// Exact or heuristic optimization over encoders
    Search(InstanceArgs),
    /// Bound curve over a nu grid plus the optimized bound
    Bound(InstanceArgs),
    /// Randomized and exhaustive checks of every bound; exits 1 on a violation
    Verify(VerifyArgs),
    /// Write a seeded random instance file
    Generate(GenerateArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file (JSON)
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    l_size: Option<usize>,
    #[arg(long)]
    m_size: Option<usize>,
    /// Evaluate the bound at a single nu
    #[arg(long, conflicts_with = "nu_grid")]
    nu: Option<f64>,
    /// Number of log-spaced nu points
    #[arg(long)]
    nu_grid: Option<usize>,
    /// Accepted for symmetry with `verify`; unused here
    #[arg(long, value_delimiter = ',')]
    eta_grid: Option<Vec<f64>>,
    /// Fall back to local search when exact search exceeds the budget
    #[arg(long)]
    heuristic: bool,
    #[arg(long, default_value_t = 10)]
    restarts: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot series (bound only)
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    xmax: usize,
    #[arg(long, default_value_t = 4)]
    ymax: usize,
    #[arg(long, default_value_t = 2)]
    mmax: usize,
    #[arg(long, default_value_t = 3)]
    lmax: usize,
    #[arg(long, value_delimiter = ',')]
    eta_grid: Option<Vec<f64>>,
    /// Points of the evenly spaced nu grid per encoder
    #[arg(long, default_value_t = 50)]
    nu_grid: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    x_size: usize,
    #[arg(long)]
    y_size: usize,
    #[arg(long, default_value_t = 1.0)]
    concentration: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw independent marginals and take their product
    #[arg(long)]
    product: bool,
    #[arg(long)]
    out: PathBuf,
}

impl InstanceArgs {
    fn options(&self) -> Options {
        Options {
            m_size: self.m_size,
            l_size: self.l_size,
            nu: self.nu,
            nu_grid: self.nu_grid.unwrap_or(100),
            heuristic: self.heuristic,
            restarts: self.restarts,
            seed: self.seed,
            budget: self.budget,
        }
    }
}

fn emit(report: &RunReport, out: Option<&PathBuf>) -> HarnessResult<()> {
    match out {
        Some(path) => save_report(report, path),
        None => {
            println!("{}", serde_json::to_string_pretty(report).expect("serializable"));
            Ok(())
        }
    }
}

fn run(cli: Cli) -> HarnessResult<u8> {
    match cli.command {
        Command::Analyze(a) => {
            let inst = load_instance(&a.instance)?;
            let report = commands::analyze(&inst, &a.options())?;
            emit(&report, a.out.as_ref())?;
            if let Some(c) = &report.case_optima {
                eprintln!(
                    "P1 = {}  P2 = {}  P3 = {}  p_max = {}",
                    c.p1.map_or("n/a".to_string(), |v| v.to_string()),
                    c.p2,
                    c.p3,
                    c.p_max
                );
            }
            Ok(0)
        }
        Command::Search(a) => {
            let inst = load_instance(&a.instance)?;
            let report = commands::search(&inst, &a.options())?;
            emit(&report, a.out.as_ref())?;
            Ok(0)
        }
        Command::Bound(a) => {
            let inst = load_instance(&a.instance)?;
            let (report, rows) = commands::bound(&inst, &a.options())?;
            if let Some(path) = &a.csv {
                commands::write_csv(&rows, path)?;
            }
            emit(&report, a.out.as_ref())?;
            Ok(0)
        }
        Command::Verify(v) => {
            let cfg = VerifyConfig {
                instances: v.instances,
                seed: v.seed,
                xmax: v.xmax,
                ymax: v.ymax,
                mmax: v.mmax,
                lmax: v.lmax,
                eta_grid: v.eta_grid.unwrap_or_else(|| DEFAULT_ETA_GRID.to_vec()),
                nu_points: v.nu_grid,
                budget: v.budget,
            };
            if cfg.eta_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
                return Err(HarnessError::Validation("eta grid entries must be positive".into()));
            }
            if cfg.xmax == 0 || cfg.ymax == 0 || cfg.mmax == 0 || cfg.lmax == 0 {
                return Err(HarnessError::Validation("--xmax/--ymax/--mmax/--lmax must be positive".into()));
            }
            let report = commands::verify(&cfg)?;
            let summary = report.verification.as_ref().expect("verify fills the summary");
            for (name, c) in &summary.checks {
                eprintln!(
                    "{} {name}: {} checked, {} violations, worst margin {:e}",
                    if c.violations == 0 { "PASS" } else { "FAIL" },
                    c.checked,
                    c.violations,
                    c.worst_margin.unwrap_or(f64::NAN)
                );
            }
            for (name, c) in &summary.informational {
                eprintln!("INFO {name}: {} checked, {} exceed", c.checked, c.violations);
            }
            for v in &summary.first_violations {
                eprintln!("violation: {v}");
            }
            emit(&report, v.out.as_ref())?;
            Ok(if summary.passed() { 0 } else { 1 })
        }
        Command::Generate(g) => {
            let inst = if g.product {
                gen_product(g.x_size, g.y_size, g.concentration, g.seed)?
            } else {
                gen_random(g.x_size, g.y_size, g.concentration, g.seed)?
            };
            save_instance(&inst, &g.out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
