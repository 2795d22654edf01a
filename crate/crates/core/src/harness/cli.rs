//! Command-line front end. Exit status: 0 on success, 1 on invalid input or
//! a rejected certificate, 2 when the oracle or a required convergence fails.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{ExperimentConfig, MarketSpec, ScheduleKind, ScheduleSpec};
use super::ensemble::run_ensemble;
use super::io;
use super::report::report_files;
use crate::dynamics::{default_initial_bids, run_dynamics, validate_liveness, DynamicsConfig, UpdateRule};
use crate::equilibrium::{compute_equilibrium_with, verify_equilibrium, OracleConfig, OracleFailure};
use crate::market::{generate_random_market, validate_market, MarketInstance};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "fpr", version, about = "Fisher market dynamics: proportional response, best response, equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random normalized market as JSON.
    Generate(GenerateArgs),
    /// Run one trajectory and write it as CSV.
    Run(RunArgs),
    /// Check whether a bid profile is a market equilibrium.
    Verify(VerifyArgs),
    /// Compute a cross-checked equilibrium certificate.
    Equilibrium(EquilibriumArgs),
    /// Run an ensemble of trajectories and average them.
    Ensemble(EnsembleArgs),
    /// Melt CSV outputs into a `source,t,metric,value` table.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    market: PathBuf,
    /// `prd` or `br`.
    #[arg(long, default_value = "prd")]
    rule: String,
    /// A schedule kind (round-robin, random-subset, random-order,
    /// synchronous) or the path of a schedule JSON file.
    #[arg(long, default_value = "round-robin")]
    schedule: String,
    /// Liveness bound for random-subset schedules (defaults to n).
    #[arg(long = "T")]
    liveness: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Reject the schedule unless it is T-live for this T.
    #[arg(long = "require-T")]
    require_liveness: Option<usize>,
    /// Initial bids (uniform over each buyer's valued goods when omitted).
    #[arg(long)]
    bids: Option<PathBuf>,
    /// Compute an equilibrium first and report distances to it.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 1e-6)]
    oracle_tol: f64,
    /// Exit with status 2 if the run stops before converging.
    #[arg(long)]
    require_convergence: bool,
    /// Trajectory CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Final bid profile as JSON.
    #[arg(long)]
    bids_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    market: PathBuf,
    /// Bid profile JSON: an array of rows, or an object with a `bids` field.
    #[arg(long)]
    bids: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EquilibriumArgs {
    #[arg(long)]
    market: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    /// Experiment config JSON; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    market: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    market_seed: Option<u64>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long = "T")]
    liveness: Option<usize>,
    #[arg(long)]
    schedule_seed: Option<u64>,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    oracle_tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one trajectory CSV per run.
    #[arg(long)]
    per_run: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Trajectory or aggregate CSV files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit status.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Equilibrium(args) => equilibrium(args),
        Command::Ensemble(args) => ensemble(args),
        Command::Report(args) => report(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_valid_market(path: &Path) -> Result<MarketInstance> {
    let market = io::load_market(path)?;
    let report = validate_market(&market);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !report.is_valid() {
        return Err(Error::Validation(report.to_string()));
    }
    Ok(market)
}

fn write_json_or_stdout<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => io::write_json(path, value),
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn generate(args: GenerateArgs) -> Result<i32> {
    if args.n == 0 || args.m == 0 {
        return Err(Error::Config("--n and --m must be at least 1".into()));
    }
    let market = generate_random_market(args.n, args.m, args.seed);
    write_json_or_stdout(args.out.as_deref(), &market)?;
    Ok(0)
}

fn oracle_failure(failure: Box<OracleFailure>) -> Error {
    Error::Oracle(failure)
}

#[derive(Serialize)]
struct RunReport<'a> {
    rule: UpdateRule,
    steps_run: usize,
    converged: bool,
    converged_at: Option<usize>,
    prices_converged: bool,
    settled_at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<&'static str>,
    final_prices: &'a [f64],
    final_potential: f64,
    final_nsw: f64,
}

fn run(args: RunArgs) -> Result<i32> {
    let market = load_valid_market(&args.market)?;
    let rule: UpdateRule = args.rule.parse()?;
    let n = market.n();
    let schedule = match args.schedule.parse::<ScheduleKind>() {
        Ok(ScheduleKind::File) | Err(_) => io::load_schedule(Path::new(&args.schedule), n)?,
        Ok(kind) => ScheduleSpec {
            kind,
            liveness: args.liveness,
            seed: args.seed,
            path: None,
        }
        .build(n, args.steps, args.seed)?,
    };
    if let Some(t) = args.require_liveness {
        if !validate_liveness(&schedule, t) {
            return Err(Error::Liveness(format!("schedule is not {t}-live")));
        }
    }
    let b0 = match &args.bids {
        Some(path) => io::load_bids(path)?,
        None => default_initial_bids(&market),
    };
    let mut distance = None;
    let reference = if args.oracle {
        let config = OracleConfig {
            tol: args.oracle_tol,
            seed: args.seed,
            ..OracleConfig::default()
        };
        let cert = compute_equilibrium_with(&market, &config)?;
        distance = Some(if cert.is_generic() { "exact" } else { "upper bound" });
        Some(cert.reference())
    } else {
        None
    };
    let config = DynamicsConfig {
        rule,
        max_steps: args.steps,
        tolerance: args.tolerance,
        record_every: args.record_every,
        ..DynamicsConfig::default()
    };
    let traj = run_dynamics(&market, &b0, &schedule, &config, reference.as_ref())?;

    match &args.out {
        Some(path) => io::save_trajectory_csv(path, &traj)?,
        None => io::write_trajectory_csv(std::io::stdout().lock(), &io::TrajectoryRow::from_trajectory(&traj))?,
    }
    if let Some(path) = &args.bids_out {
        io::save_bids(path, &traj.final_bids)?;
    }
    let last = traj.final_point();
    let report = RunReport {
        rule,
        steps_run: traj.steps_run,
        converged: traj.converged,
        converged_at: traj.converged_at,
        prices_converged: traj.prices_converged,
        settled_at: traj.settled_at,
        distance,
        final_prices: &last.prices,
        final_potential: last.potential,
        final_nsw: last.nsw,
    };
    eprintln!("{}", serde_json::to_string(&report)?);
    if args.require_convergence && !traj.converged {
        return Err(oracle_failure(Box::new(OracleFailure {
            reason: format!(
                "run stopped after {} steps without converging (last window change {:e})",
                traj.steps_run, traj.last_window_bid_change
            ),
            prd: None,
            br: None,
        })));
    }
    Ok(0)
}

fn verify(args: VerifyArgs) -> Result<i32> {
    let market = load_valid_market(&args.market)?;
    let bids = io::load_bids(&args.bids)?;
    let cert = verify_equilibrium(&bids, &market, args.tol)?;
    write_json_or_stdout(args.out.as_deref(), &cert)?;
    if cert.accepted {
        Ok(0)
    } else {
        eprintln!(
            "rejected: residuals clearing {:e}, budget {:e}, optimality {:e} exceed {:e}",
            cert.residuals.clearing, cert.residuals.budget, cert.residuals.optimality, args.tol
        );
        Ok(1)
    }
}

fn equilibrium(args: EquilibriumArgs) -> Result<i32> {
    let market = load_valid_market(&args.market)?;
    let mut config = OracleConfig {
        tol: args.tol,
        seed: args.seed,
        ..OracleConfig::default()
    };
    if let Some(steps) = args.max_steps {
        config.prd_max_steps = steps;
        config.br_max_steps = steps;
    }
    let cert = compute_equilibrium_with(&market, &config)?;
    write_json_or_stdout(args.out.as_deref(), &cert)?;
    Ok(0)
}

fn ensemble(args: EnsembleArgs) -> Result<i32> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(path) = args.market {
        config.market = MarketSpec::File { path };
    }
    if args.n.is_some() || args.m.is_some() || args.market_seed.is_some() {
        let (n0, m0, s0) = match config.market {
            MarketSpec::Generate { n, m, seed } => (n, m, seed),
            MarketSpec::File { .. } => {
                return Err(Error::Config("--n/--m/--market-seed need a generated market".into()));
            }
        };
        config.market = MarketSpec::Generate {
            n: args.n.unwrap_or(n0),
            m: args.m.unwrap_or(m0),
            seed: args.market_seed.unwrap_or(s0),
        };
    }
    if let Some(s) = &args.schedule {
        match s.parse::<ScheduleKind>() {
            Ok(kind) => config.schedule.kind = kind,
            Err(_) => {
                config.schedule.kind = ScheduleKind::File;
                config.schedule.path = Some(PathBuf::from(s));
            }
        }
    }
    if let Some(t) = args.liveness {
        config.schedule.liveness = Some(t);
    }
    if let Some(s) = args.schedule_seed {
        config.schedule.seed = s;
    }
    if let Some(r) = &args.rule {
        config.dynamics.rule = r.parse()?;
    }
    if let Some(s) = args.steps {
        config.dynamics.max_steps = s;
    }
    if let Some(t) = args.tolerance {
        config.dynamics.tolerance = t;
    }
    if let Some(r) = args.record_every {
        config.dynamics.record_every = r;
    }
    if let Some(s) = args.size {
        config.ensemble.size = s;
    }
    if args.workers.is_some() {
        config.ensemble.workers = args.workers;
    }
    if let Some(t) = args.oracle_tol {
        config.ensemble.oracle_tol = t;
    }
    if args.out.is_some() {
        config.output.dir = args.out;
    }
    if args.per_run {
        config.output.per_run = true;
    }

    let summary = run_ensemble(&config)?;
    let steps: Vec<usize> = summary.runs.iter().filter_map(|r| r.converged_at).collect();
    eprintln!(
        "{} runs, {} oracle failures, {} converged",
        summary.runs.len(),
        summary.failures,
        steps.len()
    );
    if config.output.dir.is_none() {
        write_json_or_stdout(None, &summary)?;
    }
    if summary.failures == summary.runs.len() {
        return Err(Error::Oracle(Box::new(OracleFailure {
            reason: "every run failed to obtain an equilibrium reference".into(),
            prd: None,
            br: None,
        })));
    }
    Ok(0)
}

fn report(args: ReportArgs) -> Result<i32> {
    let rows = match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            report_files(&args.inputs, std::io::BufWriter::new(file))?
        }
        None => report_files(&args.inputs, std::io::stdout().lock())?,
    };
    eprintln!("{rows} rows");
    Ok(0)
}
