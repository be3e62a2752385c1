//! `laxtop` command line: `verify`, `simulate` and `check-reduction`.
//!
//! Exit codes: 0 pass, 1 numerical failure, 2 usage or config error.

mod config;

pub use config::{InitialMode, InitialSpec, RunConfig, Tolerances};

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::axioms::{all_pass, check_scalar_suite, run_axiom_suite, IdentityReport, SamplePlan};
use crate::dynamics::{
    constraint_drift, integrate, rank1_drift, write_trajectory_csv, ConservationReport,
    TrajectoryConfig,
};
use crate::error::{Error, Result};
use crate::lax::{check_rank_one_reduction, check_spin_rs, check_top, Comparison, PhaseState};
use crate::rmatrix::{
    calibrate_belavin, calibration, scalar_provider, BelavinRMatrix, CalibrationReport, RMatrix,
};
use crate::specfun::EllipticContext;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "laxtop",
    version,
    about = "Integrable GL(NM) relativistic interacting tops"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration; defaults are used for missing fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suites and write verify.json.
    Verify(CommonArgs),
    /// Integrate the equations of motion and write trajectory.csv and conservation.json.
    Simulate(CommonArgs),
    /// Compare the block construction with its N = 1, M = 1 and rank-one reductions.
    CheckReduction(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Simulate(_) => "simulate",
            Command::CheckReduction(_) => "check-reduction",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Verify(a) | Command::Simulate(a) | Command::CheckReduction(a) => a,
        }
    }
}

#[derive(Serialize)]
struct Header {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    timestamp: String,
}

impl Header {
    fn new(command: &'static str) -> Self {
        Header {
            tool: "laxtop",
            version: env!("CARGO_PKG_VERSION"),
            command,
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

/// Numerical failures map to 1, everything else to 2.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NearPole { .. }
        | Error::NonFinite(_)
        | Error::CalibrationFailed(_)
        | Error::NotRankOne { .. }
        | Error::OffShell { .. }
        | Error::SingularConfiguration { .. } => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

pub fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The N = 1 scalar provider or the calibrated Belavin provider.
pub enum Provider {
    Scalar(crate::rmatrix::ScalarRMatrix),
    Belavin(BelavinRMatrix, Box<CalibrationReport>),
}

impl Provider {
    pub fn build(ctx: &EllipticContext, n: usize) -> Result<Self> {
        if n == 1 {
            Ok(Provider::Scalar(scalar_provider(ctx.clone())))
        } else {
            let (p, report) = calibrate_belavin(ctx.clone(), n, &calibration::default_plan())?;
            Ok(Provider::Belavin(p, Box::new(report)))
        }
    }

    pub fn as_dyn(&self) -> &dyn RMatrix {
        match self {
            Provider::Scalar(p) => p,
            Provider::Belavin(p, _) => p,
        }
    }

    pub fn calibration(&self) -> Option<&CalibrationReport> {
        match self {
            Provider::Scalar(_) => None,
            Provider::Belavin(_, r) => Some(r),
        }
    }
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    header: Header,
    regime: String,
    n: usize,
    calibration: Option<&'a CalibrationReport>,
    reports: Vec<IdentityReport>,
    pass: bool,
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<bool> {
    let ctx = cfg.context()?;
    let provider = Provider::build(&ctx, cfg.n)?;
    let plan = SamplePlan::new(cfg.seed, cfg.samples);
    let tol = cfg.tolerances.identity;
    let mut reports = Vec::new();
    if cfg.n == 1 {
        reports.extend(check_scalar_suite(&ctx, &plan, tol));
    }
    reports.extend(run_axiom_suite(provider.as_dyn(), &plan, tol));
    let pass = all_pass(&reports);
    let out = VerifyOutput {
        header: Header::new("verify"),
        regime: ctx.regime().to_string(),
        n: cfg.n,
        calibration: provider.calibration(),
        reports,
        pass,
    };
    write_json(&cfg.out_dir, "verify.json", &out)?;
    Ok(pass)
}

#[derive(Serialize)]
struct SimulateOutput {
    header: Header,
    regime: String,
    n: usize,
    m: usize,
    dt: f64,
    steps: usize,
    conservation: Option<ConservationReport>,
    constraint_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank1_drift: Option<f64>,
    error: Option<String>,
    pass: bool,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<bool> {
    let ctx = cfg.context()?;
    let state = cfg.initial_state()?;
    let provider = Provider::build(&ctx, cfg.n)?;
    let tcfg = TrajectoryConfig {
        dt: cfg.dt,
        steps: cfg.steps,
        z_samples: cfg.spectral_points(),
        max_order: cfg.max_order(),
        record_every: cfg.record_every,
        resync_velocities: cfg.resync_velocities,
    };
    let mut out = SimulateOutput {
        header: Header::new("simulate"),
        regime: ctx.regime().to_string(),
        n: cfg.n,
        m: cfg.m,
        dt: cfg.dt,
        steps: cfg.steps,
        conservation: None,
        constraint_drift: None,
        rank1_drift: None,
        error: None,
        pass: false,
    };
    match integrate(provider.as_dyn(), &state, &tcfg) {
        Ok((traj, report)) => {
            fs::create_dir_all(&cfg.out_dir)?;
            write_trajectory_csv(&traj, fs::File::create(cfg.out_dir.join("trajectory.csv"))?)?;
            let snaps: Vec<serde_json::Value> = traj
                .snapshots
                .iter()
                .map(|(t, s)| serde_json::json!({ "t": t, "state": s }))
                .collect();
            write_json(&cfg.out_dir, "snapshots.json", &snaps)?;
            out.pass = report.max_relative_drift < cfg.tolerances.conservation;
            out.constraint_drift = Some(constraint_drift(&traj));
            if cfg.initial.mode == InitialMode::Rank1 {
                out.rank1_drift = Some(rank1_drift(&traj));
            }
            out.conservation = Some(report);
        }
        Err(err @ Error::SingularConfiguration { .. }) => {
            out.error = Some(err.to_string());
            write_json(&cfg.out_dir, "conservation.json", &out)?;
            return Err(err);
        }
        Err(err) => return Err(err),
    }
    write_json(&cfg.out_dir, "conservation.json", &out)?;
    Ok(out.pass)
}

#[derive(Serialize)]
struct ReductionOutput {
    header: Header,
    regime: String,
    spin_rs: Vec<Comparison>,
    top: Vec<Comparison>,
    rank1: Vec<Comparison>,
    pass: bool,
}

/// Spin RS comparison on a seeded N = 1 state with M from the config, top
/// comparison on a seeded M = 1 state with N from the config, and the rank-one
/// comparison on the configured initial state (a seeded rank-one state unless
/// a file is given).
pub fn cmd_check_reduction(cfg: &RunConfig) -> Result<bool> {
    let ctx = cfg.context()?;
    let tol = cfg.tolerances.lax;
    let zs = cfg.spectral_points();
    let eta = cfg.eta();

    let scalar = scalar_provider(ctx.clone());
    let rs_state = PhaseState::random(1, cfg.m, eta, cfg.seed)?;
    let spin_rs = check_spin_rs(&scalar, &rs_state, &zs, tol)?;

    let provider = Provider::build(&ctx, cfg.n)?;
    let top_state = PhaseState::random(cfg.n, 1, eta, cfg.seed)?;
    let top = check_top(provider.as_dyn(), &top_state, &zs, tol)?;

    let rank_state = match cfg.initial.mode {
        InitialMode::File => cfg.initial_state()?,
        _ => PhaseState::rank_one(cfg.n, cfg.m, eta, cfg.seed)?,
    };
    let rank1 = check_rank_one_reduction(provider.as_dyn(), &rank_state, tol)?;

    let pass = spin_rs.iter().chain(&top).chain(&rank1).all(|c| c.pass);
    let out = ReductionOutput {
        header: Header::new("check-reduction"),
        regime: ctx.regime().to_string(),
        spin_rs,
        top,
        rank1,
        pass,
    };
    write_json(&cfg.out_dir, "reduction.json", &out)?;
    Ok(pass)
}

/// Sizes the global rayon pool from LAXTOP_THREADS (0 or unset = automatic).
pub fn configure_threads() -> Result<()> {
    let threads = match std::env::var("LAXTOP_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::InvalidConfig(format!(
                "LAXTOP_THREADS must be a non-negative integer, got {v:?}"
            ))
        })?,
        Err(_) => 0,
    };
    // a pool that is already initialised keeps its size
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    let name = cli.command.name();
    let outcome = configure_threads()
        .and_then(|_| load_config(cli.command.args()))
        .and_then(|cfg| match &cli.command {
            Command::Verify(_) => cmd_verify(&cfg),
            Command::Simulate(_) => cmd_simulate(&cfg),
            Command::CheckReduction(_) => cmd_check_reduction(&cfg),
        });
    match outcome {
        Ok(true) => {
            println!("{name}: pass");
            EXIT_PASS
        }
        Ok(false) => {
            println!("{name}: FAIL");
            EXIT_FAIL
        }
        Err(err) => {
            eprintln!("{name}: error: {err}");
            exit_code(&err)
        }
    }
}
