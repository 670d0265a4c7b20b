//! `boltzsmooth` command-line driver.
//!
//! Exit codes: 0 success, 1 verification violation, 2 configuration error,
//! 3 blow-up or stability failure, 4 any other runtime error.

mod artifacts;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boltzsmooth::experiment::{run_induction_experiment, run_smoothing};
use boltzsmooth::kernel::{kernel_moment, momentum_transfer, MomentWeight};
use boltzsmooth::solver::integrate;
use boltzsmooth::verify::{alpha_star, c_bd_constant, lambda0, run_suite};
use boltzsmooth::{Error, ExperimentConfig};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use artifacts::{moments_csv, snapshot_csv, Manifest};

const M0_TOL: f64 = 1e-12;
const M1_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "boltzsmooth", version, about = "Spectral Boltzmann solver and smoothing-estimate harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the initial state and write snapshots and moments.
    Simulate(Common),
    /// Run the randomized inequality suite.
    Verify(Common),
    /// Simulate and fit the log-weight decay rate at the fit times.
    Smoothing(Common),
    /// Replay the Gevrey induction ladder on a simulated trajectory.
    Induction(Common),
    /// Print kernel moments and derived constants.
    KernelInfo(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
            Command::Smoothing(_) => "smoothing",
            Command::Induction(_) => "induction",
            Command::KernelInfo(_) => "kernel-info",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Simulate(c)
            | Command::Verify(c)
            | Command::Smoothing(c)
            | Command::Induction(c)
            | Command::KernelInfo(c) => c,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Report tolerance of the inequality suite.
    #[arg(long)]
    tol_report: Option<f64>,
}

enum Failure {
    Config(String),
    Violation(String),
    BlowUp(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Config(_) => 2,
            Failure::BlowUp(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Violation(m) | Failure::BlowUp(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Domain(_) => Failure::Config(e.to_string()),
            Error::BlowUp { .. } | Error::Stability { .. } => Failure::BlowUp(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o: {e}"))
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg: ExperimentConfig =
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    let common = cli.command.common();
    let result = load_config(&common.config, common.seed).and_then(|cfg| {
        let out = out_dir(common, &cfg);
        std::fs::create_dir_all(&out)?;
        let mut manifest = Manifest::new(command, &cfg)?;
        let outcome = match &cli.command {
            Command::Simulate(_) => simulate(&cfg, &out, &mut manifest),
            Command::Verify(_) => verify(&cfg, common.tol_report, &out, &mut manifest),
            Command::Smoothing(_) => smoothing(&cfg, &out, &mut manifest),
            Command::Induction(_) => induction(&cfg, &out, &mut manifest),
            Command::KernelInfo(_) => kernel_info(&cfg, &mut manifest),
        };
        // config errors leave no artifacts; everything else records its status
        if let Err(Failure::Config(_)) = &outcome {
            return outcome;
        }
        manifest.set_status(&outcome);
        manifest.write(&out)?;
        outcome
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn simulate(cfg: &ExperimentConfig, out: &Path, manifest: &mut Manifest) -> Result<(), Failure> {
    let sim = cfg.sim_config()?;
    let traj = match integrate(&sim) {
        Ok(t) => t,
        Err(e @ (Error::BlowUp { .. } | Error::Stability { .. })) => {
            let last_valid = match e {
                Error::BlowUp { last_valid_t, .. } => Some(last_valid_t),
                _ => None,
            };
            manifest.insert("blow_up", json!({"error": e.to_string(), "last_valid_t": last_valid}));
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    for snap in &traj.snapshots {
        let name = format!("snap_t{}.csv", snap.t);
        manifest.write_file(out, &name, &snapshot_csv(&snap.field))?;
    }
    manifest.write_file(out, "moments.csv", &moments_csv(&traj))?;
    let (r0, r1) = traj.conservation_residuals();
    manifest.insert(
        "residuals",
        json!({
            "mass": r0,
            "mass_tol": M0_TOL,
            "momentum_slope": r1,
            "momentum_slope_tol": M1_TOL,
            "pass": r0 <= M0_TOL && r1 <= M1_TOL,
        }),
    );
    manifest.insert("moments", serde_json::to_value(&traj.moment_series).unwrap());
    manifest.insert(
        "solver",
        json!({
            "steps": traj.steps,
            "max_bochner_ratio": traj.max_bochner_ratio,
            "moment_noise": traj.moment_noise,
        }),
    );
    Ok(())
}

fn verify(
    cfg: &ExperimentConfig,
    tol_report: Option<f64>,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), Failure> {
    let mut suite = cfg.suite_config()?;
    if let Some(tol) = tol_report {
        if tol.is_nan() || tol < 0.0 {
            return Err(Failure::Config(format!("--tol-report must be nonnegative, got {tol}")));
        }
        suite.tol_report = tol;
    }
    manifest.insert("suite", serde_json::to_value(suite).unwrap());
    let mut report = run_suite(&suite)?;
    report.metadata.config_hash = Some(manifest.config_hash().to_string());
    let text = serde_json::to_string_pretty(&report).unwrap() + "\n";
    manifest.write_file(out, "report.json", &text)?;
    let failures: Vec<Value> = report
        .failures()
        .map(|e| serde_json::to_value(e).unwrap())
        .collect();
    manifest.insert(
        "summary",
        json!({"entries": report.entries.len(), "failures": failures.len()}),
    );
    if failures.is_empty() {
        Ok(())
    } else {
        for f in &failures {
            eprintln!("witness: {f}");
        }
        Err(Failure::Violation(format!("{} check(s) failed; see report.json", failures.len())))
    }
}

fn smoothing(cfg: &ExperimentConfig, out: &Path, manifest: &mut Manifest) -> Result<(), Failure> {
    let (traj, rows) = run_smoothing(cfg)?;
    manifest.write_file(out, "moments.csv", &moments_csv(&traj))?;
    let mut csv = String::from("t,beta_t,M_hat,r_squared,window_lo,window_hi,points\n");
    let mut fits = Vec::new();
    for r in &rows {
        let f = &r.fit;
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.t, f.beta_t, f.m_hat, f.r_squared, f.window.0, f.window.1, f.points
        ));
        fits.push(json!({
            "t": r.t,
            "beta_hat": f.beta_t,
            "M_hat": f.m_hat,
            "r_squared": f.r_squared,
            "window": [f.window.0, f.window.1],
        }));
    }
    manifest.write_file(out, "fits.csv", &csv)?;
    manifest.insert("fits", Value::Array(fits));
    Ok(())
}

fn induction(cfg: &ExperimentConfig, out: &Path, manifest: &mut Manifest) -> Result<(), Failure> {
    let (_, report) = run_induction_experiment(cfg)?;
    let mut csv = String::from("N,Lambda_N,sup,margin,pass\n");
    for row in &report.ladder {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{}\n",
            row.n, row.lambda, row.sup, row.margin, row.pass
        ));
    }
    manifest.write_file(out, "ladder.csv", &csv)?;
    manifest.insert("constants", serde_json::to_value(&report.state).unwrap());
    manifest.insert(
        "ladder",
        json!({"n_max": report.n_max, "grid_limit": report.grid_limit, "rows": report.ladder.len()}),
    );
    Ok(())
}

fn kernel_info(cfg: &ExperimentConfig, manifest: &mut Manifest) -> Result<(), Failure> {
    let k = cfg.kernel()?;
    let tol = 1e-14;
    let mut info = serde_json::Map::new();
    info.insert("kernel".into(), serde_json::to_value(k).unwrap());
    for (name, w) in [
        ("lambda2", MomentWeight::TwoSc),
        ("sin2_half", MomentWeight::Sin2Half),
        ("sin2", MomentWeight::Sin2),
        ("cancellation_i2", MomentWeight::CancellationI2),
    ] {
        info.insert(name.into(), json!(kernel_moment(&k, w, tol)?));
    }
    info.insert("momentum_transfer".into(), json!(momentum_transfer(&k, tol)?));
    if let Some(mu) = k.mu() {
        info.insert("alpha_star".into(), json!(alpha_star(k.d, mu)));
        info.insert("lambda0".into(), json!(lambda0(k.d)));
        info.insert("c_bd".into(), json!(c_bd_constant(&k)?));
    }
    let info = Value::Object(info);
    println!("{}", serde_json::to_string_pretty(&info).unwrap());
    manifest.insert("kernel_info", info);
    Ok(())
}
