//! `entflow` command-line runner.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration (nothing
//! written), 3 numerical contract violated (outputs written for inspection).

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use entflow::circuits::{self, ReadoutModel, SYSTEM_QUBITS};
use entflow::dynamics::TwoQubitMeasures;
use entflow::dynamics::{self, LEDGER_TOL};
use entflow::encoder::{self, OptimizationReport};
use entflow::report::{self, format_number, Conventions, Figure};
use entflow::states::DensityMatrix;
use entflow::{qmath, Exec};
use serde::Serialize;

use config::RunConfig;

const DEFAULT_SHOTS: u64 = 8192;
const DEFAULT_OUT: &str = "entflow-out";

#[derive(Parser, Debug)]
#[command(
    name = "entflow",
    version,
    about = "Correlation flow of few-qubit states under local noise"
)]
struct Cli {
    /// JSON experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled artifacts
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Shots per tomography setting
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Run without the thread pool
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trajectory of every quantity over the p grid
    Sweep,
    /// Correlation-flow ledger with its residual check
    Ledger,
    /// Best local-unitary encoding for an objective
    Optimize,
    /// Where two states' curves cross
    Crossing,
    /// Simulated tomography of the damping circuit
    Tomo,
    /// Data behind one of the figures: fig2, fig3, fig4 or fig5
    Figure { name: String },
    /// Dispatch on the config's `command` field
    Run,
}

enum Failure {
    Invalid(String),
    Contract(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<entflow::Error> for Failure {
    fn from(e: entflow::Error) -> Self {
        Failure::Other(e.into())
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    config: serde_json::Value,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    conventions: Conventions,
}

struct Ctx {
    out: PathBuf,
    seed: u64,
    shots: u64,
    exec: Exec,
}

impl Ctx {
    fn prepare_dir(&self) -> anyhow::Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))
    }

    fn write(&self, name: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    fn metadata(&self, cfg: &RunConfig, shots: Option<u64>) -> anyhow::Result<()> {
        let meta = Metadata {
            command: cfg.name(),
            config: serde_json::to_value(cfg)?,
            seed: self.seed,
            shots,
            conventions: Conventions::default(),
        };
        self.write("metadata.json", &to_json(&meta)?)
    }
}

fn read_config(path: Option<&Path>) -> Result<String, Failure> {
    let path = path.ok_or_else(|| Failure::Invalid("--config <path> is required".into()))?;
    fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("reading {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Contract(msg)) => {
            eprintln!("numerical contract violated: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    if cli.shots == Some(0) {
        return Err(Failure::Invalid("--shots must be positive".into()));
    }
    if let Command::Figure { name } = &cli.command {
        let fig = Figure::from_name(name).ok_or_else(|| {
            Failure::Invalid(format!("unknown figure {name:?}; expected fig2..fig5"))
        })?;
        let ctx = Ctx {
            out: cli.out.clone().unwrap_or_else(|| DEFAULT_OUT.into()),
            seed: cli.seed.unwrap_or(0),
            shots: cli.shots.unwrap_or(DEFAULT_SHOTS),
            exec,
        };
        return cmd_figure(&ctx, fig);
    }
    let text = read_config(cli.config.as_deref())?;
    let cfg = match &cli.command {
        Command::Sweep => config::parse_for("sweep", &text),
        Command::Ledger => config::parse_for("ledger", &text),
        Command::Optimize => config::parse_for("optimize", &text),
        Command::Crossing => config::parse_for("crossing", &text),
        Command::Tomo => config::parse_for("tomo", &text),
        Command::Run => config::parse_run(&text),
        Command::Figure { .. } => unreachable!("handled above"),
    }
    .map_err(Failure::Invalid)?;
    let shots = match &cfg {
        RunConfig::Tomo(t) => cli.shots.or(t.shots).unwrap_or(DEFAULT_SHOTS),
        _ => cli.shots.unwrap_or(DEFAULT_SHOTS),
    };
    let ctx = Ctx {
        out: cli
            .out
            .clone()
            .or_else(|| cfg.out().cloned())
            .unwrap_or_else(|| DEFAULT_OUT.into()),
        seed: cli.seed.or(cfg.seed()).unwrap_or(0),
        shots,
        exec,
    };
    dispatch(&ctx, &cfg)
}

fn dispatch(ctx: &Ctx, cfg: &RunConfig) -> Result<(), Failure> {
    match cfg {
        RunConfig::Sweep(c) => {
            let job = c.prepare().map_err(Failure::Invalid)?;
            let traj =
                dynamics::sweep_with(&job.state, &job.encoding, &job.family, &job.grid, ctx.exec)?;
            ctx.prepare_dir()?;
            ctx.write("trajectory.csv", &report::trajectory_csv(&traj)?)?;
            ctx.metadata(cfg, None)?;
            Ok(())
        }
        RunConfig::Ledger(c) => {
            let job = c.prepare().map_err(Failure::Invalid)?;
            let ledger =
                dynamics::ledger_with(&job.state, &job.encoding, &job.family, &job.grid, ctx.exec)?;
            ctx.prepare_dir()?;
            ctx.write("ledger.csv", &ledger_csv(&ledger))?;
            ctx.metadata(cfg, None)?;
            let worst = ledger.max_residual();
            if worst > LEDGER_TOL {
                return Err(Failure::Contract(format!(
                    "ledger residual {worst:e} exceeds {LEDGER_TOL:e}"
                )));
            }
            Ok(())
        }
        RunConfig::Optimize(c) => {
            let job = c.prepare().map_err(Failure::Invalid)?;
            let opt = encoder::optimize_with(
                &job.state,
                &job.family,
                &job.objective,
                &job.config,
                ctx.exec,
            )?;
            let rep = OptimizationReport::new(&opt, &job.objective, &job.family);
            ctx.prepare_dir()?;
            ctx.write("optimize.json", &to_json(&rep)?)?;
            ctx.metadata(cfg, None)?;
            Ok(())
        }
        RunConfig::Crossing(c) => {
            let job = c.prepare().map_err(Failure::Invalid)?;
            let crossing = dynamics::find_crossing_with(
                &job.a,
                &job.b,
                &job.family,
                job.measure,
                &job.grid,
                ctx.exec,
            )?;
            let body = serde_json::json!({ "measure": job.measure, "crossing": crossing });
            ctx.prepare_dir()?;
            ctx.write("crossing.json", &to_json(&body)?)?;
            ctx.metadata(cfg, None)?;
            Ok(())
        }
        RunConfig::Tomo(c) => {
            let job = c.prepare().map_err(Failure::Invalid)?;
            cmd_tomo(ctx, cfg, &job)
        }
    }
}

fn ledger_csv(ledger: &dynamics::CorrelationLedger) -> String {
    let mut s = String::from("p,delta_T_S,delta_T_E,I_SE,I_local,residual\n");
    for e in &ledger.entries {
        let row = [e.p, e.delta_t_s, e.delta_t_e, e.i_se, e.i_local, e.residual].map(format_number);
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct DensityJson {
    n_qubits: usize,
    real: Vec<Vec<f64>>,
    imag: Vec<Vec<f64>>,
}

fn density_json(rho: &DensityMatrix) -> DensityJson {
    let m = rho.matrix();
    let d = m.dim();
    DensityJson {
        n_qubits: rho.n_qubits(),
        real: (0..d)
            .map(|i| (0..d).map(|j| m[(i, j)].re).collect())
            .collect(),
        imag: (0..d)
            .map(|i| (0..d).map(|j| m[(i, j)].im).collect())
            .collect(),
    }
}

/// Calibration draws from a seed distinct from the tomography seed.
const CALIBRATION_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Uhlmann fidelity `(‖√ρ √σ‖₁)²`.
fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> entflow::Result<f64> {
    let a = qmath::matrix_sqrt_psd(rho.matrix())?;
    let b = qmath::matrix_sqrt_psd(sigma.matrix())?;
    Ok(qmath::trace_norm(&(&a * &b)).powi(2))
}

fn cmd_tomo(ctx: &Ctx, cfg: &RunConfig, job: &config::TomoJob) -> Result<(), Failure> {
    let circuit = circuits::build_ad_circuit(job.input, job.theta);
    let readout = ReadoutModel::symmetric_flip(SYSTEM_QUBITS.len(), job.readout_flip);
    let mitigation = if job.mitigate {
        let shots = job.calibration_shots.unwrap_or(ctx.shots);
        Some(circuits::calibrate(
            &readout,
            shots,
            ctx.seed ^ CALIBRATION_SEED_MIX,
        )?)
    } else {
        None
    };
    let rho = circuits::simulate(&circuit)?.reduced(&SYSTEM_QUBITS)?;
    let per_rep = 3u64.pow(SYSTEM_QUBITS.len() as u32);
    let mut records = Vec::new();
    let mut estimates = Vec::new();
    for r in 0..job.repetitions as u64 {
        let rec = circuits::measure_tomography(
            &rho,
            ctx.shots,
            &readout,
            ctx.seed,
            r * per_rep,
            ctx.exec,
        )?;
        estimates.push(circuits::reconstruct(&rec, mitigation.as_ref())?);
        records.push(rec);
    }

    let mut csv =
        String::from("repetition,fidelity,concurrence,negativity,doubled_negativity,singlet_fraction,telep_fidelity\n");
    let mut sums = [0.0; 6];
    for (r, est) in estimates.iter().enumerate() {
        let m = TwoQubitMeasures::of(est)?;
        let vals = [
            fidelity(&rho, est)?,
            m.concurrence,
            m.negativity,
            m.doubled_negativity,
            m.singlet_fraction,
            m.telep_fidelity,
        ];
        for (s, v) in sums.iter_mut().zip(vals) {
            *s += v;
        }
        csv.push_str(&format!("{r},{}\n", vals.map(format_number).join(",")));
    }
    let n = estimates.len() as f64;
    csv.push_str(&format!(
        "mean,{}\n",
        sums.map(|s| format_number(s / n)).join(",")
    ));
    let summary = serde_json::json!({
        "p": circuits::p_for_theta(job.theta),
        "theta": job.theta,
        "exact": TwoQubitMeasures::of(&rho)?,
        "exact_state": density_json(&rho),
        "calibrated_readout": mitigation,
    });

    ctx.prepare_dir()?;
    for (r, (rec, est)) in records.iter().zip(&estimates).enumerate() {
        ctx.write(&format!("tomo_rep{r}_record.json"), &to_json(rec)?)?;
        ctx.write(
            &format!("tomo_rep{r}_state.json"),
            &to_json(&density_json(est))?,
        )?;
    }
    ctx.write("tomo_measures.csv", &csv)?;
    ctx.write("tomo_summary.json", &to_json(&summary)?)?;
    ctx.metadata(cfg, Some(ctx.shots))?;
    Ok(())
}

fn cmd_figure(ctx: &Ctx, fig: Figure) -> Result<(), Failure> {
    let data = report::figure_data(fig, ctx.seed, ctx.exec)?;
    ctx.prepare_dir()?;
    for (name, contents) in &data.files {
        ctx.write(name, contents)?;
    }
    ctx.write(
        &format!("{}_manifest.json", fig.name()),
        &data.manifest_json(),
    )?;
    Ok(())
}
