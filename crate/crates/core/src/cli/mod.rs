//! The `fedbandit` command line: `run`, `sweep`, `check-instance`, `dp-audit`.

mod experiment;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::dp::audit::{run_dp_audit, AuditConfig, AuditMechanism};
use crate::env::{estimate_margin_constant, estimate_min_eig_optimal, Instance, DEFAULT_EPS_GRID};
use crate::error::Error;
use crate::numkit::RngStream;
use crate::sim::{
    config_hash, median, run_episode, sweep, write_run_outputs, Algorithm, RunConfig,
};

pub use experiment::{Experiment, ExperimentFile, GenerateSpec, InstanceSource, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "fedbandit",
    version,
    about = "Federated linear contextual bandits with user-level DP"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write rounds.csv, phases.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the experiment's sweep grid, one subdirectory per cell plus sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces the sweep's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of hardware threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Estimate the diversity and margin constants of an instance file.
    CheckInstance {
        instance: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Binned likelihood-ratio audit of a mechanism on neighboring datasets.
    DpAudit {
        #[arg(long, default_value = "winsorized1d")]
        mech: String,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A failed command, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(Error),
    Runtime(Error),
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
            Failure::Check(_) => EXIT_CHECK_FAILED,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => write!(f, "{e}"),
            Failure::Check(msg) => f.write_str(msg),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn config_err(e: Error) -> Failure {
    Failure::Config(e)
}

fn runtime_err(e: Error) -> Failure {
    match e {
        Error::Config(_) => Failure::Config(e),
        other => Failure::Runtime(other),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

pub fn execute(cmd: Command) -> CmdResult {
    match cmd {
        Command::Run { config, out, seed } => cmd_run(&config, out.as_deref(), seed),
        Command::Sweep {
            config,
            out,
            seed,
            jobs,
        } => cmd_sweep(&config, out.as_deref(), seed, jobs),
        Command::CheckInstance {
            instance,
            samples,
            seed,
        } => cmd_check_instance(&instance, samples, seed),
        Command::DpAudit {
            mech,
            eps,
            samples,
            seed,
        } => {
            let mech: AuditMechanism = mech.parse().map_err(config_err)?;
            cmd_dp_audit(mech, eps, samples, seed)
        }
    }
}

/// Warns when ε sits below `sqrt(d) (log₂T)^1.5 / M`, the scale under
/// which the regret guarantee is not expected to hold.
fn warn_small_epsilon(cfg: &RunConfig, d: usize) {
    if cfg.algorithm != Algorithm::Robin {
        return;
    }
    let floor = (d as f64).sqrt() * (cfg.t as f64).log2().powf(1.5) / cfg.m as f64;
    if cfg.privacy.epsilon < floor {
        eprintln!(
            "warning: epsilon = {} is below sqrt(d) log2(T)^1.5 / M = {floor:.3}; expect noise-dominated estimates",
            cfg.privacy.epsilon
        );
    }
}

fn load(config: &Path) -> std::result::Result<(Experiment, Instance), Failure> {
    let exp = Experiment::load(config).map_err(config_err)?;
    let inst = exp.instance().map_err(runtime_err)?;
    Ok((exp, inst))
}

pub fn cmd_run(config: &Path, out: Option<&Path>, seed: Option<u64>) -> CmdResult {
    let (exp, inst) = load(config)?;
    let mut cfg = exp.file.run.clone();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = exp.out_dir(out).map_err(config_err)?;
    cfg.resolve(&inst).map_err(runtime_err)?;
    warn_small_epsilon(&cfg, inst.d());
    let result = run_episode(&cfg, &inst).map_err(runtime_err)?;
    let summary = write_run_outputs(&dir, &cfg, &inst, &result).map_err(Failure::Runtime)?;
    println!(
        "{}: final regret {:.3} over T = {} (M = {}), outputs in {}",
        cfg.algorithm,
        summary.final_regret,
        cfg.t,
        cfg.m,
        dir.display()
    );
    Ok(())
}

pub fn cmd_sweep(
    config: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    jobs: Option<usize>,
) -> CmdResult {
    let (exp, inst) = load(config)?;
    let spec = exp.file.sweep.clone().ok_or_else(|| {
        Failure::Config(Error::Config("experiment has no `sweep` section".into()))
    })?;
    let seeds = seed.map_or(spec.seeds.clone(), |s| vec![s]);
    let dir = exp.out_dir(out).map_err(config_err)?;
    let base = &exp.file.run;
    warn_small_epsilon(base, inst.d());

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Failure::Config(Error::Config(
                "--jobs must be at least 1".into(),
            )));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Runtime(Error::param(format!("thread pool: {e}"))))?;
    let cells = pool
        .install(|| sweep(base, &inst, spec.axis, &spec.values, &seeds))
        .map_err(runtime_err)?;

    let axis = serde_json::to_value(spec.axis)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    let mut table = format!(
        "# config_hash={} seed={}\n",
        config_hash(base, &inst),
        base.seed
    );
    table.push_str("axis,value,seed,final_regret,final_regret_per_log2t,eps_spent,delta_spent\n");
    for cell in &cells {
        let sub = dir.join(format!("{axis}_{}_seed{}", cell.value, cell.seed));
        let s =
            write_run_outputs(&sub, &cell.config, &inst, &cell.result).map_err(Failure::Runtime)?;
        let _ = writeln!(
            table,
            "{axis},{},{},{},{},{},{}",
            cell.value,
            cell.seed,
            s.final_regret,
            s.final_regret_per_log2t,
            s.eps_spent,
            s.delta_spent
        );
    }
    let path = dir.join("sweep.csv");
    std::fs::write(&path, table).map_err(|e| Failure::Runtime(Error::io(&path, e)))?;
    println!("{} cells written to {}", cells.len(), dir.display());
    Ok(())
}

fn mean_band(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, 2.0 * (var / n).sqrt())
}

/// Smallest λ₀ estimate counted as positive.
const LAMBDA_FLOOR: f64 = 1e-9;
const CHECK_BATCHES: usize = 10;

pub fn cmd_check_instance(path: &Path, samples: usize, seed: u64) -> CmdResult {
    let inst = Instance::load(path).map_err(config_err)?;
    let per_batch = (samples / CHECK_BATCHES).max(1000);
    let root = RngStream::new(seed).derive("check");
    println!(
        "{} clients, {} context draws per client",
        inst.num_clients(),
        per_batch * CHECK_BATCHES
    );
    println!(
        "{:>6} {:>22} {:>22}",
        "client", "lambda_min (±2se)", "C0 (±2se)"
    );
    let mut worst_lambda = (f64::INFINITY, 0.0);
    let mut worst_c0 = (0.0f64, 0.0);
    for client in 0..inst.num_clients() {
        let mut lam = Vec::with_capacity(CHECK_BATCHES);
        let mut c0 = Vec::with_capacity(CHECK_BATCHES);
        for b in 0..CHECK_BATCHES {
            let mut rng = root.derive(&format!("client/{client}/batch/{b}"));
            lam.push(
                estimate_min_eig_optimal(&inst, client, per_batch, &mut rng)
                    .map_err(runtime_err)?,
            );
            c0.push(
                estimate_margin_constant(&inst, client, &DEFAULT_EPS_GRID, per_batch, &mut rng)
                    .map_err(runtime_err)?,
            );
        }
        let (l, lb) = mean_band(&lam);
        let (c, cb) = mean_band(&c0);
        println!("{client:>6} {l:>12.5} ± {lb:<8.5} {c:>12.4} ± {cb:<8.4}");
        if l < worst_lambda.0 {
            worst_lambda = (l, lb);
        }
        if c > worst_c0.0 {
            worst_c0 = (c, cb);
        }
    }
    println!(
        "lambda0 estimate {:.5} ± {:.5}, C0 estimate {:.4} ± {:.4}",
        worst_lambda.0, worst_lambda.1, worst_c0.0, worst_c0.1
    );
    if worst_lambda.0 > LAMBDA_FLOOR {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "diversity condition fails: lambda0 estimate {:.3e} is not positive",
            worst_lambda.0
        )))
    }
}

pub fn cmd_dp_audit(mech: AuditMechanism, eps: f64, samples: usize, seed: u64) -> CmdResult {
    if !(eps > 0.0) || samples == 0 {
        return Err(Failure::Config(Error::Config(
            "--eps must be positive and --samples nonzero".into(),
        )));
    }
    let cfg = AuditConfig::new(mech, eps, samples, seed);
    let report = run_dp_audit(&cfg).map_err(runtime_err)?;
    println!(
        "{mech:?}: M = {}, B = {}, r = {}, {} samples per side, {} bins",
        cfg.m, cfg.bound, cfg.r, cfg.samples, cfg.bins
    );
    println!(
        "{:>12} {:>12} {:>9} {:>9} {:>9} {:>9}",
        "lo", "hi", "n_a", "n_b", "|log r|", "slack"
    );
    for b in &report.bins {
        println!(
            "{:>12.5} {:>12.5} {:>9} {:>9} {:>9.4} {:>9.4}",
            b.lo, b.hi, b.count_a, b.count_b, b.log_ratio, b.slack
        );
    }
    let slack = median(&report.bins.iter().map(|b| b.slack).collect::<Vec<_>>());
    println!(
        "max log-ratio {:.4} against eps = {eps} (median slack {slack:.4})",
        report.max_log_ratio
    );
    if report.passed {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(Failure::Check(format!(
            "log-ratio {:.4} exceeds eps + slack in some bin",
            report.max_log_ratio
        )))
    }
}
