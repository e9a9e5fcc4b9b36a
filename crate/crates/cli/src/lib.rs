//! Command-line driver: configuration, dispatch and persistence.

pub mod config;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use okms::dynamics::{run_ok, RunOptions};
use okms::harness::{self, check_all, measure, SweepPlan};
use okms::phasefield::{
    diffuse_energy, double_well, layered_profile, optimal_profile, well_prepared_init, InterfaceSpec, SIGMA,
};
use okms::record::{format_f64, RecordKind, RunMetadata};
use okms::sharp::{run_ms, MsOptions};
use okms::{BoxGrid, Grid, RadialGrid, SimParams};

use config::{parse_config, Config, Domain, Experiment};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUN_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "okms", version, about = "Ohta-Kawasaki phase-field runs, sharp-interface runs and their comparison")]
pub struct Cli {
    /// Worker threads for sweeps (default: number of processors).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One diffuse run.
    OkRun {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// One sharp-interface run.
    MsRun {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Paired diffuse/sharp runs over a list of eps.
    Sweep {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// The full acceptance suite.
    CheckAll {
        /// Defaults apply when absent.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Prints the optimal profile and its energy densities.
    Profile {
        /// Interface width.
        #[arg(long)]
        eps: f64,
        /// Table rows.
        #[arg(long, default_value_t = 33)]
        points: usize,
    },
}

/// Failure classes, mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Run(_) => EXIT_RUN_FAILURE,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Run(m) => f.write_str(m),
        }
    }
}

fn run_err(e: impl std::fmt::Display) -> Failure {
    Failure::Run(e.to_string())
}

/// `output_dir` from the config, else `$OKMS_OUT`, else `./okms_out`.
pub fn output_root(cfg: Option<&Config>) -> PathBuf {
    cfg.and_then(|c| c.output_dir.clone())
        .or_else(|| std::env::var_os("OKMS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("okms_out"))
}

fn load(path: &Path, cmd: Experiment) -> Result<Config, Failure> {
    parse_config(path, Some(cmd)).map_err(|e| Failure::Usage(e.to_string()))
}

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        // Fails only if a pool already exists (e.g. repeated calls in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::OkRun { config } => ok_run(&load(&config, Experiment::OkRun)?),
        Command::MsRun { config } => ms_run(&load(&config, Experiment::MsRun)?),
        Command::Sweep { config } => sweep(&load(&config, Experiment::Sweep)?),
        Command::CheckAll { config } => {
            let cfg = match config {
                Some(p) => load(&p, Experiment::CheckAll)?,
                None => config::parse_config_str("", Path::new("<defaults>"), Some(Experiment::CheckAll))
                    .map_err(|e| Failure::Usage(e.to_string()))?,
            };
            run_check_all(&cfg)
        }
        Command::Profile { eps, points } => profile(eps, points),
    }
}

fn diffuse_grid(cfg: &Config) -> Result<Arc<Grid>, Failure> {
    let g = &cfg.geometry;
    let eps = cfg.params.eps;
    let grid: Grid = match g.domain {
        Domain::Radial if g.space_dim == 1 => {
            RadialGrid::slab(((g.nodes_per_eps / eps).ceil() as usize + 1).max(64)).map_err(run_err)?.into()
        }
        Domain::Radial => RadialGrid::resolving(g.space_dim, eps, g.nodes_per_eps).map_err(run_err)?.into(),
        Domain::Interval => BoxGrid::unit_interval((g.nodes_per_eps / eps).ceil() as usize).map_err(run_err)?.into(),
    };
    Ok(Arc::new(grid))
}

fn ok_run(cfg: &Config) -> Result<(), Failure> {
    let params = cfg.sim_params().map_err(|e| Failure::Usage(e.to_string()))?;
    let spec = cfg.interface_spec().map_err(|e| Failure::Usage(e.to_string()))?;
    let grid = diffuse_grid(cfg)?;
    let prepared = well_prepared_init(&spec, params.eps, grid).map_err(|e| Failure::Usage(e.to_string()))?;
    let dir = output_root(Some(cfg)).join("ok-run");
    let opts = RunOptions {
        record_every: cfg.output.record_every,
        keep_fields: false,
        snapshot_every: cfg.output.snapshot_every,
        output_dir: Some(dir.clone()),
        stem: "ok_run".into(),
    };
    let run = run_ok(prepared.field, &params, &opts).map_err(run_err)?;
    let e = &run.record.energy_total;
    eprintln!(
        "ok-run: {} steps, E {:.6} -> {:.6}, max per-step increase {:e}",
        run.final_state.steps(),
        e[0],
        e[e.len() - 1],
        run.monitor.max_increase
    );
    println!("{}", dir.join("ok_run.csv").display());
    Ok(())
}

fn ms_run(cfg: &Config) -> Result<(), Failure> {
    let family = cfg.family().map_err(|e| Failure::Usage(e.to_string()))?;
    let started = std::time::Instant::now();
    let run = run_ms(&family, &MsOptions::new(cfg.params.lambda, cfg.params.t_end)).map_err(run_err)?;
    let dir = output_root(Some(cfg)).join("ms-run");
    let mut meta = RunMetadata::new(
        RecordKind::Sharp,
        serde_json::json!({ "lambda": cfg.params.lambda, "t_end": cfg.params.t_end, "family": family }),
        serde_json::json!({ "kind": "sphere_family" }),
        started.elapsed().as_secs_f64(),
    );
    meta.notes.push(format!("stop: {:?} at t = {}", run.stop, format_f64(run.stop_time)));
    run.record.persist(&dir, "ms_run", &meta).map_err(run_err)?;
    eprintln!("ms-run: {:?} at t = {}", run.stop, run.stop_time);
    println!("{}", dir.join("ms_run.csv").display());
    Ok(())
}

fn sweep(cfg: &Config) -> Result<(), Failure> {
    let plan: SweepPlan = cfg.sweep_plan().map_err(|e| Failure::Usage(e.to_string()))?;
    let root = output_root(Some(cfg));
    let runs = harness::run_sweep(&plan, Some(&root)).map_err(|e| Failure::Usage(e.to_string()))?;
    let ms: Vec<_> = runs
        .into_iter()
        .zip(&plan.eps_list)
        .map(|(r, &eps)| {
            r.and_then(|r| measure(&r))
                .unwrap_or_else(|e| harness::Measurements::failed(eps, plan.lambda, e.to_string()))
        })
        .collect();
    let tol = &cfg.suite.tolerances;
    let checks = vec![
        harness::convergence_check(&ms, tol),
        harness::equipartition_check(&ms),
        harness::holder_check(&ms, tol),
        harness::de_giorgi_check(&ms, tol),
        harness::gibbs_thomson_check(&ms, tol),
        harness::velocity_bound_check(&ms, tol),
        harness::transport_check(&ms, tol),
        harness::deformation_check(&ms, tol),
    ];
    for c in &checks {
        println!("{}", c.summary());
    }
    let report = serde_json::json!({ "plan": plan, "measurements": ms, "checks": checks });
    let path = root.join(&plan.experiment).join("report.json");
    std::fs::create_dir_all(path.parent().expect("has parent")).map_err(run_err)?;
    std::fs::write(&path, serde_json::to_string_pretty(&report).map_err(run_err)?).map_err(run_err)?;
    if ms.iter().any(|m| m.failure.is_some()) {
        return Err(Failure::Run("at least one eps failed; see report.json".into()));
    }
    Ok(())
}

fn run_check_all(cfg: &Config) -> Result<(), Failure> {
    let root = output_root(Some(cfg));
    let report = check_all(&cfg.suite, Some(&root)).map_err(run_err)?;
    for c in &report.checks {
        println!("{}", c.summary());
    }
    println!("report: {}", root.join("report.json").display());
    if report.all_passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Run(format!("failed: {}", failed.join(", "))))
    }
}

fn profile(eps: f64, points: usize) -> Result<(), Failure> {
    let params = SimParams::new(eps, 0.0, 1.0).map_err(|e| Failure::Usage(e.to_string()))?;
    if points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    println!("d_over_eps,u,gradient_density,well_density,discrepancy");
    for i in 0..points {
        let s = -4.0 + 8.0 * i as f64 / (points - 1) as f64;
        let d = s * eps;
        let u = optimal_profile(d, eps);
        let du = (1.0 - u * u) / eps;
        let grad = 0.5 * eps * du * du;
        let well = double_well(u) / eps;
        println!(
            "{},{},{},{},{}",
            format_f64(s),
            format_f64(u),
            format_f64(grad),
            format_f64(well),
            format_f64(grad - well)
        );
    }
    let cells = ((40.0 / eps).ceil() as usize).max(64);
    let grid: Arc<Grid> = Arc::new(BoxGrid::unit_interval(cells).map_err(run_err)?.into());
    let u = layered_profile(grid, &InterfaceSpec::new(vec![0.5], -1.0).map_err(run_err)?, eps);
    let e = diffuse_energy(&u, &params).map_err(run_err)?;
    eprintln!(
        "interval energy with {cells} cells: {} (2 sigma = {})",
        format_f64(e.total),
        format_f64(2.0 * SIGMA)
    );
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}
