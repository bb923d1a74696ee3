//! The `smag` command line.
//!
//! Exit codes: 0 success, 1 validation error, 2 numeric abort or failed
//! check, 3 I/O failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::dynamics::{run_with, DynamicsError, PathSeed, RunRecord, SolverConfig, Stepper};
use crate::experiments::{
    invariant_suite, scaling_study, scheme_consistency_study, ExperimentError, RowStatus, SuiteOptions,
};
use crate::io::{
    emit_report, encode_snapshot, load_config, read_snapshot, resolve_initial, Format, IoError, OutputDir,
    ParsedConfig, Report, RunSpec,
};
use crate::noise::{make_shell_coefficients, BrownianDriver};
use crate::spectral::{sobolev_norm, Spectral, SpectralField};

#[derive(Debug, Parser)]
#[command(name = "smag", version, about = "Transport-noise vorticity solver and its Smagorinsky limit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one stochastic path.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Path index within the seed's family.
        #[arg(long, default_value_t = 0)]
        path: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the noise-free Smagorinsky limit of a config.
    Deterministic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scaling study.
    Scaling {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `paths_per_shell`.
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the Itô and Stratonovich schemes on shared Brownian paths.
    Consistency {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant suite; exit code 0 iff every check passes.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        paths: usize,
        /// Side of the quadrature grid for the enstrophy channel.
        #[arg(long, default_value_t = 2048)]
        quadrature: usize,
    },
    /// Print norms and leading modes of a snapshot.
    Show {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self { code: if e.is_validation() { 1 } else { 3 }, message: e.to_string() }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        Self { code: if e.is_numeric() { 2 } else { 1 }, message: e.to_string() }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        Self { code: if e.is_numeric() { 2 } else { 1 }, message: e.to_string() }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Simulate { config, seed, path, out } => simulate(&config, seed, path, &out),
        Command::Deterministic { config, out } => deterministic(&config, &out),
        Command::Scaling { config, paths, out } => scaling(&config, paths, &out),
        Command::Consistency { config, paths, out } => consistency(&config, paths, &out),
        Command::Verify { config, paths, quadrature } => verify(&config, paths, quadrature),
        Command::Show { snapshot, top } => show(&snapshot, top),
    }
}

fn load_run(path: &Path) -> Result<(ParsedConfig, RunSpec, PathBuf), CliError> {
    let (parsed, dir) = load_config(path)?;
    match &parsed {
        ParsedConfig::Run(r) => {
            let run = r.clone();
            Ok((parsed, run, dir))
        }
        ParsedConfig::Scaling(_) => Err(CliError::validation(format!(
            "{}: expected a single-run config, found a scaling study",
            path.display()
        ))),
    }
}

fn initial_state(run: &RunSpec, cfg: &SolverConfig, dir: &Path) -> Result<(Arc<Spectral>, SpectralField), CliError> {
    let spectral = Arc::new(Spectral::new(cfg.grid));
    let w0 = resolve_initial(&run.initial, &spectral, dir)?;
    Ok((spectral, w0))
}

/// Run one trajectory, streaming snapshots to `out` when the config asks for them.
fn trajectory(
    spectral: Arc<Spectral>,
    cfg: &SolverConfig,
    w0: &SpectralField,
    driver: Option<BrownianDriver>,
    out: &mut OutputDir,
) -> Result<RunRecord, CliError> {
    let keep = cfg.keep_snapshots;
    let stepper = Stepper::with_spectral(spectral, SolverConfig { keep_snapshots: false, ..cfg.clone() })?;
    let mut snaps = Vec::new();
    let rec = run_with(&stepper, w0, driver, |step, _, w| {
        if keep {
            snaps.push((step, encode_snapshot(w)));
        }
    })?;
    for (step, bytes) in snaps {
        out.write(&format!("snapshots/step_{step:08}.w2ds"), &bytes)?;
    }
    Ok(rec)
}

fn write_record(out: &mut OutputDir, w0: &SpectralField, rec: &RunRecord) -> Result<(), CliError> {
    out.write("initial.w2ds", &encode_snapshot(w0))?;
    out.write("final.w2ds", &encode_snapshot(&rec.final_state))?;
    emit_report(out, Report::Record(rec), Format::Csv)?;
    emit_report(out, Report::Record(rec), Format::Plotdata)?;
    Ok(())
}

fn summary(rec: &RunRecord) {
    let last = rec.l2_norms.len() - 1;
    println!(
        "t = {}  |w| = {:.6e}  |w|_H1 = {:.6e}  budget excess = {:.3e}",
        rec.times[last], rec.l2_norms[last], rec.h1_seminorms[last], rec.max_budget_excess
    );
}

fn simulate(config: &Path, seed: u64, path: u64, out_dir: &Path) -> Result<i32, CliError> {
    let (mut parsed, run, dir) = load_run(config)?;
    let cfg = &run.solver;
    let Some(theta) = cfg.noise.as_ref() else {
        return Err(CliError::validation("simulate needs a stochastic scheme; use `deterministic` instead"));
    };
    if let ParsedConfig::Run(r) = &mut parsed {
        r.master_seed = seed;
    }
    let (spectral, w0) = initial_state(&run, cfg, &dir)?;
    let driver = BrownianDriver::new(seed, path, theta);
    let path_seed = PathSeed::from(&driver);
    let mut out = OutputDir::create(out_dir)?;
    let rec = trajectory(spectral, cfg, &w0, Some(driver), &mut out)?;
    write_record(&mut out, &w0, &rec)?;
    out.finish("simulate", parsed.to_value(), seed, vec![path_seed])?;
    summary(&rec);
    Ok(0)
}

fn deterministic(config: &Path, out_dir: &Path) -> Result<i32, CliError> {
    let (parsed, dir) = load_config(config)?;
    let (cfg, initial) = match &parsed {
        ParsedConfig::Run(r) => (r.solver.deterministic_limit(), r.initial.clone()),
        ParsedConfig::Scaling(s) => (s.study.reference(), s.initial.clone()),
    };
    let spectral = Arc::new(Spectral::new(cfg.grid));
    let w0 = resolve_initial(&initial, &spectral, &dir)?;
    let mut out = OutputDir::create(out_dir)?;
    let rec = trajectory(spectral, &cfg, &w0, None, &mut out)?;
    write_record(&mut out, &w0, &rec)?;
    out.finish("deterministic", parsed.to_value(), parsed.master_seed(), vec![])?;
    summary(&rec);
    Ok(0)
}

fn scaling(config: &Path, paths: Option<usize>, out_dir: &Path) -> Result<i32, CliError> {
    let (mut parsed, dir) = load_config(config)?;
    let ParsedConfig::Scaling(sc) = &mut parsed else {
        return Err(CliError::validation(format!("{}: expected a scaling study (a `shells` key)", config.display())));
    };
    if let Some(p) = paths {
        sc.study.paths_per_shell = p;
    }
    let spectral = Spectral::new(sc.study.base.grid);
    let w0 = resolve_initial(&sc.initial, &spectral, &dir)?;
    let table = scaling_study(&sc.study, &w0)?;
    let seeds = (0..sc.study.paths_per_shell as u64)
        .map(|p| PathSeed { master_seed: sc.study.master_seed, path_index: p, refinement: 1 })
        .collect();
    let mut out = OutputDir::create(out_dir)?;
    emit_report(&mut out, Report::Convergence(&table), Format::Csv)?;
    emit_report(&mut out, Report::Convergence(&table), Format::Plotdata)?;
    out.write("table.json", serde_json::to_string_pretty(&table).expect("tables serialize").as_bytes())?;
    let seed = sc.study.master_seed;
    out.finish("scaling", parsed.to_value(), seed, seeds)?;
    println!("{:>4} {:>12} {:>14} {:>12} {:>14} {:>6}", "N", "linf_theta", "mean_dist_Hm1", "std_dist", "mean_L2H1m", "paths");
    let mut aborted = false;
    for r in &table.rows {
        println!(
            "{:>4} {:>12.4e} {:>14.6e} {:>12.4e} {:>14.6e} {:>6}",
            r.n, r.linf_theta, r.mean_dist_hm, r.std_dist, r.mean_dist_l2h, r.paths
        );
        if let RowStatus::Aborted { path, reason } = &r.status {
            eprintln!("shell {} aborted at path {path}: {reason}", r.n);
            aborted = true;
        }
    }
    if let Some(check) = table.reference_self_check {
        println!("reference self-check (dt vs dt/2): {check:.3e}, converged: {:?}", table.reference_converged());
    }
    Ok(if aborted { 2 } else { 0 })
}

fn consistency(config: &Path, paths: Option<usize>, out_dir: &Path) -> Result<i32, CliError> {
    let (parsed, run, dir) = load_run(config)?;
    let cfg = &run.solver;
    if cfg.noise.is_none() {
        return Err(CliError::validation("the consistency study needs noise coefficients"));
    }
    let (dts, default_paths) = match &run.consistency {
        Some(c) => (c.dts.clone(), c.paths),
        None => (vec![cfg.dt, cfg.dt / 2.0, cfg.dt / 4.0], 8),
    };
    let (_, w0) = initial_state(&run, cfg, &dir)?;
    let paths = paths.unwrap_or(default_paths);
    let table = scheme_consistency_study(cfg, &w0, &dts, paths, run.master_seed)?;
    let finest = dts.iter().copied().fold(f64::INFINITY, f64::min);
    let seeds = dts
        .iter()
        .flat_map(|dt| {
            let r = (dt / finest).round() as u32;
            (0..paths as u64).map(move |p| PathSeed { master_seed: run.master_seed, path_index: p, refinement: r })
        })
        .collect();
    let mut out = OutputDir::create(out_dir)?;
    emit_report(&mut out, Report::Consistency(&table), Format::Csv)?;
    emit_report(&mut out, Report::Consistency(&table), Format::Plotdata)?;
    out.write("consistency.json", serde_json::to_string_pretty(&table).expect("tables serialize").as_bytes())?;
    out.finish("consistency", parsed.to_value(), run.master_seed, seeds)?;
    for r in &table.rows {
        println!("dt = {:.3e}  mean sup = {:.6e}  std = {:.3e}", r.dt, r.mean_sup, r.std_sup);
    }
    println!("order = {:?}, monotone = {}", table.order, table.is_monotone());
    Ok(0)
}

fn verify(config: &Path, paths: usize, quadrature: usize) -> Result<i32, CliError> {
    let (parsed, dir) = load_config(config)?;
    let (cfg, initial, seed) = match &parsed {
        ParsedConfig::Run(r) => (r.solver.clone(), r.initial.clone(), r.master_seed),
        ParsedConfig::Scaling(s) => {
            let theta = make_shell_coefficients(s.study.shells[0], &s.study.base.grid)
                .map_err(|e| CliError::validation(e.to_string()))?;
            (SolverConfig { noise: Some(theta), ..s.study.base.clone() }, s.initial.clone(), s.study.master_seed)
        }
    };
    let spectral = Spectral::new(cfg.grid);
    let w0 = resolve_initial(&initial, &spectral, &dir)?;
    let opts = SuiteOptions { paths, master_seed: seed, quadrature, ..SuiteOptions::default() };
    let report = invariant_suite(&cfg, &w0, &opts)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    Ok(if report.all_passed { 0 } else { 2 })
}

fn show(path: &Path, top: usize) -> Result<i32, CliError> {
    let w = read_snapshot(path)?;
    let g = w.grid();
    println!("grid n = {}, max_mode = {}, nonzero coefficients = {}", g.n(), g.max_mode(), w.nonzero().count());
    println!("|w|_L2 = {:.16e}", w.l2_norm());
    println!("|w|_H1 = {:.16e}", sobolev_norm(&w, 1.0));
    println!("|w|_H-1 = {:.16e}", sobolev_norm(&w, -1.0));
    let mut modes: Vec<_> = w.nonzero().collect();
    modes.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    for (l, c) in modes.into_iter().take(top) {
        println!("{:>6} {:>6} {:>24.16e}", l.l1, l.l2, c);
    }
    Ok(0)
}
