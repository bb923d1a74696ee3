use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{run_trajectory, run_with, SolverConfig, Stepper};
use crate::model::{validate_model, Nonlinearity};
use crate::noise::{covariance_residual, enstrophy_channel, BrownianDriver, NoiseCoefficients};
use crate::spectral::{grad_norm_sq, sobolev_norm, FluxKind, Spectral, SpectralField};

use super::moments::{first_shells, increment_statistic};
use super::uniqueness::omega0_sup;
use super::{parallel_map, ExperimentError};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    /// Stochastic paths for the a-priori bound and increment moments.
    pub paths: usize,
    pub master_seed: u64,
    /// Side of the quadrature grid for the enstrophy channel.
    pub quadrature: usize,
    pub covariance_points: usize,
    /// Coefficients for the covariance and channel checks instead of the configured ones.
    pub theta_override: Option<NoiseCoefficients>,
    /// Sign of the Itô corrector in the a-priori runs; `-1` is a deliberate fault.
    pub corrector_sign: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            paths: 4,
            master_seed: 0,
            quadrature: 2048,
            covariance_points: 256,
            theta_override: None,
            corrector_sign: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), passed: residual <= tolerance, residual, tolerance, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

impl InvariantReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Structural identities of the discretization at `omega0`, plus short
/// trajectories for the a-priori bound and the increment moments.
pub fn invariant_suite(
    cfg: &SolverConfig,
    omega0: &SpectralField,
    opts: &SuiteOptions,
) -> Result<InvariantReport, ExperimentError> {
    cfg.validate()?;
    let spectral = Spectral::new(cfg.grid);
    spectral.check(omega0)?;
    let model = &cfg.model as &dyn Nonlinearity;
    let m = cfg.grid.nonlinear_size();
    let norm = omega0.l2_norm();
    let h1 = sobolev_norm(omega0, 1.0);
    let mut checks = Vec::new();

    let amp = omega0_sup(omega0)?;
    checks.push(match validate_model(model, (-2.0 * amp, 2.0 * amp), 2001) {
        Ok(r) => Check::new("model_bounds", 0.0, 0.0, format!("alpha {}, fitted increment constant {:.3e}", r.alpha, r.g_increment_fitted)),
        Err(v) => Check::new("model_bounds", 1.0, 0.0, v.to_string()),
    });

    let b = spectral.advection_term(omega0)?;
    let tri = relative(b.dot(omega0)?.abs(), b.l2_norm() * norm);
    checks.push(Check::new("trilinear", tri, 1e-10, "|<u.grad w, w>| / (|u.grad w| |w|)".into()));

    let a = spectral.to_physical_on(omega0, m)?.map(|r| model.g_prime(r));
    let flux = spectral.flux_divergence(&a, omega0, FluxKind::Diffusion)?;
    let pairing = flux.dot(omega0)?;
    let scale = a.max_abs() * grad_norm_sq(omega0);
    checks.push(Check::new(
        "flux_dissipativity",
        relative(pairing.max(0.0), scale),
        1e-10,
        format!("<div(g'(w) grad w), w> = {pairing:.6e}"),
    ));

    let theta = opts.theta_override.as_ref().or(cfg.noise.as_ref());
    if let Some(theta) = theta {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.master_seed);
        let points: Vec<[f64; 2]> = (0..opts.covariance_points).map(|_| [rng.gen(), rng.gen()]).collect();
        let res = covariance_residual(theta, &points);
        checks.push(Check::new("covariance", res, 1e-12, format!("{} points, {} modes", points.len(), theta.len())));

        let channel = enstrophy_channel(&spectral, omega0, theta.modes(), model, opts.quadrature)?;
        let worst = channel.iter().fold(0.0f64, |acc, (_, v)| acc.max(v.abs()));
        checks.push(Check::new(
            "enstrophy_channel",
            relative(worst, norm * h1),
            1e-8,
            format!("quadrature {0}x{0}", opts.quadrature),
        ));
    }

    match &cfg.noise {
        Some(noise) => checks.extend(path_checks(cfg, noise, omega0, opts)?),
        None => {
            let rec = run_trajectory(cfg, omega0, None)?;
            let e0 = rec.initial_enstrophy;
            checks.push(Check::new(
                "energy_inequality",
                relative(rec.max_budget_excess.max(0.0), e0),
                1e-6,
                format!("max budget excess {:.3e}", rec.max_budget_excess),
            ));
        }
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(InvariantReport { checks, all_passed })
}

fn path_checks(
    cfg: &SolverConfig,
    theta: &NoiseCoefficients,
    omega0: &SpectralField,
    opts: &SuiteOptions,
) -> Result<Vec<Check>, ExperimentError> {
    let stepper = Stepper::new(cfg.clone())?.with_corrector_sign(opts.corrector_sign);
    let modes = first_shells(2);
    let e0 = omega0.norm_sq();
    let runs = parallel_map(opts.paths, |p| {
        let driver = BrownianDriver::new(opts.master_seed, p as u64, theta);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        run_with(&stepper, omega0, Some(driver), |_, _, w| rows.push(modes.iter().map(|&l| w.coeff(l)).collect()))
            .map(|rec| (rec, rows))
    });
    let mut ratio = 0.0f64;
    let mut excess = 0.0f64;
    let mut failure = None;
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (p, r) in runs.into_iter().enumerate() {
        match r {
            Ok((rec, rows)) => {
                ratio = ratio.max(rec.max_enstrophy_ratio);
                excess = excess.max(rec.max_budget_excess);
                times = rec.times;
                samples.push(rows);
            }
            Err(e) if e.is_numeric() => {
                failure.get_or_insert(format!("path {p}: {e}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let c = if e0 > 0.0 { excess.max(0.0) / (e0 * cfg.dt.sqrt()) } else { 0.0 };
    let apriori = match failure {
        Some(reason) => Check::new("a_priori_bound", f64::INFINITY, cfg.enstrophy_guard, reason),
        None => Check::new(
            "a_priori_bound",
            ratio,
            cfg.enstrophy_guard,
            format!("{} paths, max |w_t|^2/|w_0|^2 {ratio:.4}, budget constant {c:.3e}", opts.paths),
        ),
    };
    let moments = match increment_statistic(&times, &modes, &samples) {
        Some(stat) if stat.value.is_finite() => Check::new(
            "increment_moments",
            stat.value,
            f64::MAX,
            format!("max at mode {} over [{}, {}]", stat.mode, stat.s, stat.t),
        ),
        Some(stat) => Check::new("increment_moments", f64::INFINITY, f64::MAX, format!("non-finite at mode {}", stat.mode)),
        None => Check::new("increment_moments", f64::INFINITY, f64::MAX, "no completed paths".into()),
    };
    Ok(vec![apriori, moments])
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}
