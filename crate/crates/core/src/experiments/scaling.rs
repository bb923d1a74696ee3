use std::time::Instant;

use serde::Serialize;

use crate::dynamics::{run_with, SolverConfig, Stepper};
use crate::noise::{make_shell_coefficients, BrownianDriver};
use crate::spectral::{sobolev_norm, SpectralField};

use super::{invalid, mean_std, parallel_map, ExperimentError};

/// Ensemble distances of the scaled stochastic system to its deterministic limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudySpec {
    /// Stochastic template; its noise is replaced by the annulus family of each shell.
    pub base: SolverConfig,
    pub shells: Vec<u32>,
    pub paths_per_shell: usize,
    /// Sobolev index δ of the `C([0,T]; H^{-δ})` and `L²(0,T; H^{1-δ})` distances.
    pub delta: f64,
    /// Deterministic reference; defaults to the noise-free version of `base`.
    pub reference: Option<SolverConfig>,
    pub master_seed: u64,
    /// Also run the reference at `dt/2` and report the distance.
    pub self_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Aborted { path: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub linf_theta: f64,
    /// Ensemble mean of `sup_t ‖ω^N_t - ω̄_t‖_{H^{-δ}}`.
    pub mean_dist_hm: f64,
    /// Ensemble standard deviation of the same.
    pub std_dist: f64,
    /// Ensemble mean of `(∫₀ᵀ ‖ω^N - ω̄‖²_{H^{1-δ}} dt)^{1/2}`.
    pub mean_dist_l2h: f64,
    pub paths: usize,
    pub seconds: f64,
    pub status: RowStatus,
    /// Per-path sup distances, in path order.
    pub per_path: Vec<f64>,
}

impl ConvergenceRow {
    pub fn standard_error(&self) -> f64 {
        self.std_dist / (self.per_path.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub delta: f64,
    pub record_stride: usize,
    pub master_seed: u64,
    /// `sup_t ‖ω̄^{dt} - ω̄^{dt/2}‖_{H^{-δ}}` when requested.
    pub reference_self_check: Option<f64>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Smallest ensemble standard error over completed rows.
    pub fn noise_floor(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.status == RowStatus::Ok && r.paths > 1)
            .map(ConvergenceRow::standard_error)
            .reduce(f64::min)
    }

    /// Whether the reference self-check sits below the ensemble noise floor.
    pub fn reference_converged(&self) -> Option<bool> {
        Some(self.reference_self_check? <= self.noise_floor()?)
    }
}

impl ScalingStudySpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.shells.is_empty() {
            return invalid("shells", "at least one shell is required");
        }
        if self.shells.windows(2).any(|w| w[0] >= w[1]) || self.shells[0] == 0 {
            return invalid("shells", "must be positive and strictly increasing");
        }
        if self.paths_per_shell == 0 {
            return invalid("paths_per_shell", "must be at least 1");
        }
        if !(self.delta > 0.0 && self.delta <= 2.0) {
            return invalid("delta", format!("must lie in (0, 2], got {}", self.delta));
        }
        if !self.base.scheme.is_stochastic() {
            return invalid("base", "the scaled system needs a stochastic scheme");
        }
        let reference = self.reference();
        if reference.scheme.is_stochastic() {
            return invalid("reference", "must be deterministic");
        }
        let interval = |c: &SolverConfig| c.dt * c.record_stride as f64;
        if reference.grid != self.base.grid
            || (reference.horizon - self.base.horizon).abs() > 1e-12
            || (interval(&reference) - interval(&self.base)).abs() > 1e-12 * interval(&self.base)
        {
            return invalid("reference", "must share grid, horizon and recording interval with base");
        }
        reference.validate()?;
        Ok(())
    }

    pub fn reference(&self) -> SolverConfig {
        self.reference.clone().unwrap_or_else(|| self.base.deterministic_limit())
    }
}

fn record_reference(cfg: &SolverConfig, omega0: &SpectralField) -> Result<Vec<SpectralField>, ExperimentError> {
    let stepper = Stepper::new(cfg.clone())?;
    let mut out = Vec::new();
    run_with(&stepper, omega0, None, |_, _, w| out.push(w.clone()))?;
    Ok(out)
}

fn sup_distance(a: &[SpectralField], b: &[SpectralField], s: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| sobolev_norm(&x.difference(y).expect("same grid"), s)).fold(0.0, f64::max)
}

/// One deterministic reference, then for each shell an ensemble of
/// independent stochastic paths measured against it at the recorded times.
pub fn scaling_study(spec: &ScalingStudySpec, omega0: &SpectralField) -> Result<ConvergenceTable, ExperimentError> {
    spec.validate()?;
    let reference_cfg = spec.reference();
    let reference = record_reference(&reference_cfg, omega0)?;
    let reference_self_check = if spec.self_check {
        let half = record_reference(&reference_cfg.with_dt(reference_cfg.dt / 2.0), omega0)?;
        Some(sup_distance(&reference, &half, -spec.delta))
    } else {
        None
    };
    let interval = spec.base.dt * spec.base.record_stride as f64;
    let mut rows = Vec::with_capacity(spec.shells.len());
    for &n in &spec.shells {
        let theta = make_shell_coefficients(n, &spec.base.grid)?;
        let cfg = SolverConfig { noise: Some(theta.clone()), ..spec.base.clone() };
        let stepper = Stepper::new(cfg)?;
        let start = Instant::now();
        let results = parallel_map(spec.paths_per_shell, |p| {
            let driver = BrownianDriver::new(spec.master_seed, p as u64, &theta);
            let mut sup = 0.0f64;
            let mut sq = Vec::with_capacity(reference.len());
            let mut i = 0;
            run_with(&stepper, omega0, Some(driver), |_, _, w| {
                let d = w.difference(&reference[i]).expect("same grid");
                sup = sup.max(sobolev_norm(&d, -spec.delta));
                sq.push(sobolev_norm(&d, 1.0 - spec.delta).powi(2));
                i += 1;
            })
            .map(|_| (sup, trapezoid(&sq, interval).sqrt()))
        });
        let seconds = start.elapsed().as_secs_f64();
        let failure = results.iter().enumerate().find_map(|(p, r)| r.as_ref().err().map(|e| (p, e.to_string())));
        let row = match failure {
            Some((path, reason)) => ConvergenceRow {
                n,
                linf_theta: theta.linf(),
                mean_dist_hm: f64::NAN,
                std_dist: f64::NAN,
                mean_dist_l2h: f64::NAN,
                paths: spec.paths_per_shell,
                seconds,
                status: RowStatus::Aborted { path, reason },
                per_path: Vec::new(),
            },
            None => {
                let (sups, l2s): (Vec<f64>, Vec<f64>) = results.into_iter().map(|r| r.expect("checked")).unzip();
                let (mean, std) = mean_std(&sups);
                ConvergenceRow {
                    n,
                    linf_theta: theta.linf(),
                    mean_dist_hm: mean,
                    std_dist: std,
                    mean_dist_l2h: mean_std(&l2s).0,
                    paths: spec.paths_per_shell,
                    seconds,
                    status: RowStatus::Ok,
                    per_path: sups,
                }
            }
        };
        rows.push(row);
    }
    Ok(ConvergenceTable {
        delta: spec.delta,
        record_stride: spec.base.record_stride,
        master_seed: spec.master_seed,
        reference_self_check,
        rows,
    })
}

/// Trapezoidal rule over equally spaced samples; the last interval may be
/// shorter when the horizon is not a multiple of the recording interval,
/// which the callers exclude.
fn trapezoid(ys: &[f64], h: f64) -> f64 {
    if ys.len() < 2 {
        return 0.0;
    }
    h * (ys.iter().sum::<f64>() - 0.5 * (ys[0] + ys[ys.len() - 1]))
}
