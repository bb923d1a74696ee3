use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::noise::BrownianDriver;
use crate::spectral::{sobolev_norm, SpectralField};

use super::{DynamicsError, SolverConfig, Stepper};

/// Identifies the Brownian path a run was driven by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSeed {
    pub master_seed: u64,
    pub path_index: u64,
    pub refinement: u32,
}

impl From<&BrownianDriver> for PathSeed {
    fn from(d: &BrownianDriver) -> Self {
        Self { master_seed: d.master_seed(), path_index: d.path_index(), refinement: d.refinement() }
    }
}

/// Norm history of one trajectory.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: SolverConfig,
    pub seed: Option<PathSeed>,
    pub times: Vec<f64>,
    /// `‖ω_t‖`.
    pub l2_norms: Vec<f64>,
    /// `‖ω_t‖_{H¹}` with the lattice weight.
    pub h1_seminorms: Vec<f64>,
    /// Cumulative `2ν∫₀ᵗ‖∇ω‖²` (physical gradient).
    pub dissipation: Vec<f64>,
    /// States at the recorded times, when requested.
    pub snapshots: Vec<SpectralField>,
    pub initial_enstrophy: f64,
    /// `max_t (‖ω_t‖² + 2ν∫₀ᵗ‖∇ω‖² - ‖ω₀‖²)` over every step, not only recorded ones.
    pub max_budget_excess: f64,
    /// `max_t ‖ω_t‖² / ‖ω₀‖²` over every step (0 for a zero initial state).
    pub max_enstrophy_ratio: f64,
    pub final_state: SpectralField,
}

impl RunRecord {
    /// `‖ω_t‖² + 2ν∫₀ᵗ‖∇ω‖² - ‖ω₀‖²` at the recorded times.
    pub fn budget(&self) -> Vec<f64> {
        self.l2_norms
            .iter()
            .zip(&self.dissipation)
            .map(|(n, d)| n * n + d - self.initial_enstrophy)
            .collect()
    }
}

/// Run from `omega0` to the horizon. `driver` is required for the
/// stochastic schemes and ignored otherwise.
pub fn run_trajectory(
    cfg: &SolverConfig,
    omega0: &SpectralField,
    driver: Option<BrownianDriver>,
) -> Result<RunRecord, DynamicsError> {
    let stepper = Stepper::new(cfg.clone())?;
    run_with(&stepper, omega0, driver, |_, _, _| {})
}

/// As [`run_trajectory`] with a shared stepper and an observer called at
/// every recorded time with `(step, t, ω_t)`.
pub fn run_with(
    stepper: &Stepper,
    omega0: &SpectralField,
    mut driver: Option<BrownianDriver>,
    mut observer: impl FnMut(usize, f64, &SpectralField),
) -> Result<RunRecord, DynamicsError> {
    let cfg = stepper.config();
    stepper.spectral().check(omega0)?;
    if cfg.scheme.is_stochastic() && driver.is_none() {
        return Err(DynamicsError::MissingDriver);
    }
    let e0 = omega0.norm_sq();
    let mut rec = RunRecord {
        config: cfg.clone(),
        seed: driver.as_ref().map(PathSeed::from),
        times: Vec::new(),
        l2_norms: Vec::new(),
        h1_seminorms: Vec::new(),
        dissipation: Vec::new(),
        snapshots: Vec::new(),
        initial_enstrophy: e0,
        max_budget_excess: 0.0,
        max_enstrophy_ratio: if e0 > 0.0 { 1.0 } else { 0.0 },
        final_state: omega0.clone(),
    };
    let mut diss = 0.0;
    let record = |rec: &mut RunRecord, step: usize, w: &SpectralField, diss: f64| {
        rec.times.push(step as f64 * cfg.dt);
        rec.l2_norms.push(w.l2_norm());
        rec.h1_seminorms.push(sobolev_norm(w, 1.0));
        rec.dissipation.push(diss);
        if cfg.keep_snapshots {
            rec.snapshots.push(w.clone());
        }
    };
    record(&mut rec, 0, omega0, 0.0);
    observer(0, 0.0, omega0);
    let steps = cfg.steps();
    let mut omega = omega0.clone();
    for step in 1..=steps {
        let t = step as f64 * cfg.dt;
        let dw = driver.as_mut().filter(|_| cfg.scheme.is_stochastic()).map(|d| d.sample_increments(cfg.dt));
        let out = stepper.step(&omega, dw.as_ref()).map_err(|e| e.at(t))?;
        omega = out.omega;
        diss += out.dissipated;
        let e = omega.norm_sq();
        rec.max_budget_excess = rec.max_budget_excess.max(e + diss - e0);
        if e0 > 0.0 {
            rec.max_enstrophy_ratio = rec.max_enstrophy_ratio.max(e / e0);
        }
        if e > cfg.enstrophy_guard * e0 && e > 0.0 {
            return Err(DynamicsError::Guard { time: t, ratio: e / e0, guard: cfg.enstrophy_guard });
        }
        if step % cfg.record_stride == 0 || step == steps {
            record(&mut rec, step, &omega, diss);
            observer(step, t, &omega);
        }
    }
    rec.final_state = omega;
    Ok(rec)
}

/// Physical `2ν‖∇ω‖²` rate, for diagnostics.
pub fn dissipation_rate(nu: f64, omega: &SpectralField) -> f64 {
    let h1 = sobolev_norm(omega, 1.0);
    2.0 * nu * 4.0 * PI * PI * h1 * h1
}
