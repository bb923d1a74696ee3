use serde::{Deserialize, Serialize};

use crate::model::LesModel;
use crate::noise::NoiseCoefficients;
use crate::spectral::GridSpec;

use super::DynamicsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Euler–Maruyama on the Itô form, with the corrector drift.
    ItoEm,
    /// Heun on the noise of the Stratonovich form, no corrector.
    StratonovichHeun,
    /// Noise-free limit with the Smagorinsky flux.
    Deterministic,
}

impl Scheme {
    pub fn is_stochastic(self) -> bool {
        self != Scheme::Deterministic
    }
}

/// Everything a trajectory needs besides its initial state and driver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub nu: f64,
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub model: LesModel,
    /// Required for the stochastic schemes, absent otherwise.
    pub noise: Option<NoiseCoefficients>,
    /// Record norms every this many steps (and at the final step).
    pub record_stride: usize,
    /// Abort when `‖ω_t‖² > enstrophy_guard · ‖ω₀‖²`.
    pub enstrophy_guard: f64,
    pub keep_snapshots: bool,
    /// Multiplies the diffusive stability bound; larger is more conservative.
    pub stability_safety: f64,
}

pub const DEFAULT_GUARD: f64 = 2.0;

impl SolverConfig {
    pub fn deterministic(grid: GridSpec, nu: f64, dt: f64, horizon: f64, model: LesModel) -> Self {
        Self {
            grid,
            nu,
            dt,
            horizon,
            scheme: Scheme::Deterministic,
            model,
            noise: None,
            record_stride: 1,
            enstrophy_guard: DEFAULT_GUARD,
            keep_snapshots: false,
            stability_safety: 1.0,
        }
    }

    pub fn stochastic(
        grid: GridSpec,
        nu: f64,
        dt: f64,
        horizon: f64,
        scheme: Scheme,
        model: LesModel,
        noise: NoiseCoefficients,
    ) -> Self {
        Self { scheme, noise: Some(noise), ..Self::deterministic(grid, nu, dt, horizon, model) }
    }

    /// The same configuration with a different step, stride scaled to keep
    /// the recorded times.
    pub fn with_dt(&self, dt: f64) -> Self {
        let ratio = (self.dt / dt).round().max(1.0) as usize;
        Self { dt, record_stride: self.record_stride * ratio, ..self.clone() }
    }

    /// The noise-free counterpart on the same grid and step.
    pub fn deterministic_limit(&self) -> Self {
        Self { scheme: Scheme::Deterministic, noise: None, ..self.clone() }
    }

    /// Number of steps to reach the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |key: &'static str, reason: String| Err(DynamicsError::Config { key, reason });
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad("nu", format!("must be positive, got {}", self.nu));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon", format!("must be positive, got {}", self.horizon));
        }
        let steps = self.steps();
        if steps == 0 || (steps as f64 * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return bad("dt", format!("horizon {} is not an integer multiple of dt {}", self.horizon, self.dt));
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be at least 1".into());
        }
        if !(self.enstrophy_guard >= 1.0) {
            return bad("enstrophy_guard", format!("must be at least 1, got {}", self.enstrophy_guard));
        }
        if !(self.stability_safety > 0.0 && self.stability_safety.is_finite()) {
            return bad("stability_safety", format!("must be positive, got {}", self.stability_safety));
        }
        match (&self.noise, self.scheme.is_stochastic()) {
            (None, true) => return bad("noise", "required by the stochastic schemes".into()),
            (Some(_), false) => return bad("noise", "must be absent for the deterministic scheme".into()),
            (Some(theta), true) => {
                theta.validate().map_err(|e| DynamicsError::Config { key: "noise", reason: e.to_string() })?;
                theta.check_grid(&self.grid).map_err(|e| DynamicsError::Config { key: "noise", reason: e.to_string() })?;
            }
            (None, false) => {}
        }
        Ok(())
    }
}
