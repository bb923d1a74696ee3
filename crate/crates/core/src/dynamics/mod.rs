//! Time stepping: Euler–Maruyama for the Itô form, Heun for the
//! Stratonovich form, and the deterministic Smagorinsky limit. The viscous
//! term is integrated exactly; everything else is explicit.

mod config;
mod initial;
mod run;
mod stepper;

pub use config::{Scheme, SolverConfig, DEFAULT_GUARD};
pub use initial::{random_band, InitialCondition, ModeCoeff};
pub use run::{dissipation_rate, run_trajectory, run_with, PathSeed, RunRecord};
pub use stepper::{StepOutcome, Stepper};

use serde::Serialize;
use thiserror::Error;

use crate::noise::NoiseError;
use crate::spectral::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityBound {
    Diffusion,
    Cfl,
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid `{key}`: {reason}")]
    Config { key: &'static str, reason: String },
    #[error("stochastic scheme needs a Brownian driver")]
    MissingDriver,
    #[error("stability bound {bound:?} violated: {value:.4} > {limit}")]
    Stability { bound: StabilityBound, value: f64, limit: f64 },
    #[error("state became non-finite")]
    NonFinite,
    #[error("at t = {time}: {source}")]
    At {
        time: f64,
        #[source]
        source: Box<DynamicsError>,
    },
    #[error("enstrophy guard tripped at t = {time}: ratio {ratio:.4} > {guard}")]
    Guard { time: f64, ratio: f64, guard: f64 },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl DynamicsError {
    fn at(self, time: f64) -> Self {
        match self {
            e @ (DynamicsError::Stability { .. } | DynamicsError::NonFinite) => {
                DynamicsError::At { time, source: Box::new(e) }
            }
            e => e,
        }
    }

    /// True for aborts caused by the numerics rather than the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            DynamicsError::Stability { .. }
                | DynamicsError::NonFinite
                | DynamicsError::At { .. }
                | DynamicsError::Guard { .. }
        )
    }
}
