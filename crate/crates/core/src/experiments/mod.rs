//! Reproducible studies built on the solver: the scaling limit, Itô and
//! Stratonovich consistency, resolution refinement, increment moments and
//! the invariant suite.
//!
//! Path-level work fans out over a rayon pool whose size is capped by
//! `SMAG_THREADS`. Results are collected in path order, so every table is
//! independent of the worker count.

mod consistency;
pub mod desk;
mod invariants;
mod moments;
mod scaling;
mod uniqueness;

pub use consistency::{scheme_consistency_study, ConsistencyRow, ConsistencyTable};
pub use invariants::{invariant_suite, Check, InvariantReport, SuiteOptions};
pub use moments::{collect_mode_paths, first_shells, increment_statistic, IncrementStat};
pub use scaling::{scaling_study, ConvergenceRow, ConvergenceTable, RowStatus, ScalingStudySpec};
pub use uniqueness::{uniqueness_probe, PairDistance, UniquenessTable};

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::noise::NoiseError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl ExperimentError {
    pub fn is_numeric(&self) -> bool {
        matches!(self, ExperimentError::Dynamics(e) if e.is_numeric())
    }
}

fn invalid<T>(key: &'static str, reason: impl Into<String>) -> Result<T, ExperimentError> {
    Err(ExperimentError::Invalid { key, reason: reason.into() })
}

/// Worker count: `SMAG_THREADS` if set to a positive integer, otherwise
/// the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("SMAG_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// `f(0), …, f(count-1)` evaluated on the worker pool, in index order.
pub(crate) fn parallel_map<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .expect("failed to build worker pool");
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

/// Sample mean and (n-1)-normalized standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests;
