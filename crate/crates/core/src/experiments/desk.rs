//! Desk-scale defaults shared by the acceptance checks, the CLI examples
//! and the documentation.

use crate::dynamics::{InitialCondition, Scheme, SolverConfig};
use crate::model::LesModel;
use crate::noise::make_shell_coefficients;
use crate::spectral::GridSpec;

pub const N: usize = 64;
pub const NU: f64 = 0.01;
pub const HORIZON: f64 = 0.25;
pub const DT: f64 = 5e-4;
pub const CS_DELTA: f64 = 0.04;
pub const RECORD_STRIDE: usize = 10;
pub const SHELL: u32 = 2;

pub fn grid() -> GridSpec {
    GridSpec::with_n(N).expect("desk grid is valid")
}

/// Band-4 random field with unit L² norm.
pub fn initial() -> InitialCondition {
    InitialCondition::RandomBand { band: 4, l2_norm: 1.0, seed: 7 }
}

pub fn deterministic() -> SolverConfig {
    let mut cfg = SolverConfig::deterministic(grid(), NU, DT, HORIZON, LesModel::smagorinsky(CS_DELTA));
    cfg.record_stride = RECORD_STRIDE;
    cfg
}

pub fn stochastic(scheme: Scheme, shell: u32) -> SolverConfig {
    let theta = make_shell_coefficients(shell, &grid()).expect("desk shell fits the grid");
    SolverConfig { scheme, noise: Some(theta), ..deterministic() }
}
