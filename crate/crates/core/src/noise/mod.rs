//! Divergence-free noise basis, coefficient families, Brownian drivers and
//! the transport-noise terms of the stochastic model.

mod brownian;
mod coefficients;
mod transport;

pub use brownian::{counter_normal, BrownianDriver, Increments};
pub use coefficients::{lattice_annulus, make_shell_coefficients, NoiseCoefficients, ShellDescriptor, NORMALIZATION_TOL};
pub use transport::{
    covariance_residual, enstrophy_channel, ito_corrector, laplacian_of_g, sigma_at, sigma_field, transport_increment,
};
pub(crate) use transport::noise_velocity_half;

use thiserror::Error;

use crate::spectral::{Mode, SpectralError};

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("the noise shell is empty")]
    EmptyShell,
    #[error("noise support reaches |k| = {reach}, beyond max_mode {max_mode}")]
    OutsideCutoff { reach: usize, max_mode: usize },
    #[error("theta normalization violated: sum of theta_k^2 is {0}, must equal 1 within 1e-12")]
    Normalization(f64),
    #[error("theta is not radially symmetric: theta at {k} is {theta}, expected {expected}")]
    NotRadial { k: Mode, theta: f64, expected: f64 },
    #[error("theta at {0} is negative ({1})")]
    NegativeTheta(Mode, f64),
    #[error("theta at {0} is not finite")]
    NonFinite(Mode),
    #[error("theta lists {0} twice")]
    Duplicate(Mode),
    #[error("noise support cannot contain the zero mode")]
    ZeroMode,
    #[error("increments cover {found} modes, theta has {expected}")]
    SupportMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
