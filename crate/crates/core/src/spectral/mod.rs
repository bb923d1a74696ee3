//! Spectral representation of zero-mean periodic fields on the unit torus
//! and the operators the vorticity equation needs.

mod fft;
mod field;
mod grid;
mod ops;

pub use field::{basis_value, PhysicalField, PhysicalVector, SpectralField, VelocityField};
pub use grid::{Cutoff, GridSpec, Mode, ModeSet, Pad};
pub use ops::{grad_norm_sq, sobolev_norm, FluxKind, Spectral};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid padding factor {num}/{den}")]
    InvalidPad { num: u32, den: u32 },
    #[error("padding {pad} on {n} points does not give an even integer grid")]
    OddPaddedSize { n: usize, pad: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("the (0, 0) mode is excluded: fields are zero-mean")]
    ZeroMode,
    #[error("mode {0} lies outside the Galerkin cutoff")]
    OutsideCutoff(Mode),
    #[error("diffusion coefficient must be nonnegative, found {0}")]
    NegativeDiffusivity(f64),
}
