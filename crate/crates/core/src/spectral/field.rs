use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::{GridSpec, Mode, ModeSet};
use super::SpectralError;

/// Value of the real orthonormal basis function `e_l` at `x`:
/// `√2 cos(2π l·x)` for upper `l`, `√2 sin(2π l·x)` otherwise.
pub fn basis_value(l: Mode, x: [f64; 2]) -> f64 {
    let phase = 2.0 * PI * (l.l1 as f64 * x[0] + l.l2 as f64 * x[1]);
    if l.is_upper() {
        SQRT_2 * phase.cos()
    } else {
        SQRT_2 * phase.sin()
    }
}

/// Zero-mean real scalar field on the unit torus, stored as coefficients
/// `c_l = ⟨ω, e_l⟩` over the retained modes of its grid.
#[derive(Debug, Clone)]
pub struct SpectralField {
    basis: Arc<ModeSet>,
    coeffs: Vec<f64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.grid() == other.grid() && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(basis: Arc<ModeSet>) -> Self {
        let coeffs = vec![0.0; basis.len()];
        Self { basis, coeffs }
    }

    pub fn from_coeffs(basis: Arc<ModeSet>, coeffs: Vec<f64>) -> Result<Self, SpectralError> {
        if coeffs.len() != basis.len() {
            return Err(SpectralError::GridMismatch(format!(
                "expected {} coefficients, got {}",
                basis.len(),
                coeffs.len()
            )));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn from_modes<I>(basis: Arc<ModeSet>, modes: I) -> Result<Self, SpectralError>
    where
        I: IntoIterator<Item = (Mode, f64)>,
    {
        let mut field = Self::zeros(basis);
        for (l, c) in modes {
            field.set(l, c)?;
        }
        Ok(field)
    }

    /// The single basis function `e_l`.
    pub fn unit(basis: Arc<ModeSet>, l: Mode) -> Result<Self, SpectralError> {
        Self::from_modes(basis, [(l, 1.0)])
    }

    pub fn basis(&self) -> &Arc<ModeSet> {
        &self.basis
    }

    pub fn grid(&self) -> &GridSpec {
        self.basis.grid()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `e_l`; zero for modes outside the cutoff.
    pub fn coeff(&self, l: Mode) -> f64 {
        self.basis.slot(l).map_or(0.0, |s| self.coeffs[s])
    }

    pub fn set(&mut self, l: Mode, value: f64) -> Result<(), SpectralError> {
        if l.is_zero() {
            return Err(SpectralError::ZeroMode);
        }
        let slot = self.basis.slot(l).ok_or(SpectralError::OutsideCutoff(l))?;
        self.coeffs[slot] = value;
        Ok(())
    }

    /// Nonzero coefficients, in slot order.
    pub fn nonzero(&self) -> impl Iterator<Item = (Mode, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(s, &c)| (self.basis.mode_at(s), c))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn check_same_grid(&self, other: &Self) -> Result<(), SpectralError> {
        if self.grid() != other.grid() {
            return Err(SpectralError::GridMismatch(format!("{:?} vs {:?}", self.grid(), other.grid())));
        }
        Ok(())
    }

    /// L² inner product (Parseval in the orthonormal basis).
    pub fn dot(&self, other: &Self) -> Result<f64, SpectralError> {
        self.check_same_grid(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<(), SpectralError> {
        self.check_same_grid(other)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn difference(&self, other: &Self) -> Result<Self, SpectralError> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Copy onto another grid, keeping the common modes and dropping the rest.
    pub fn resample(&self, basis: Arc<ModeSet>) -> Self {
        let mut out = Self::zeros(basis);
        for (slot, &c) in self.coeffs.iter().enumerate() {
            if let Some(t) = out.basis.slot(self.basis.mode_at(slot)) {
                out.coeffs[t] = c;
            }
        }
        out
    }

    /// Restriction to the modes retained by `other`'s grid, expressed on that grid.
    pub fn restrict_to(&self, other: &Self) -> Self {
        self.resample(other.basis.clone())
    }

    /// Spectral derivative along axis 0 or 1. Exact on retained modes.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zeros(self.basis.clone());
        for (i, p) in self.basis.upper().iter().enumerate() {
            let k = 2.0 * PI * if axis == 0 { p.l1 } else { p.l2 } as f64;
            let c = self.coeffs[2 * i];
            let s = self.coeffs[2 * i + 1];
            out.coeffs[2 * i] = -k * s;
            out.coeffs[2 * i + 1] = k * c;
        }
        out
    }

    /// Laplacian: mode-wise multiplier `-4π²|l|²`.
    pub fn laplacian(&self) -> Self {
        self.map_symbol(|l| -4.0 * PI * PI * l.norm_sq() as f64)
    }

    /// Multiply every pair `(c_p, c_{-p})` by a real radial-or-not symbol of `p`.
    pub fn map_symbol(&self, symbol: impl Fn(Mode) -> f64) -> Self {
        let mut out = self.clone();
        for (i, &p) in self.basis.upper().iter().enumerate() {
            let s = symbol(p);
            out.coeffs[2 * i] *= s;
            out.coeffs[2 * i + 1] *= s;
        }
        out
    }

    /// Complex exponential coefficients `ŵ_p` over the upper modes.
    pub(crate) fn half_spectrum(&self) -> Vec<Complex64> {
        self.coeffs
            .chunks_exact(2)
            .map(|cs| Complex64::new(cs[0], cs[1]) / SQRT_2)
            .collect()
    }

    pub(crate) fn from_half_spectrum(basis: Arc<ModeSet>, half: &[Complex64]) -> Self {
        let mut coeffs = Vec::with_capacity(2 * half.len());
        for z in half {
            coeffs.push(SQRT_2 * z.re);
            coeffs.push(SQRT_2 * z.im);
        }
        Self { basis, coeffs }
    }
}

/// Divergence-free velocity `(u1, u2)` with each component in the `e_l` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl VelocityField {
    pub fn grid(&self) -> &GridSpec {
        self.u1.grid()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.u1.norm_sq() + self.u2.norm_sq()).sqrt()
    }

    pub fn divergence(&self) -> SpectralField {
        let mut d = self.u1.derivative(0);
        d.axpy(1.0, &self.u2.derivative(1)).expect("components share a grid");
        d
    }

    /// Scalar curl `∂₁u₂ - ∂₂u₁`.
    pub fn curl(&self) -> SpectralField {
        let mut c = self.u2.derivative(0);
        c.axpy(-1.0, &self.u1.derivative(1)).expect("components share a grid");
        c
    }
}

/// Samples of a real field on a uniform `m × m` grid, row-major with
/// index `i1 * m + i2` at `x = (i1 / m, i2 / m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub m: usize,
    pub data: Vec<f64>,
}

impl PhysicalField {
    pub fn zeros(m: usize) -> Self {
        Self { m, data: vec![0.0; m * m] }
    }

    pub fn from_fn(m: usize, f: impl Fn([f64; 2]) -> f64) -> Self {
        let mut data = Vec::with_capacity(m * m);
        for i1 in 0..m {
            for i2 in 0..m {
                data.push(f([i1 as f64 / m as f64, i2 as f64 / m as f64]));
            }
        }
        Self { m, data }
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        [(idx / self.m) as f64 / self.m as f64, (idx % self.m) as f64 / self.m as f64]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { m: self.m, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trapezoidal (equivalently rectangle) rule on the periodic unit square.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn l2_quadrature_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64).sqrt()
    }
}

/// A vector field sampled on a padded grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalVector {
    pub c1: PhysicalField,
    pub c2: PhysicalField,
}
