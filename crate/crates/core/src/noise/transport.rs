use num_complex::Complex64;

use crate::model::Nonlinearity;
use crate::spectral::{basis_value, FluxKind, Mode, PhysicalField, Spectral, SpectralField, VelocityField};

use super::{Increments, NoiseCoefficients, NoiseError};

/// `σ_k = (k⊥/|k|) e_k` with `k⊥ = (k₂, -k₁)`.
pub fn sigma_field(spectral: &Spectral, k: Mode) -> Result<VelocityField, NoiseError> {
    if k.is_zero() {
        return Err(NoiseError::ZeroMode);
    }
    let dir = direction(k);
    Ok(VelocityField { u1: spectral.field([(k, dir[0])])?, u2: spectral.field([(k, dir[1])])? })
}

/// Pointwise value of `σ_k(x)`.
pub fn sigma_at(k: Mode, x: [f64; 2]) -> [f64; 2] {
    let dir = direction(k);
    let e = basis_value(k, x);
    [dir[0] * e, dir[1] * e]
}

fn direction(k: Mode) -> [f64; 2] {
    let p = k.perp();
    let r = k.norm();
    [p.l1 as f64 / r, p.l2 as f64 / r]
}

/// `max_x max_{ij} |Σ_k θ_k² σ_k(x)⊗σ_k(x) - ½I|` over the given points.
pub fn covariance_residual(theta: &NoiseCoefficients, points: &[[f64; 2]]) -> f64 {
    let mut worst = 0.0f64;
    for &x in points {
        let mut c = [[0.0; 2]; 2];
        for (k, t) in theta.entries() {
            let s = sigma_at(k, x);
            let w = t * t;
            c[0][0] += w * s[0] * s[0];
            c[0][1] += w * s[0] * s[1];
            c[1][1] += w * s[1] * s[1];
        }
        let dev = [(c[0][0] - 0.5).abs(), c[0][1].abs(), (c[1][1] - 0.5).abs()];
        worst = dev.iter().fold(worst, |a, &d| a.max(d));
    }
    worst
}

/// Upper-half spectra of `V = Σ_k θ_k ΔW^k σ_k`.
pub(crate) fn noise_velocity_half(
    spectral: &Spectral,
    theta: &NoiseCoefficients,
    dw: &Increments,
) -> Result<(Vec<Complex64>, Vec<Complex64>), NoiseError> {
    if !dw.matches(theta) {
        return Err(NoiseError::SupportMismatch { expected: theta.len(), found: dw.values().len() });
    }
    let mut u1 = spectral.zeros();
    let mut u2 = spectral.zeros();
    for ((k, t), w) in theta.entries().zip(dw.values()) {
        let a = t * w;
        if a == 0.0 {
            continue;
        }
        let slot = spectral.basis().slot(k).ok_or(NoiseError::OutsideCutoff {
            reach: k.norm().ceil() as usize,
            max_mode: spectral.grid().max_mode(),
        })?;
        let dir = direction(k);
        u1.coeffs_mut()[slot] += a * dir[0];
        u2.coeffs_mut()[slot] += a * dir[1];
    }
    Ok((u1.half_spectrum(), u2.half_spectrum()))
}

/// `Π(-Σ_k θ_k ΔW^k σ_k·∇f(ω))`, evaluated in divergence form
/// `-div(V f(ω))` on the nonlinear grid.
pub fn transport_increment(
    spectral: &Spectral,
    omega: &SpectralField,
    theta: &NoiseCoefficients,
    dw: &Increments,
    model: &dyn Nonlinearity,
) -> Result<SpectralField, NoiseError> {
    spectral.check(omega)?;
    let (v1, v2) = noise_velocity_half(spectral, theta, dw)?;
    if dw.is_zero() {
        return Ok(spectral.zeros());
    }
    let m = spectral.grid().nonlinear_size();
    let half = omega.half_spectrum();
    let phys = spectral.synth(m, &[&half, &v1, &v2])?;
    let mut q1 = Vec::with_capacity(m * m);
    let mut q2 = Vec::with_capacity(m * m);
    for i in 0..m * m {
        let f = model.f(phys[0][i]);
        q1.push(-phys[1][i] * f);
        q2.push(-phys[2][i] * f);
    }
    let q = spectral.analyze(m, &[&q1, &q2])?;
    Ok(spectral.from_half(&spectral.div_half(&q[0], &q[1])))
}

/// `¼ div(f′(ω)² ∇ω)`, the drift separating the Stratonovich and Itô forms.
pub fn ito_corrector(
    spectral: &Spectral,
    omega: &SpectralField,
    model: &dyn Nonlinearity,
) -> Result<SpectralField, NoiseError> {
    let m = spectral.grid().nonlinear_size();
    let a = spectral.to_physical_on(omega, m)?.map(|r| {
        let fp = model.f_prime(r);
        0.25 * fp * fp
    });
    Ok(spectral.flux_divergence(&a, omega, FluxKind::Diffusion)?)
}

/// `Δ Π g(ω)` with `g` composed pointwise on an `m × m` grid.
pub fn laplacian_of_g(
    spectral: &Spectral,
    omega: &SpectralField,
    model: &dyn Nonlinearity,
    m: usize,
) -> Result<SpectralField, NoiseError> {
    Ok(spectral.compose_on(omega, m, |r| model.g(r))?.laplacian())
}

/// `⟨σ_k·∇ω, f(ω)⟩` for each `k`, by trapezoidal quadrature on an `m × m` grid.
///
/// The integrand is `σ_k·∇F(ω)` with `F' = f`, so every value vanishes in the
/// continuum; the returned numbers are the quadrature residuals.
pub fn enstrophy_channel(
    spectral: &Spectral,
    omega: &SpectralField,
    modes: &[Mode],
    model: &dyn Nonlinearity,
    m: usize,
) -> Result<Vec<(Mode, f64)>, NoiseError> {
    let grad = spectral.gradient_on(omega, m)?;
    let w = spectral.to_physical_on(omega, m)?;
    let f: Vec<f64> = w.data.iter().map(|&r| model.f(r)).collect();
    let p1: Vec<f64> = grad.c1.data.iter().zip(&f).map(|(g, f)| g * f).collect();
    let p2: Vec<f64> = grad.c2.data.iter().zip(&f).map(|(g, f)| g * f).collect();
    let p1 = spectral.to_spectral_on(&PhysicalField { m, data: p1 })?;
    let p2 = spectral.to_spectral_on(&PhysicalField { m, data: p2 })?;
    modes
        .iter()
        .map(|&k| {
            if spectral.basis().slot(k).is_none() {
                return Err(NoiseError::OutsideCutoff {
                    reach: k.norm().ceil() as usize,
                    max_mode: spectral.grid().max_mode(),
                });
            }
            let dir = direction(k);
            Ok((k, dir[0] * p1.coeff(k) + dir[1] * p2.coeff(k)))
        })
        .collect()
}
