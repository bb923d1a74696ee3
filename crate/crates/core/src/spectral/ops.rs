use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use super::fft::Plan2;
use super::field::{PhysicalField, PhysicalVector, SpectralField, VelocityField};
use super::grid::{GridSpec, Mode, ModeSet, Pad};
use super::SpectralError;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// How [`Spectral::flux_divergence`] treats its coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    /// Coefficient must be nonnegative (a diffusivity).
    Diffusion,
    /// Any sign accepted.
    General,
}

struct GridPlan {
    plan: Plan2,
    /// Buffer index of `p` and `-p` for every upper mode.
    pos: Vec<usize>,
    neg: Vec<usize>,
}

/// Transform and operator context for one grid. Cheap to share across
/// threads; scratch buffers are allocated per call.
pub struct Spectral {
    basis: Arc<ModeSet>,
    plans: Mutex<HashMap<usize, Arc<GridPlan>>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", self.grid()).finish()
    }
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        Self { basis: Arc::new(ModeSet::new(grid)), plans: Mutex::new(HashMap::new()) }
    }

    pub fn grid(&self) -> &GridSpec {
        self.basis.grid()
    }

    pub fn basis(&self) -> &Arc<ModeSet> {
        &self.basis
    }

    pub fn zeros(&self) -> SpectralField {
        SpectralField::zeros(self.basis.clone())
    }

    pub fn field<I>(&self, modes: I) -> Result<SpectralField, SpectralError>
    where
        I: IntoIterator<Item = (Mode, f64)>,
    {
        SpectralField::from_modes(self.basis.clone(), modes)
    }

    fn band(&self) -> usize {
        self.grid().max_mode()
    }

    fn plan(&self, m: usize) -> Result<Arc<GridPlan>, SpectralError> {
        if m % 2 != 0 || m <= 2 * self.band() {
            return Err(SpectralError::GridMismatch(format!(
                "sample grid {m} cannot resolve cutoff {}",
                self.band()
            )));
        }
        let mut plans = self.plans.lock().expect("plan cache poisoned");
        let entry = plans.entry(m).or_insert_with(|| {
            let plan = Plan2::new(m);
            let (pos, neg) = self
                .basis
                .upper()
                .iter()
                .map(|p| {
                    (plan.wrap(p.l1) * m + plan.wrap(p.l2), plan.wrap(-p.l1) * m + plan.wrap(-p.l2))
                })
                .unzip();
            Arc::new(GridPlan { plan, pos, neg })
        });
        Ok(entry.clone())
    }

    pub(crate) fn check(&self, field: &SpectralField) -> Result<(), SpectralError> {
        if field.grid() != self.grid() {
            return Err(SpectralError::GridMismatch(format!("{:?} vs {:?}", field.grid(), self.grid())));
        }
        Ok(())
    }

    /// Synthesize real fields on an `m × m` grid from upper-half spectra,
    /// two per complex transform.
    pub(crate) fn synth(&self, m: usize, spectra: &[&[Complex64]]) -> Result<Vec<Vec<f64>>, SpectralError> {
        let gp = self.plan(m)?;
        let mut out = Vec::with_capacity(spectra.len());
        for pair in spectra.chunks(2) {
            let mut buf = vec![Complex64::default(); m * m];
            let a = pair[0];
            let zero = vec![Complex64::default(); a.len()];
            let b = pair.get(1).copied().unwrap_or(&zero);
            for i in 0..a.len() {
                buf[gp.pos[i]] = a[i] + I * b[i];
                buf[gp.neg[i]] = a[i].conj() + I * b[i].conj();
            }
            gp.plan.inverse(&mut buf, self.band());
            out.push(buf.iter().map(|z| z.re).collect());
            if pair.len() == 2 {
                out.push(buf.iter().map(|z| z.im).collect());
            }
        }
        Ok(out)
    }

    /// Project real samples on an `m × m` grid onto the retained modes,
    /// returning upper-half spectra; two fields per complex transform.
    pub(crate) fn analyze(&self, m: usize, samples: &[&[f64]]) -> Result<Vec<Vec<Complex64>>, SpectralError> {
        let gp = self.plan(m)?;
        let mut out = Vec::with_capacity(samples.len());
        for pair in samples.chunks(2) {
            for s in pair {
                if s.len() != m * m {
                    return Err(SpectralError::GridMismatch(format!("expected {} samples, got {}", m * m, s.len())));
                }
            }
            let mut buf: Vec<Complex64> = match pair {
                [a, b] => a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect(),
                [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                _ => unreachable!(),
            };
            gp.plan.forward(&mut buf, self.band());
            let n = gp.pos.len();
            let mut first = Vec::with_capacity(n);
            let mut second = Vec::with_capacity(n);
            for i in 0..n {
                let zp = buf[gp.pos[i]];
                let zm = buf[gp.neg[i]].conj();
                first.push((zp + zm) * 0.5);
                second.push((zp - zm) * (-0.5 * I));
            }
            out.push(first);
            if pair.len() == 2 {
                out.push(second);
            }
        }
        Ok(out)
    }

    /// Multiply an upper-half spectrum by `2πi p_axis`.
    pub(crate) fn d_half(&self, half: &[Complex64], axis: usize) -> Vec<Complex64> {
        self.basis
            .upper()
            .iter()
            .zip(half)
            .map(|(p, z)| {
                let k = 2.0 * PI * if axis == 0 { p.l1 } else { p.l2 } as f64;
                z * Complex64::new(0.0, k)
            })
            .collect()
    }

    /// Upper-half spectra of the Biot–Savart velocity `(∂₂ψ, -∂₁ψ)`, `ψ = (-Δ)⁻¹ω`.
    pub(crate) fn velocity_half(&self, half: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut u1 = Vec::with_capacity(half.len());
        let mut u2 = Vec::with_capacity(half.len());
        for (p, z) in self.basis.upper().iter().zip(half) {
            let psi = z / (4.0 * PI * PI * p.norm_sq() as f64);
            u1.push(psi * Complex64::new(0.0, 2.0 * PI * p.l2 as f64));
            u2.push(psi * Complex64::new(0.0, -2.0 * PI * p.l1 as f64));
        }
        (u1, u2)
    }

    /// Spectral divergence of a vector field given by upper-half spectra.
    pub(crate) fn div_half(&self, q1: &[Complex64], q2: &[Complex64]) -> Vec<Complex64> {
        self.basis
            .upper()
            .iter()
            .zip(q1.iter().zip(q2))
            .map(|(p, (a, b))| (a * p.l1 as f64 + b * p.l2 as f64) * Complex64::new(0.0, 2.0 * PI))
            .collect()
    }

    pub(crate) fn from_half(&self, half: &[Complex64]) -> SpectralField {
        SpectralField::from_half_spectrum(self.basis.clone(), half)
    }

    /// Sample count per axis implied by a padding factor.
    pub fn padded_size(&self, pad: Pad) -> Result<usize, SpectralError> {
        pad.apply(self.grid().n())
    }

    /// Evaluate `ω` on the grid implied by `pad`; modes above the cutoff are zero.
    pub fn to_physical(&self, field: &SpectralField, pad: Pad) -> Result<PhysicalField, SpectralError> {
        let m = self.padded_size(pad)?;
        self.to_physical_on(field, m)
    }

    /// Evaluate `ω` on an arbitrary even `m × m` grid with `m > 2·max_mode`.
    pub fn to_physical_on(&self, field: &SpectralField, m: usize) -> Result<PhysicalField, SpectralError> {
        self.check(field)?;
        let half = field.half_spectrum();
        let mut out = self.synth(m, &[&half])?;
        Ok(PhysicalField { m, data: out.pop().expect("one field") })
    }

    /// Galerkin projection of samples taken on the grid implied by `pad`.
    pub fn to_spectral(&self, samples: &PhysicalField, pad: Pad) -> Result<SpectralField, SpectralError> {
        let m = self.padded_size(pad)?;
        if samples.m != m {
            return Err(SpectralError::GridMismatch(format!(
                "samples on {}², padding {} implies {m}²",
                samples.m,
                pad.as_f64()
            )));
        }
        self.to_spectral_on(samples)
    }

    pub fn to_spectral_on(&self, samples: &PhysicalField) -> Result<SpectralField, SpectralError> {
        let mut out = self.analyze(samples.m, &[&samples.data])?;
        Ok(self.from_half(&out.pop().expect("one field")))
    }

    /// `K[ω] = -∇⊥(-Δ)⁻¹ω` with `∇⊥ = (-∂₂, ∂₁)`, so that `curl K[ω] = ω`.
    pub fn biot_savart(&self, omega: &SpectralField) -> Result<VelocityField, SpectralError> {
        self.check(omega)?;
        let psi = self.inverse_laplacian(omega)?;
        Ok(VelocityField { u1: psi.derivative(1), u2: psi.derivative(0).scaled(-1.0) })
    }

    /// Exact spectral gradient sampled on an `m × m` grid.
    pub fn gradient_on(&self, omega: &SpectralField, m: usize) -> Result<PhysicalVector, SpectralError> {
        self.check(omega)?;
        let half = omega.half_spectrum();
        let d1 = self.d_half(&half, 0);
        let d2 = self.d_half(&half, 1);
        let mut out = self.synth(m, &[&d1, &d2])?;
        let c2 = PhysicalField { m, data: out.pop().unwrap() };
        let c1 = PhysicalField { m, data: out.pop().unwrap() };
        Ok(PhysicalVector { c1, c2 })
    }

    /// Gradient on the dealiasing grid.
    pub fn gradient(&self, omega: &SpectralField) -> Result<PhysicalVector, SpectralError> {
        self.gradient_on(omega, self.grid().dealias_size())
    }

    /// `Π(-K[ω]·∇ω)`, alias-free on the dealiasing grid.
    pub fn advection_term(&self, omega: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.advection_term_on(omega, self.grid().dealias_size())
    }

    pub(crate) fn advection_term_on(&self, omega: &SpectralField, m: usize) -> Result<SpectralField, SpectralError> {
        self.check(omega)?;
        let half = omega.half_spectrum();
        let (u1, u2) = self.velocity_half(&half);
        let d1 = self.d_half(&half, 0);
        let d2 = self.d_half(&half, 1);
        let phys = self.synth(m, &[&u1, &u2, &d1, &d2])?;
        let prod: Vec<f64> = (0..m * m).map(|i| -(phys[0][i] * phys[2][i] + phys[1][i] * phys[3][i])).collect();
        let mut out = self.analyze(m, &[&prod])?;
        Ok(self.from_half(&out.pop().unwrap()))
    }

    /// `Π div(a ∇ω)` for a coefficient sampled on its own padded grid.
    pub fn flux_divergence(
        &self,
        a: &PhysicalField,
        omega: &SpectralField,
        kind: FluxKind,
    ) -> Result<SpectralField, SpectralError> {
        self.check(omega)?;
        if kind == FluxKind::Diffusion {
            let min = a.min();
            if min < 0.0 {
                return Err(SpectralError::NegativeDiffusivity(min));
            }
        }
        let m = a.m;
        let grad = self.gradient_on(omega, m)?;
        let q1: Vec<f64> = a.data.iter().zip(&grad.c1.data).map(|(x, g)| x * g).collect();
        let q2: Vec<f64> = a.data.iter().zip(&grad.c2.data).map(|(x, g)| x * g).collect();
        let q = self.analyze(m, &[&q1, &q2])?;
        Ok(self.from_half(&self.div_half(&q[0], &q[1])))
    }

    /// `Π(h∘ω)` with the composition evaluated pointwise on an `m × m` grid.
    pub fn compose_on(
        &self,
        omega: &SpectralField,
        m: usize,
        h: impl Fn(f64) -> f64,
    ) -> Result<SpectralField, SpectralError> {
        let phys = self.to_physical_on(omega, m)?;
        self.to_spectral_on(&phys.map(h))
    }

    /// `(-Δ)⁻¹w`: mode-wise division by `4π²|l|²`.
    pub fn inverse_laplacian(&self, w: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.check(w)?;
        Ok(w.map_symbol(|l| 1.0 / (4.0 * PI * PI * l.norm_sq() as f64)))
    }

    /// `(Σ_l |l|^{2s} c_l²)^{1/2}` with the lattice weight `|l|`.
    pub fn sobolev_norm(&self, omega: &SpectralField, s: f64) -> Result<f64, SpectralError> {
        self.check(omega)?;
        Ok(sobolev_norm(omega, s))
    }
}

/// `(Σ_l |l|^{2s} c_l²)^{1/2}`; lattice weight `|l|`, not `2π|l|`.
pub fn sobolev_norm(omega: &SpectralField, s: f64) -> f64 {
    let basis = omega.basis();
    let c = omega.coeffs();
    let mut acc = 0.0;
    for (i, p) in basis.upper().iter().enumerate() {
        let w = if s == 0.0 { 1.0 } else { (p.norm_sq() as f64).powf(s) };
        acc += w * (c[2 * i] * c[2 * i] + c[2 * i + 1] * c[2 * i + 1]);
    }
    acc.sqrt()
}

/// `‖∇ω‖²` with the physical gradient, i.e. `4π² ‖ω‖²_{H¹}`.
pub fn grad_norm_sq(omega: &SpectralField) -> f64 {
    let h1 = sobolev_norm(omega, 1.0);
    4.0 * PI * PI * h1 * h1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::Cutoff;

    fn ctx(n: usize) -> Spectral {
        Spectral::new(GridSpec::with_n(n).unwrap())
    }

    #[test]
    fn inverse_laplacian_symbol() {
        let s = ctx(16);
        let w = s.field([(Mode::new(1, 1), 1.0)]).unwrap();
        let psi = s.inverse_laplacian(&w).unwrap();
        assert!((psi.coeff(Mode::new(1, 1)) - 1.0 / (8.0 * PI * PI)).abs() < 1e-16);
        let back = psi.laplacian();
        assert!((back.coeff(Mode::new(1, 1)) + 1.0).abs() < 1e-14);
        assert_eq!(s.inverse_laplacian(&s.zeros()).unwrap(), s.zeros());
    }

    #[test]
    fn sobolev_norm_examples() {
        let s = ctx(16);
        assert_eq!(s.sobolev_norm(&s.zeros(), -1.0).unwrap(), 0.0);
        let w = s.field([(Mode::new(1, 0), 3.0)]).unwrap();
        assert!((s.sobolev_norm(&w, -1.0).unwrap() - 3.0).abs() < 1e-15);
        let w = s.field([(Mode::new(2, 0), 1.0)]).unwrap();
        assert!((s.sobolev_norm(&w, 1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn h1_of_psi_equals_hm1_of_w() {
        let s = ctx(16);
        let w = s.field([(Mode::new(1, 2), 0.3), (Mode::new(-3, 1), -1.1), (Mode::new(0, 4), 0.7)]).unwrap();
        let psi = s.inverse_laplacian(&w).unwrap();
        let lhs = 4.0 * PI * PI * s.sobolev_norm(&psi, 1.0).unwrap();
        let rhs = s.sobolev_norm(&w, -1.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-14 * rhs);
    }

    #[test]
    fn pad_grid_mismatch_is_an_error() {
        let s = ctx(16);
        let p = PhysicalField::zeros(20);
        assert!(matches!(s.to_spectral(&p, Pad::THREE_HALVES), Err(SpectralError::GridMismatch(_))));
    }

    #[test]
    fn negative_diffusivity_reported() {
        let s = ctx(16);
        let w = s.field([(Mode::new(1, 0), 1.0)]).unwrap();
        let a = PhysicalField::from_fn(32, |x| x[0] - 0.5);
        assert!(matches!(
            s.flux_divergence(&a, &w, FluxKind::Diffusion),
            Err(SpectralError::NegativeDiffusivity(_))
        ));
        assert!(s.flux_divergence(&a, &w, FluxKind::General).is_ok());
    }

    #[test]
    fn square_cutoff_transforms() {
        let s = Spectral::new(GridSpec::new(16, 5, Pad::THREE_HALVES, Cutoff::Square).unwrap());
        let w = s.field([(Mode::new(5, -5), 1.0), (Mode::new(-2, 3), 0.5)]).unwrap();
        let phys = s.to_physical(&w, Pad::THREE_HALVES).unwrap();
        let back = s.to_spectral(&phys, Pad::THREE_HALVES).unwrap();
        for (a, b) in w.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
