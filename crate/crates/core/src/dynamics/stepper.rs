use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::model::Nonlinearity;
use crate::noise::{noise_velocity_half, Increments};
use crate::spectral::{Spectral, SpectralField};

use super::{DynamicsError, Scheme, SolverConfig, StabilityBound};

/// Result of one step: the new state and the enstrophy removed by the
/// viscous factor, `2ν∫‖∇ω‖²` over the step along the exact heat flow.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub omega: SpectralField,
    pub dissipated: f64,
}

/// Owns the per-grid precomputation for one configuration. Immutable, so
/// a single instance can drive many paths concurrently.
#[derive(Debug)]
pub struct Stepper {
    spectral: Arc<Spectral>,
    cfg: SolverConfig,
    m: usize,
    decay: Vec<f64>,
    loss: Vec<f64>,
    corrector_sign: f64,
}

impl Stepper {
    pub fn new(cfg: SolverConfig) -> Result<Self, DynamicsError> {
        Self::with_spectral(Arc::new(Spectral::new(cfg.grid)), cfg)
    }

    pub fn with_spectral(spectral: Arc<Spectral>, cfg: SolverConfig) -> Result<Self, DynamicsError> {
        cfg.validate()?;
        if *spectral.grid() != cfg.grid {
            return Err(DynamicsError::Config { key: "grid", reason: "spectral context built for another grid".into() });
        }
        let mut decay = Vec::with_capacity(spectral.basis().len());
        let mut loss = Vec::with_capacity(decay.capacity());
        for l in spectral.basis().modes() {
            let x = 4.0 * PI * PI * cfg.nu * l.norm_sq() as f64 * cfg.dt;
            decay.push((-x).exp());
            loss.push(-(-2.0 * x).exp_m1());
        }
        let m = cfg.grid.nonlinear_size();
        Ok(Self { spectral, cfg, m, decay, loss, corrector_sign: 1.0 })
    }

    /// Flip or scale the Itô corrector; only for constructing faulty
    /// schemes in tests of the diagnostics.
    #[doc(hidden)]
    pub fn with_corrector_sign(mut self, sign: f64) -> Self {
        self.corrector_sign = sign;
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn spectral(&self) -> &Arc<Spectral> {
        &self.spectral
    }

    /// Step with the configured scheme.
    pub fn step(&self, omega: &SpectralField, dw: Option<&Increments>) -> Result<StepOutcome, DynamicsError> {
        match (self.cfg.scheme, dw) {
            (Scheme::Deterministic, _) => self.step_deterministic(omega),
            (Scheme::ItoEm, Some(dw)) => self.step_ito(omega, dw),
            (Scheme::StratonovichHeun, Some(dw)) => self.step_stratonovich(omega, dw),
            (_, None) => Err(DynamicsError::MissingDriver),
        }
    }

    /// `S_ν(dt)[ω + dt(-u·∇ω + ¼div(f′²∇ω)) - Σθ_kΔW^kσ_k·∇f(ω)]`.
    pub fn step_ito(&self, omega: &SpectralField, dw: &Increments) -> Result<StepOutcome, DynamicsError> {
        self.explicit_step(omega, Some(dw), self.corrector_sign)
    }

    /// `S_ν(dt)[ω + dt(-u·∇ω + div(g′(ω)∇ω))]`.
    pub fn step_deterministic(&self, omega: &SpectralField) -> Result<StepOutcome, DynamicsError> {
        self.explicit_step(omega, None, 1.0)
    }

    /// Heun on the noise: predictor `ω̃ = ω + dt·adv(ω) + N(ω)`, then
    /// `ω⁺ = S_ν(dt)[ω + dt·adv(ω) + ½(N(ω) + N(ω̃))]` with
    /// `N(ω) = -div(V f(ω))`, `V = Σθ_kΔW^kσ_k`.
    pub fn step_stratonovich(&self, omega: &SpectralField, dw: &Increments) -> Result<StepOutcome, DynamicsError> {
        let sp = &self.spectral;
        sp.check(omega)?;
        let theta = self.noise()?;
        let (v1, v2) = noise_velocity_half(sp, theta, dw)?;
        let m = self.m;
        let half = omega.half_spectrum();
        let (u1, u2) = sp.velocity_half(&half);
        let d1 = sp.d_half(&half, 0);
        let d2 = sp.d_half(&half, 1);
        let phys = sp.synth(m, &[&half, &d1, &d2, &u1, &u2, &v1, &v2])?;
        let model = &self.cfg.model;
        let dt = self.cfg.dt;
        let mut q1 = vec![0.0; m * m];
        let mut q2 = vec![0.0; m * m];
        let mut vf1 = vec![0.0; m * m];
        let mut vf2 = vec![0.0; m * m];
        let mut max_u = 0.0f64;
        let mut max_gp = 0.0f64;
        for i in 0..m * m {
            let r = phys[0][i];
            let f = model.f(r);
            let (a1, a2) = (phys[3][i], phys[4][i]);
            max_u = max_u.max(a1.hypot(a2));
            max_gp = max_gp.max(model.g_prime(r));
            vf1[i] = phys[5][i] * f;
            vf2[i] = phys[6][i] * f;
            q1[i] = -dt * a1 * r - vf1[i];
            q2[i] = -dt * a2 * r - vf2[i];
        }
        self.check_stability(max_gp, max_u)?;
        let q = sp.analyze(m, &[&q1, &q2])?;
        let mut pred_half = sp.div_half(&q[0], &q[1]);
        for (p, w) in pred_half.iter_mut().zip(&half) {
            *p += w;
        }
        let pred = sp.synth(m, &[&pred_half])?.pop().expect("one field");
        for i in 0..m * m {
            let f = model.f(pred[i]);
            q1[i] = 0.5 * (vf1[i] - phys[5][i] * f);
            q2[i] = 0.5 * (vf2[i] - phys[6][i] * f);
        }
        let q = sp.analyze(m, &[&q1, &q2])?;
        let corr = sp.div_half(&q[0], &q[1]);
        for (p, c) in pred_half.iter_mut().zip(&corr) {
            *p += c;
        }
        self.finish(&pred_half)
    }

    fn noise(&self) -> Result<&crate::noise::NoiseCoefficients, DynamicsError> {
        self.cfg.noise.as_ref().ok_or(DynamicsError::Config {
            key: "noise",
            reason: "required by the stochastic schemes".into(),
        })
    }

    /// Shared Euler step: everything except the viscous term is written
    /// as one flux `Q` and applied as `ω + div Q`.
    fn explicit_step(
        &self,
        omega: &SpectralField,
        dw: Option<&Increments>,
        diffusion_sign: f64,
    ) -> Result<StepOutcome, DynamicsError> {
        let sp = &self.spectral;
        sp.check(omega)?;
        let m = self.m;
        let half = omega.half_spectrum();
        let (u1, u2) = sp.velocity_half(&half);
        let d1 = sp.d_half(&half, 0);
        let d2 = sp.d_half(&half, 1);
        let noise = match dw {
            Some(dw) => Some(noise_velocity_half(sp, self.noise()?, dw)?),
            None => None,
        };
        let mut spectra: Vec<&[Complex64]> = vec![&half, &d1, &d2, &u1, &u2];
        if let Some((v1, v2)) = &noise {
            spectra.push(v1);
            spectra.push(v2);
        }
        let phys = sp.synth(m, &spectra)?;
        let model = &self.cfg.model;
        let dt = self.cfg.dt;
        let diffuse = !model.is_trivial();
        let mut q1 = vec![0.0; m * m];
        let mut q2 = vec![0.0; m * m];
        let mut max_u = 0.0f64;
        let mut max_gp = 0.0f64;
        for i in 0..m * m {
            let r = phys[0][i];
            let (a1, a2) = (phys[3][i], phys[4][i]);
            max_u = max_u.max(a1.hypot(a2));
            let mut x1 = -a1 * r;
            let mut x2 = -a2 * r;
            if diffuse {
                let gp = model.g_prime(r);
                max_gp = max_gp.max(gp);
                x1 += diffusion_sign * gp * phys[1][i];
                x2 += diffusion_sign * gp * phys[2][i];
            }
            q1[i] = dt * x1;
            q2[i] = dt * x2;
            if noise.is_some() {
                let f = model.f(r);
                q1[i] -= phys[5][i] * f;
                q2[i] -= phys[6][i] * f;
            }
        }
        self.check_stability(max_gp, max_u)?;
        let q = sp.analyze(m, &[&q1, &q2])?;
        let mut next = sp.div_half(&q[0], &q[1]);
        for (p, w) in next.iter_mut().zip(&half) {
            *p += w;
        }
        self.finish(&next)
    }

    /// Apply the exact viscous factor and account the dissipated enstrophy.
    fn finish(&self, half: &[Complex64]) -> Result<StepOutcome, DynamicsError> {
        let mut omega = self.spectral.from_half(half);
        let mut dissipated = 0.0;
        for ((c, d), l) in omega.coeffs_mut().iter_mut().zip(&self.decay).zip(&self.loss) {
            dissipated += *c * *c * l;
            *c *= d;
        }
        if !omega.is_finite() {
            return Err(DynamicsError::NonFinite);
        }
        Ok(StepOutcome { omega, dissipated })
    }

    /// Explicit diffusion `dt·4π²K²·max g′·safety ≤ ½` and advective CFL
    /// `dt·2πK·max|u| ≤ 1`, evaluated on the current state.
    fn check_stability(&self, max_gp: f64, max_u: f64) -> Result<(), DynamicsError> {
        let g = &self.cfg.grid;
        let dt = self.cfg.dt;
        let diff = dt * 4.0 * PI * PI * g.max_norm_sq() as f64 * max_gp * self.cfg.stability_safety;
        if !diff.is_finite() || diff > 0.5 {
            return Err(DynamicsError::Stability { bound: StabilityBound::Diffusion, value: diff, limit: 0.5 });
        }
        let cfl = dt * 2.0 * PI * g.max_mode() as f64 * max_u;
        if !cfl.is_finite() || cfl > 1.0 {
            return Err(DynamicsError::Stability { bound: StabilityBound::Cfl, value: cfl, limit: 1.0 });
        }
        Ok(())
    }
}
