//! The nonlinearity pair driving the large-eddy model: the noise modulation
//! `f` and the induced limit diffusion `g` with `g' = f'² / 4`, `g(0) = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Anything that supplies `f`, `f'`, `g` and `g'`.
///
/// [`validate_model`] accepts any implementation, so test fixtures can
/// override a single function to check that violations are caught.
pub trait Nonlinearity {
    fn f(&self, r: f64) -> f64;
    fn f_prime(&self, r: f64) -> f64;
    fn g(&self, r: f64) -> f64;
    fn g_prime(&self, r: f64) -> f64;
    /// Growth exponent with `|f'(r)| <= A + B|r|^α`.
    fn alpha(&self) -> f64;
    /// `(A, B)` of the growth bound.
    fn growth(&self) -> (f64, f64);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    /// `f(r) = (4/3) C_sΔ |r|^{1/2} r`, giving `g'(r) = (C_sΔ)² |r|`.
    Smagorinsky { cs_delta: f64 },
    /// `f(r) = c |r|^α r`.
    PowerLaw { coef: f64, alpha: f64 },
    /// `f(r) = s r`; `s = 0` makes `f` constant and switches both noise
    /// and limit diffusion off.
    Linear { slope: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{0} must be finite and nonnegative")]
    Negative(&'static str),
    #[error("growth exponent alpha = {0} outside [0, 1]")]
    Alpha(f64),
}

/// Immutable model description. `epsilon_reg > 0` replaces `|r|` by
/// `sqrt(r² + ε²)` inside `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LesModel {
    kind: ModelKind,
    epsilon_reg: f64,
    growth: (f64, f64),
}

impl LesModel {
    pub fn new(kind: ModelKind, epsilon_reg: f64) -> Result<Self, ModelError> {
        let nonneg = |v: f64, name| if v.is_finite() && v >= 0.0 { Ok(()) } else { Err(ModelError::Negative(name)) };
        nonneg(epsilon_reg, "epsilon_reg")?;
        match kind {
            ModelKind::Smagorinsky { cs_delta } => nonneg(cs_delta, "cs_delta")?,
            ModelKind::PowerLaw { coef, alpha } => {
                nonneg(coef, "coef")?;
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(ModelError::Alpha(alpha));
                }
            }
            ModelKind::Linear { slope } => {
                if !slope.is_finite() {
                    return Err(ModelError::Negative("slope"));
                }
            }
        }
        let growth = default_growth(kind, epsilon_reg);
        Ok(Self { kind, epsilon_reg, growth })
    }

    pub fn smagorinsky(cs_delta: f64) -> Self {
        Self::new(ModelKind::Smagorinsky { cs_delta }, 0.0).expect("valid smagorinsky constant")
    }

    pub fn linear(slope: f64) -> Self {
        Self::new(ModelKind::Linear { slope }, 0.0).expect("finite slope")
    }

    /// `f ≡ 0`: no noise and no limit diffusion.
    pub fn constant() -> Self {
        Self::linear(0.0)
    }

    pub fn power_law(coef: f64, alpha: f64) -> Result<Self, ModelError> {
        Self::new(ModelKind::PowerLaw { coef, alpha }, 0.0)
    }

    /// Replace the derived growth constants.
    pub fn with_growth(mut self, a: f64, b: f64) -> Result<Self, ModelError> {
        if !(a.is_finite() && a >= 0.0 && b.is_finite() && b >= 0.0) {
            return Err(ModelError::Negative("growth constants"));
        }
        self.growth = (a, b);
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn epsilon_reg(&self) -> f64 {
        self.epsilon_reg
    }

    /// True when `f` is constant, so the model carries neither noise nor diffusion.
    pub fn is_trivial(&self) -> bool {
        matches!(self.kind, ModelKind::Linear { slope } if slope == 0.0)
            || matches!(self.kind, ModelKind::Smagorinsky { cs_delta } if cs_delta == 0.0)
            || matches!(self.kind, ModelKind::PowerLaw { coef, .. } if coef == 0.0)
    }

    #[inline]
    fn rho(&self, r: f64) -> f64 {
        if self.epsilon_reg == 0.0 {
            r.abs()
        } else {
            r.hypot(self.epsilon_reg)
        }
    }
}

fn default_growth(kind: ModelKind, eps: f64) -> (f64, f64) {
    match kind {
        ModelKind::Smagorinsky { cs_delta } => (2.0 * cs_delta * eps.sqrt(), 2.0 * cs_delta),
        ModelKind::PowerLaw { coef, alpha } => {
            let b = coef * (1.0 + alpha);
            if alpha == 0.0 {
                (0.0, b)
            } else {
                (b * eps.powf(alpha), b)
            }
        }
        ModelKind::Linear { slope } => (slope.abs(), 0.0),
    }
}

impl Nonlinearity for LesModel {
    #[inline]
    fn f(&self, r: f64) -> f64 {
        match self.kind {
            ModelKind::Smagorinsky { cs_delta } => 4.0 / 3.0 * cs_delta * self.rho(r).sqrt() * r,
            ModelKind::PowerLaw { coef, alpha } => coef * self.rho(r).powf(alpha) * r,
            ModelKind::Linear { slope } => slope * r,
        }
    }

    #[inline]
    fn f_prime(&self, r: f64) -> f64 {
        match self.kind {
            ModelKind::Smagorinsky { cs_delta } => {
                if self.epsilon_reg == 0.0 {
                    2.0 * cs_delta * r.abs().sqrt()
                } else {
                    let rho = self.rho(r);
                    4.0 / 3.0 * cs_delta * rho.sqrt() * (1.0 + 0.5 * r * r / (rho * rho))
                }
            }
            ModelKind::PowerLaw { coef, alpha } => {
                if self.epsilon_reg == 0.0 {
                    if r == 0.0 {
                        return if alpha == 0.0 { coef } else { 0.0 };
                    }
                    coef * (1.0 + alpha) * r.abs().powf(alpha)
                } else {
                    let rho = self.rho(r);
                    coef * rho.powf(alpha) * (1.0 + alpha * r * r / (rho * rho))
                }
            }
            ModelKind::Linear { slope } => slope,
        }
    }

    #[inline]
    fn g(&self, r: f64) -> f64 {
        let eps = self.epsilon_reg;
        match self.kind {
            ModelKind::Smagorinsky { cs_delta } => {
                let c2 = cs_delta * cs_delta;
                if eps == 0.0 {
                    0.5 * c2 * r * r.abs()
                } else {
                    // antiderivative of (16/9)(ρ + r²/ρ + r⁴/(4ρ³)) / 4, vanishing at 0
                    let rho = self.rho(r);
                    4.0 / 9.0 * c2 * (9.0 / 8.0 * r * rho - 3.0 / 8.0 * eps * eps * (r / eps).asinh() + eps * eps * r / (4.0 * rho))
                }
            }
            ModelKind::PowerLaw { coef, alpha } => {
                if eps == 0.0 {
                    let a1 = 1.0 + alpha;
                    coef * coef * a1 * a1 * r * r.abs().powf(2.0 * alpha) / (4.0 * (2.0 * alpha + 1.0))
                } else {
                    simpson(|t| 0.25 * self.f_prime(t).powi(2), r)
                }
            }
            ModelKind::Linear { slope } => 0.25 * slope * slope * r,
        }
    }

    #[inline]
    fn g_prime(&self, r: f64) -> f64 {
        match self.kind {
            ModelKind::Smagorinsky { cs_delta } if self.epsilon_reg == 0.0 => cs_delta * cs_delta * r.abs(),
            ModelKind::Linear { slope } => 0.25 * slope * slope,
            _ => {
                let fp = self.f_prime(r);
                0.25 * fp * fp
            }
        }
    }

    fn alpha(&self) -> f64 {
        match self.kind {
            ModelKind::Smagorinsky { .. } => 0.5,
            ModelKind::PowerLaw { alpha, .. } => alpha,
            ModelKind::Linear { .. } => 0.0,
        }
    }

    fn growth(&self) -> (f64, f64) {
        self.growth
    }
}

/// Composite Simpson rule for `∫₀^x h`.
fn simpson(h: impl Fn(f64) -> f64, x: f64) -> f64 {
    const PANELS: usize = 512;
    if x == 0.0 {
        return 0.0;
    }
    let step = x / PANELS as f64;
    let mut acc = h(0.0) + h(x);
    for i in 1..PANELS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * h(i as f64 * step);
    }
    acc * step / 3.0
}

/// Which model bound failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelBound {
    /// `|f'(r)| <= A + B|r|^α`
    FPrimeGrowth,
    /// `|f(r)| <= A' + B'|r|^{α+1}`
    FGrowth,
    /// `g(0) = 0`
    GAtZero,
    /// `g` non-decreasing
    GMonotone,
    /// `|g(y) - g(x)| <= C(|y-x| + |y|y|^{2α} - x|x|^{2α}|)`
    GIncrement,
    /// `g' = f'² / 4`
    GPrimeRelation,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("model bound {bound:?} violated at r = {witness}: {lhs} > {rhs}")]
pub struct ModelViolation {
    pub bound: ModelBound,
    pub witness: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    pub samples: usize,
    pub alpha: f64,
    /// `(A', B')` used for the bound on `f`.
    pub f_growth: (f64, f64),
    /// Constant of the increment bound on `g` derived from `(A, B)`.
    pub g_increment_const: f64,
    /// Smallest constant that makes the increment bound hold on the samples.
    pub g_increment_fitted: f64,
    pub max_g_prime_residual: f64,
}

/// Sweep `samples` equally spaced points of `range` and check every growth,
/// monotonicity and consistency property of the pair `(f, g)`.
pub fn validate_model(
    model: &dyn Nonlinearity,
    range: (f64, f64),
    samples: usize,
) -> Result<ModelReport, ModelViolation> {
    assert!(samples >= 2, "validate_model needs at least two samples");
    let (lo, hi) = range;
    let rs: Vec<f64> = (0..samples).map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64).collect();
    let alpha = model.alpha();
    let (a, b) = model.growth();
    let slack = |rhs: f64| 1e-12 * (1.0 + rhs.abs());
    let fail = |bound, witness, lhs, rhs| Err(ModelViolation { bound, witness, lhs, rhs });

    for &r in &rs {
        let lhs = model.f_prime(r).abs();
        let rhs = a + b * r.abs().powf(alpha);
        if lhs > rhs + slack(rhs) {
            return fail(ModelBound::FPrimeGrowth, r, lhs, rhs);
        }
    }

    let f0 = model.f(0.0).abs();
    let f_growth = (f0 + a, a + b / (alpha + 1.0));
    for &r in &rs {
        let lhs = model.f(r).abs();
        let rhs = f_growth.0 + f_growth.1 * r.abs().powf(alpha + 1.0);
        if lhs > rhs + slack(rhs) {
            return fail(ModelBound::FGrowth, r, lhs, rhs);
        }
    }

    let g0 = model.g(0.0);
    if g0 != 0.0 {
        return fail(ModelBound::GAtZero, 0.0, g0.abs(), 0.0);
    }

    let gs: Vec<f64> = rs.iter().map(|&r| model.g(r)).collect();
    for i in 1..gs.len() {
        if gs[i] < gs[i - 1] - slack(gs[i - 1]) {
            return fail(ModelBound::GMonotone, rs[i], gs[i - 1], gs[i]);
        }
    }

    let mut max_res: f64 = 0.0;
    for &r in &rs {
        let fp = model.f_prime(r);
        let target = 0.25 * fp * fp;
        let res = (model.g_prime(r) - target).abs();
        max_res = max_res.max(res);
        if res > 1e-10 * target.abs().max(1.0) {
            return fail(ModelBound::GPrimeRelation, r, model.g_prime(r), target);
        }
    }

    let c = (0.5 * a * a).max(0.5 * b * b / (2.0 * alpha + 1.0));
    let phis: Vec<f64> = rs.iter().map(|&r| r * r.abs().powf(2.0 * alpha)).collect();
    let mut fitted: f64 = 0.0;
    for i in 0..rs.len() {
        for j in (i + 1)..rs.len() {
            let (x, y) = (rs[i], rs[j]);
            let lhs = (gs[j] - gs[i]).abs();
            let base = (y - x).abs() + (phis[j] - phis[i]).abs();
            if base > 0.0 {
                fitted = fitted.max(lhs / base);
            }
            let rhs = c * base;
            if lhs > rhs + slack(rhs) {
                return fail(ModelBound::GIncrement, y, lhs, rhs);
            }
        }
    }

    Ok(ModelReport {
        samples,
        alpha,
        f_growth,
        g_increment_const: c,
        g_increment_fitted: fitted,
        max_g_prime_residual: max_res,
    })
}
