use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::spectral::{GridSpec, Mode};

use super::NoiseError;

/// Relative tolerance on `Σθ² = 1` and on equality of θ over a circle.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// How a coefficient family was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ShellDescriptor {
    /// Uniform weights on `N ≤ |k| ≤ 2N`.
    Annulus { n: u32 },
    Explicit,
}

/// Finitely supported noise intensities `θ_k ≥ 0`.
///
/// Support is stored in a fixed order that every consumer (drivers,
/// increments, transport) shares.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCoefficients {
    modes: Arc<[Mode]>,
    theta: Vec<f64>,
    shell: ShellDescriptor,
    linf: f64,
}

/// Lattice points with `lo ≤ |k|² ≤ hi`, ordered by `(|k|², l1, l2)`.
pub fn lattice_annulus(lo: i64, hi: i64) -> Vec<Mode> {
    let r = (hi as f64).sqrt().floor() as i32 + 1;
    let mut out = Vec::new();
    for l1 in -r..=r {
        for l2 in -r..=r {
            let k = Mode::new(l1, l2);
            let q = k.norm_sq();
            if q >= lo.max(1) && q <= hi {
                out.push(k);
            }
        }
    }
    out.sort_by_key(|k| (k.norm_sq(), k.l1, k.l2));
    out
}

impl NoiseCoefficients {
    /// Uniform family `θ_k = m^{-1/2}` on the `m` lattice points of `N ≤ |k| ≤ 2N`.
    pub fn annulus(n: u32) -> Result<Self, NoiseError> {
        if n == 0 {
            return Err(NoiseError::EmptyShell);
        }
        let n = n as i64;
        let modes = lattice_annulus(n * n, 4 * n * n);
        let theta = vec![(modes.len() as f64).recip().sqrt(); modes.len()];
        let mut out = Self::from_parts(modes, theta);
        out.shell = ShellDescriptor::Annulus { n: n as u32 };
        Ok(out)
    }

    /// Explicit family, checked for nonnegativity, normalization and radial symmetry.
    pub fn from_entries(entries: impl IntoIterator<Item = (Mode, f64)>) -> Result<Self, NoiseError> {
        let out = Self::from_entries_unchecked(entries)?;
        out.validate()?;
        Ok(out)
    }

    /// Explicit family without the normalization and symmetry checks; for
    /// constructing deliberately invalid fixtures. Zero modes, duplicates
    /// and non-finite weights are still rejected.
    pub fn from_entries_unchecked(entries: impl IntoIterator<Item = (Mode, f64)>) -> Result<Self, NoiseError> {
        let mut map = BTreeMap::new();
        for (k, t) in entries {
            if k.is_zero() {
                return Err(NoiseError::ZeroMode);
            }
            if !t.is_finite() {
                return Err(NoiseError::NonFinite(k));
            }
            if map.insert((k.norm_sq(), k.l1, k.l2), t).is_some() {
                return Err(NoiseError::Duplicate(k));
            }
        }
        let (modes, theta) = map.into_iter().map(|((_, l1, l2), t)| (Mode::new(l1, l2), t)).unzip();
        Ok(Self::from_parts(modes, theta))
    }

    fn from_parts(modes: Vec<Mode>, theta: Vec<f64>) -> Self {
        let linf = theta.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        Self { modes: modes.into(), theta, shell: ShellDescriptor::Explicit, linf }
    }

    /// Checks `θ ≥ 0`, `Σθ² = 1` and `θ_k = θ_l` whenever `|k| = |l|`.
    pub fn validate(&self) -> Result<(), NoiseError> {
        for (&k, &t) in self.modes.iter().zip(&self.theta) {
            if t < 0.0 {
                return Err(NoiseError::NegativeTheta(k, t));
            }
        }
        let sum = self.sum_sq();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(NoiseError::Normalization(sum));
        }
        let mut circles: BTreeMap<i64, Vec<(Mode, f64)>> = BTreeMap::new();
        for (&k, &t) in self.modes.iter().zip(&self.theta) {
            if t != 0.0 {
                circles.entry(k.norm_sq()).or_default().push((k, t));
            }
        }
        for (q, members) in circles {
            let full = lattice_annulus(q, q);
            let t0 = members[0].1;
            for k in full {
                let t = self.theta_at(k);
                if (t - t0).abs() > NORMALIZATION_TOL * t0 {
                    return Err(NoiseError::NotRadial { k, theta: t, expected: t0 });
                }
            }
        }
        Ok(())
    }

    /// Every support point must lie inside the cutoff with `2·max|k| ≤ max_mode`
    /// headroom for the quadratic products the solver forms.
    pub fn check_grid(&self, grid: &GridSpec) -> Result<(), NoiseError> {
        let reach = self.max_norm();
        let needed = match self.shell {
            ShellDescriptor::Annulus { n } => 2 * n as usize,
            ShellDescriptor::Explicit => reach.ceil() as usize,
        };
        if needed > grid.max_mode() || self.modes.iter().any(|&k| !grid.contains(k)) {
            return Err(NoiseError::OutsideCutoff { reach: needed, max_mode: grid.max_mode() });
        }
        Ok(())
    }

    pub fn modes(&self) -> &Arc<[Mode]> {
        &self.modes
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn entries(&self) -> impl Iterator<Item = (Mode, f64)> + '_ {
        self.modes.iter().copied().zip(self.theta.iter().copied())
    }

    pub fn theta_at(&self, k: Mode) -> f64 {
        self.modes.iter().position(|&m| m == k).map_or(0.0, |i| self.theta[i])
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn shell(&self) -> ShellDescriptor {
        self.shell
    }

    /// `‖θ‖_{ℓ∞}`.
    pub fn linf(&self) -> f64 {
        self.linf
    }

    /// `Σθ_k²`, with compensated summation.
    pub fn sum_sq(&self) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for t in &self.theta {
            let x = t * t;
            let s = sum + x;
            comp += if sum.abs() >= x.abs() { (sum - s) + x } else { (x - s) + sum };
            sum = s;
        }
        sum + comp
    }

    /// Largest `|k|` in the support.
    pub fn max_norm(&self) -> f64 {
        self.modes.iter().map(|k| k.norm()).fold(0.0, f64::max)
    }
}

/// Annulus family `N ≤ |k| ≤ 2N`, checked against the grid.
pub fn make_shell_coefficients(n: u32, grid: &GridSpec) -> Result<NoiseCoefficients, NoiseError> {
    let theta = NoiseCoefficients::annulus(n)?;
    theta.check_grid(grid)?;
    Ok(theta)
}
