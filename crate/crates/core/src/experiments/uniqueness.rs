use serde::Serialize;

use crate::dynamics::{run_with, Scheme, SolverConfig, Stepper};
use crate::model::{validate_model, Nonlinearity};
use crate::spectral::{sobolev_norm, GridSpec, Spectral, SpectralField};

use super::{invalid, parallel_map, ExperimentError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDistance {
    pub coarse: usize,
    pub fine: usize,
    /// `sup_t ‖ω^{coarse}_t - P ω^{fine}_t‖_{H^{-1}}` on the coarse modes.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessTable {
    pub resolutions: Vec<usize>,
    /// Every pair `i < j` of the requested resolutions.
    pub pairs: Vec<PairDistance>,
    /// Distances to the finest resolution shrink as the coarse one grows.
    pub cauchy: bool,
    /// The monotonicity and growth audit of the model passed.
    pub model_monotone: bool,
    pub model_detail: String,
}

impl UniquenessTable {
    pub fn distance(&self, coarse: usize, fine: usize) -> Option<f64> {
        self.pairs.iter().find(|p| p.coarse == coarse && p.fine == fine).map(|p| p.distance)
    }
}

/// Deterministic runs of the same initial state at increasing resolution,
/// compared on their common modes.
pub fn uniqueness_probe(
    cfg: &SolverConfig,
    omega0: &SpectralField,
    resolutions: &[usize],
) -> Result<UniquenessTable, ExperimentError> {
    if resolutions.len() < 2 {
        return invalid("resolutions", "at least two resolutions are required");
    }
    if resolutions.windows(2).any(|w| w[0] > w[1]) {
        return invalid("resolutions", "must be nondecreasing");
    }
    let base = SolverConfig { scheme: Scheme::Deterministic, noise: None, ..cfg.clone() };
    let norm0 = omega0.l2_norm();
    let runs = parallel_map(resolutions.len(), |i| -> Result<Vec<SpectralField>, ExperimentError> {
        let n = resolutions[i];
        let grid = GridSpec::new(n, (n / 2).saturating_sub(1), cfg.grid.dealias_pad(), cfg.grid.cutoff())?;
        let spectral = Spectral::new(grid);
        let w0 = omega0.resample(spectral.basis().clone());
        if (w0.l2_norm() - norm0).abs() > 1e-12 * norm0.max(1.0) {
            return invalid("resolutions", format!("n = {n} does not resolve the initial state"));
        }
        let stepper = Stepper::new(SolverConfig { grid, ..base.clone() })?;
        let mut out = Vec::new();
        run_with(&stepper, &w0, None, |_, _, w| out.push(w.clone()))?;
        Ok(out)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut pairs = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let distance = runs[i]
                .iter()
                .zip(&runs[j])
                .map(|(a, b)| sobolev_norm(&a.difference(&b.restrict_to(a)).expect("same grid"), -1.0))
                .fold(0.0, f64::max);
            pairs.push(PairDistance { coarse: resolutions[i], fine: resolutions[j], distance });
        }
    }
    let last = runs.len() - 1;
    let to_finest: Vec<f64> = pairs.iter().filter(|p| p.fine == resolutions[last]).map(|p| p.distance).collect();
    let cauchy = to_finest
        .windows(2)
        .zip(resolutions.windows(2))
        .all(|(d, r)| r[0] == r[1] || d[1] < d[0]);
    let amp = omega0_sup(omega0)?;
    let (model_monotone, model_detail) =
        match validate_model(&cfg.model as &dyn Nonlinearity, (-2.0 * amp, 2.0 * amp), 2001) {
            Ok(report) => (true, format!("{report:?}")),
            Err(v) => (false, v.to_string()),
        };
    Ok(UniquenessTable { resolutions: resolutions.to_vec(), pairs, cauchy, model_monotone, model_detail })
}

/// Sup of the initial state on its physical grid, at least 1.
pub(crate) fn omega0_sup(omega0: &SpectralField) -> Result<f64, ExperimentError> {
    let spectral = Spectral::new(*omega0.grid());
    let phys = spectral.to_physical_on(omega0, omega0.grid().n())?;
    Ok(phys.max_abs().max(1.0))
}
