use serde::Serialize;

use crate::dynamics::{run_with, Scheme, SolverConfig, Stepper};
use crate::noise::BrownianDriver;
use crate::spectral::SpectralField;

use super::{invalid, mean_std, parallel_map, ExperimentError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub dt: f64,
    /// Ensemble mean of `sup_t ‖ω^{Itô}_t - ω^{Heun}_t‖_{L²}`.
    pub mean_sup: f64,
    pub std_sup: f64,
    pub paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyTable {
    /// Rows in the order of the requested steps.
    pub rows: Vec<ConsistencyRow>,
    /// Least-squares slope of `ln mean_sup` against `ln dt`.
    pub order: Option<f64>,
}

impl ConsistencyTable {
    /// True when the discrepancy shrinks with every refinement of `dt`.
    pub fn is_monotone(&self) -> bool {
        let mut rows: Vec<&ConsistencyRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.dt.total_cmp(&a.dt));
        rows.windows(2).all(|w| w[1].mean_sup < w[0].mean_sup)
    }
}

fn integer_ratio(a: f64, b: f64) -> Option<usize> {
    let r = (a / b).round();
    (r >= 1.0 && (r * b - a).abs() <= 1e-9 * a).then_some(r as usize)
}

/// Itô Euler–Maruyama against Stratonovich Heun on shared Brownian paths,
/// for each step in `dts`. Paths are coupled across steps: every step sums
/// the normals of the finest one, so the same path index means the same
/// Brownian motion throughout. Distances are taken on the coarsest step's grid
/// of times.
pub fn scheme_consistency_study(
    cfg: &SolverConfig,
    omega0: &SpectralField,
    dts: &[f64],
    paths: usize,
    master_seed: u64,
) -> Result<ConsistencyTable, ExperimentError> {
    let Some(theta) = cfg.noise.clone() else {
        return invalid("noise", "the consistency study needs noise coefficients");
    };
    if dts.is_empty() {
        return invalid("dt", "at least one step is required");
    }
    if paths == 0 {
        return invalid("paths", "must be at least 1");
    }
    let finest = dts.iter().copied().fold(f64::INFINITY, f64::min);
    let coarsest = dts.iter().copied().fold(0.0, f64::max);
    if !(finest > 0.0) {
        return invalid("dt", "steps must be positive");
    }
    let mut rows = Vec::with_capacity(dts.len());
    for &dt in dts {
        let (Some(refinement), Some(stride)) = (integer_ratio(dt, finest), integer_ratio(coarsest, dt)) else {
            return invalid("dt", format!("{dt} is not commensurate with {finest} and {coarsest}"));
        };
        let base = SolverConfig { dt, record_stride: stride, noise: Some(theta.clone()), ..cfg.clone() };
        let ito = Stepper::new(SolverConfig { scheme: Scheme::ItoEm, ..base.clone() })?;
        let heun = Stepper::new(SolverConfig { scheme: Scheme::StratonovichHeun, ..base })?;
        let results = parallel_map(paths, |p| -> Result<f64, ExperimentError> {
            let driver = || BrownianDriver::new(master_seed, p as u64, &theta).with_refinement(refinement as u32);
            let mut a = Vec::new();
            run_with(&ito, omega0, Some(driver()), |_, _, w| a.push(w.clone()))?;
            let mut sup = 0.0f64;
            let mut i = 0;
            run_with(&heun, omega0, Some(driver()), |_, _, w| {
                sup = sup.max(w.difference(&a[i]).expect("same grid").l2_norm());
                i += 1;
            })?;
            Ok(sup)
        });
        let sups = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        let (mean_sup, std_sup) = mean_std(&sups);
        rows.push(ConsistencyRow { dt, mean_sup, std_sup, paths });
    }
    let order = log_slope(rows.iter().map(|r| (r.dt, r.mean_sup)));
    Ok(ConsistencyTable { rows, order })
}

/// Least-squares slope in log-log coordinates; `None` with fewer than two
/// distinct abscissae or any non-positive value.
pub(crate) fn log_slope(points: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.collect();
    if pts.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let n = pts.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 1e-12).then(|| sxy / sxx)
}
