use serde::Serialize;

use crate::dynamics::{run_with, SolverConfig, Stepper};
use crate::noise::BrownianDriver;
use crate::spectral::{Mode, SpectralField};

use super::{invalid, parallel_map, ExperimentError};

/// Modes on the `count` smallest nonempty lattice circles `|l|² = const`.
pub fn first_shells(count: usize) -> Vec<Mode> {
    let mut radii = Vec::new();
    let mut r2 = 1i64;
    while radii.len() < count {
        let b = (r2 as f64).sqrt().ceil() as i32;
        let on: Vec<Mode> = (-b..=b)
            .flat_map(|l1| (-b..=b).map(move |l2| Mode::new(l1, l2)))
            .filter(|l| l.norm_sq() == r2)
            .collect();
        if !on.is_empty() {
            radii.push(on);
        }
        r2 += 1;
    }
    radii.concat()
}

/// Coefficients `⟨ω_t, e_l⟩` on `modes` at the recorded times, for each
/// path: `(times, samples[path][time][mode])`.
pub fn collect_mode_paths(
    cfg: &SolverConfig,
    omega0: &SpectralField,
    modes: &[Mode],
    paths: usize,
    master_seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<Vec<f64>>>), ExperimentError> {
    let Some(theta) = cfg.noise.as_ref() else {
        return invalid("noise", "increment moments need a stochastic configuration");
    };
    let stepper = Stepper::new(cfg.clone())?;
    let results = parallel_map(paths, |p| {
        let mut rows = Vec::new();
        let driver = BrownianDriver::new(master_seed, p as u64, theta);
        run_with(&stepper, omega0, Some(driver), |_, _, w| rows.push(modes.iter().map(|&l| w.coeff(l)).collect()))
            .map(|rec| (rec.times, rows))
    });
    let mut times = Vec::new();
    let mut samples = Vec::with_capacity(paths);
    for r in results {
        let (t, rows) = r?;
        times = t;
        samples.push(rows);
    }
    Ok((times, samples))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementStat {
    /// `max` over modes and pairs `s < t` of `E⟨ω_t - ω_s, e_l⟩² / (|l|⁴ |t - s|)`.
    pub value: f64,
    pub mode: Mode,
    pub s: f64,
    pub t: f64,
}

/// The normalized second moment of coefficient increments, maximized over
/// modes and recorded time pairs. Input layout as [`collect_mode_paths`].
pub fn increment_statistic(times: &[f64], modes: &[Mode], samples: &[Vec<Vec<f64>>]) -> Option<IncrementStat> {
    if samples.is_empty() {
        return None;
    }
    let paths = samples.len() as f64;
    let mut best: Option<IncrementStat> = None;
    for (m, &l) in modes.iter().enumerate() {
        let w4 = (l.norm_sq() * l.norm_sq()) as f64;
        for i in 0..times.len() {
            for j in i + 1..times.len() {
                let dt = times[j] - times[i];
                let mean = samples.iter().map(|p| (p[j][m] - p[i][m]).powi(2)).sum::<f64>() / paths;
                let value = mean / (w4 * dt);
                if best.as_ref().map_or(true, |b| value > b.value || value.is_nan()) {
                    best = Some(IncrementStat { value, mode: l, s: times[i], t: times[j] });
                }
            }
        }
    }
    best
}
