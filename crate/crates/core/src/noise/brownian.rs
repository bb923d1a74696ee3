use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::spectral::Mode;

use super::NoiseCoefficients;

/// Independent scalar Wiener increments, one per support point of θ.
///
/// Normals are generated from a counter: the value attached to
/// `(master_seed, path_index, k, fine_step)` never depends on how many
/// draws happened before, so paths can run in any order and a run at
/// `dt` can be coupled to a run at `dt / r` through [`BrownianDriver::with_refinement`].
#[derive(Debug, Clone)]
pub struct BrownianDriver {
    master_seed: u64,
    path_index: u64,
    modes: Arc<[Mode]>,
    refinement: u32,
    step: u64,
}

/// One step's increments, aligned with the support order of θ.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    modes: Arc<[Mode]>,
    values: Vec<f64>,
}

impl Increments {
    pub fn zeros(theta: &NoiseCoefficients) -> Self {
        Self { modes: theta.modes().clone(), values: vec![0.0; theta.len()] }
    }

    /// Increments given explicitly in support order.
    pub fn from_values(theta: &NoiseCoefficients, values: Vec<f64>) -> Option<Self> {
        (values.len() == theta.len()).then(|| Self { modes: theta.modes().clone(), values })
    }

    pub fn modes(&self) -> &Arc<[Mode]> {
        &self.modes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, f64)> + '_ {
        self.modes.iter().copied().zip(self.values.iter().copied())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn matches(&self, theta: &NoiseCoefficients) -> bool {
        Arc::ptr_eq(&self.modes, theta.modes()) || *self.modes == **theta.modes()
    }
}

/// Standard normal attached to one counter position.
pub fn counter_normal(master_seed: u64, path_index: u64, k: Mode, fine_step: u64) -> f64 {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&path_index.to_le_bytes());
    seed[16..20].copy_from_slice(&k.l1.to_le_bytes());
    seed[20..24].copy_from_slice(&k.l2.to_le_bytes());
    seed[24..32].copy_from_slice(b"brownian");
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(fine_step);
    rng.sample(StandardNormal)
}

impl BrownianDriver {
    pub fn new(master_seed: u64, path_index: u64, theta: &NoiseCoefficients) -> Self {
        Self { master_seed, path_index, modes: theta.modes().clone(), refinement: 1, step: 0 }
    }

    /// Each coarse increment becomes the sum of `r` fine normals scaled by
    /// `√(dt/r)`, so a driver with refinement `r` and step `dt` follows the
    /// same Brownian path as a refinement-1 driver with step `dt/r`.
    pub fn with_refinement(mut self, r: u32) -> Self {
        self.refinement = r.max(1);
        self
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn refinement(&self) -> u32 {
        self.refinement
    }

    /// Number of increments drawn so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// Increments over the step at the current counter, then advance.
    pub fn sample_increments(&mut self, dt: f64) -> Increments {
        let out = self.increments_at(self.step, dt);
        self.step += 1;
        out
    }

    /// Increments over coarse step `step` without advancing.
    pub fn increments_at(&self, step: u64, dt: f64) -> Increments {
        let r = self.refinement as u64;
        let scale = (dt / r as f64).sqrt();
        let values = self
            .modes
            .iter()
            .map(|&k| {
                let sum: f64 = (0..r)
                    .map(|j| counter_normal(self.master_seed, self.path_index, k, step * r + j))
                    .sum();
                scale * sum
            })
            .collect();
        Increments { modes: self.modes.clone(), values }
    }
}
