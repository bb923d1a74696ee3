use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::spectral::{Mode, Spectral, SpectralError, SpectralField};

/// One `(l₁, l₂, c_l)` entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCoeff {
    pub l1: i32,
    pub l2: i32,
    pub c: f64,
}

/// In-memory initial vorticity descriptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Uniform random coefficients on `0 < |l| ≤ band`, rescaled to the given L² norm.
    RandomBand { band: u32, l2_norm: f64, seed: u64 },
    Modes { modes: Vec<ModeCoeff> },
}

impl InitialCondition {
    pub fn build(&self, spectral: &Spectral) -> Result<SpectralField, SpectralError> {
        match self {
            InitialCondition::RandomBand { band, l2_norm, seed } => Ok(random_band(spectral, *band, *l2_norm, *seed)?),
            InitialCondition::Modes { modes } => {
                spectral.field(modes.iter().map(|m| (Mode::new(m.l1, m.l2), m.c)))
            }
        }
    }
}

/// Random band-limited field with prescribed L² norm; modes are filled in
/// lattice order so the result depends only on `(band, seed)`.
pub fn random_band(spectral: &Spectral, band: u32, l2_norm: f64, seed: u64) -> Result<SpectralField, SpectralError> {
    let b = band as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = spectral.zeros();
    for l1 in -b..=b {
        for l2 in -b..=b {
            let l = Mode::new(l1, l2);
            if !l.is_zero() && l.norm_sq() <= (b * b) as i64 {
                f.set(l, rng.gen_range(-1.0..1.0))?;
            }
        }
    }
    let n = f.l2_norm();
    if n > 0.0 {
        f.scale(l2_norm / n);
    }
    Ok(f)
}
