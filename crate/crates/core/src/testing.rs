//! Independent reference computations used only by unit tests.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{Mode, Spectral, SpectralField};

/// Trigonometric polynomial `Σ F_q exp(2πi q·x)` kept as a sparse map.
#[derive(Debug, Clone, Default)]
pub(crate) struct ExpPoly(pub HashMap<(i32, i32), Complex64>);

impl ExpPoly {
    pub fn from_field(field: &SpectralField) -> Self {
        let mut out = HashMap::new();
        let h = SQRT_2 / 2.0;
        for (l, c) in field.nonzero() {
            let (p, lower) = if l.is_upper() { (l, false) } else { (l.neg(), true) };
            let (a, b) = if !lower {
                (Complex64::new(h * c, 0.0), Complex64::new(h * c, 0.0))
            } else {
                // √2 sin(2π(-p)·x) = i√2/2 (E_p - E_{-p})
                (Complex64::new(0.0, h * c), Complex64::new(0.0, -h * c))
            };
            *out.entry((p.l1, p.l2)).or_insert_with(Complex64::default) += a;
            *out.entry((-p.l1, -p.l2)).or_insert_with(Complex64::default) += b;
        }
        Self(out)
    }

    pub fn derivative(&self, axis: usize) -> Self {
        Self(
            self.0
                .iter()
                .map(|(&q, &z)| {
                    let k = if axis == 0 { q.0 } else { q.1 } as f64;
                    (q, z * Complex64::new(0.0, 2.0 * PI * k))
                })
                .collect(),
        )
    }

    pub fn scale_by(&self, sym: impl Fn((i32, i32)) -> f64) -> Self {
        Self(self.0.iter().map(|(&q, &z)| (q, z * sym(q))).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out: HashMap<(i32, i32), Complex64> = HashMap::new();
        for (&a, &za) in &self.0 {
            for (&b, &zb) in &other.0 {
                *out.entry((a.0 + b.0, a.1 + b.1)).or_default() += za * zb;
            }
        }
        Self(out)
    }

    pub fn add(&self, other: &Self, s: f64) -> Self {
        let mut out = self.0.clone();
        for (&q, &z) in &other.0 {
            *out.entry(q).or_default() += z * s;
        }
        Self(out)
    }

    /// `⟨f, e_l⟩`
    pub fn coeff(&self, l: Mode) -> f64 {
        let p = if l.is_upper() { l } else { l.neg() };
        let z = self.0.get(&(p.l1, p.l2)).copied().unwrap_or_default();
        if l.is_upper() {
            SQRT_2 * z.re
        } else {
            SQRT_2 * z.im
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.0
            .iter()
            .map(|(&q, &z)| (z * Complex64::from_polar(1.0, 2.0 * PI * (q.0 as f64 * x[0] + q.1 as f64 * x[1]))).re)
            .sum()
    }
}

/// Direct summation `Σ_l c_l e_l(x)` written out from the basis definition.
pub(crate) fn direct_sum(field: &SpectralField, x: [f64; 2]) -> f64 {
    field
        .nonzero()
        .map(|(l, c)| {
            let phase = 2.0 * PI * (l.l1 as f64 * x[0] + l.l2 as f64 * x[1]);
            let upper = l.l1 > 0 || (l.l1 == 0 && l.l2 > 0);
            c * SQRT_2 * if upper { phase.cos() } else { phase.sin() }
        })
        .sum()
}

/// Field with Gaussian coefficients on `count` random modes with `|l| <= band`.
pub(crate) fn random_field(spectral: &Spectral, band: i32, count: usize, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = spectral.zeros();
    let mut placed = 0;
    while placed < count {
        let l = Mode::new(rng.gen_range(-band..=band), rng.gen_range(-band..=band));
        if l.is_zero() || l.norm_sq() > (band * band) as i64 || f.coeff(l) != 0.0 {
            continue;
        }
        f.set(l, rng.gen_range(-1.0..1.0)).unwrap();
        placed += 1;
    }
    f
}

/// Every mode with `|l| <= band` filled with uniform random coefficients.
pub(crate) fn band_limited(spectral: &Spectral, band: i32, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = spectral.zeros();
    for a in -band..=band {
        for b in -band..=band {
            let l = Mode::new(a, b);
            if !l.is_zero() && l.norm_sq() <= (band * band) as i64 {
                f.set(l, rng.gen_range(-1.0..1.0)).unwrap();
            }
        }
    }
    f
}

#[test]
fn exponential_and_real_expansions_agree() {
    let spectral = Spectral::new(crate::spectral::GridSpec::with_n(16).unwrap());
    let w = random_field(&spectral, 5, 12, 3);
    let e = ExpPoly::from_field(&w);
    for x in [[0.0, 0.0], [0.13, 0.71], [0.5, 0.25], [0.9, 0.4]] {
        assert!((e.eval(x) - direct_sum(&w, x)).abs() < 1e-12);
    }
    for (l, c) in w.nonzero() {
        assert!((e.coeff(l) - c).abs() < 1e-14);
    }
}
