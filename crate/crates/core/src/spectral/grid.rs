use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::SpectralError;

/// A nonzero lattice point of Z², used both as a Fourier wavevector and as
/// the index of a real basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode {
    pub l1: i32,
    pub l2: i32,
}

impl Mode {
    pub const fn new(l1: i32, l2: i32) -> Self {
        Self { l1, l2 }
    }

    pub fn norm_sq(self) -> i64 {
        let a = self.l1 as i64;
        let b = self.l2 as i64;
        a * a + b * b
    }

    pub fn norm(self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.l1 == 0 && self.l2 == 0
    }

    /// Membership in the upper half lattice: `l1 > 0`, or `l1 == 0` and `l2 > 0`.
    /// Upper modes carry cosines, their negatives carry sines.
    pub fn is_upper(self) -> bool {
        self.l1 > 0 || (self.l1 == 0 && self.l2 > 0)
    }

    pub fn neg(self) -> Self {
        Self::new(-self.l1, -self.l2)
    }

    /// `(l2, -l1)`.
    pub fn perp(self) -> Self {
        Self::new(self.l2, -self.l1)
    }

    pub fn max_abs(self) -> i32 {
        self.l1.abs().max(self.l2.abs())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.l1, self.l2)
    }
}

/// Shape of the Galerkin truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// `|l| <= max_mode`
    #[default]
    Radial,
    /// `|l_i| <= max_mode` for both components
    Square,
}

/// Rational padding factor for pseudo-spectral products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pad {
    num: u32,
    den: u32,
}

impl Pad {
    pub const THREE_HALVES: Pad = Pad { num: 3, den: 2 };
    pub const TWO: Pad = Pad { num: 2, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self, SpectralError> {
        if den == 0 || num < den {
            return Err(SpectralError::InvalidPad { num, den });
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Padded sample count for `n` points per axis; must be an even integer.
    pub fn apply(self, n: usize) -> Result<usize, SpectralError> {
        let scaled = n * self.num as usize;
        if scaled % self.den as usize != 0 {
            return Err(SpectralError::OddPaddedSize { n, pad: self.as_f64() });
        }
        let m = scaled / self.den as usize;
        if m % 2 != 0 {
            return Err(SpectralError::OddPaddedSize { n, pad: self.as_f64() });
        }
        Ok(m)
    }

    /// Best rational approximation with denominator at most 64, used when the
    /// padding comes from a config file as a decimal.
    pub fn from_f64(x: f64) -> Result<Self, SpectralError> {
        if !x.is_finite() || x < 1.0 {
            return Err(SpectralError::InvalidPad { num: 0, den: 0 });
        }
        for den in 1..=64u32 {
            let num = (x * den as f64).round();
            if (num / den as f64 - x).abs() < 1e-12 {
                return Pad::new(num as u32, den);
            }
        }
        Err(SpectralError::InvalidPad { num: (x * 64.0).round() as u32, den: 64 })
    }
}

impl Default for Pad {
    fn default() -> Self {
        Pad::THREE_HALVES
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Physical resolution and Galerkin cutoff of a periodic field on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    n: usize,
    max_mode: usize,
    dealias_pad: Pad,
    cutoff: Cutoff,
}

impl GridSpec {
    pub fn new(n: usize, max_mode: usize, dealias_pad: Pad, cutoff: Cutoff) -> Result<Self, SpectralError> {
        if n == 0 || n % 2 != 0 {
            return Err(SpectralError::InvalidGrid(format!("n = {n} must be a positive even integer")));
        }
        if max_mode == 0 || 2 * max_mode >= n {
            return Err(SpectralError::InvalidGrid(format!(
                "max_mode = {max_mode} must satisfy 0 < max_mode < n/2 = {}",
                n / 2
            )));
        }
        if dealias_pad.num() * 2 < dealias_pad.den() * 3 {
            return Err(SpectralError::InvalidGrid(format!(
                "dealias_pad = {} must be at least 3/2",
                dealias_pad.as_f64()
            )));
        }
        dealias_pad.apply(n)?;
        Ok(Self { n, max_mode, dealias_pad, cutoff })
    }

    /// `n` points per axis, cutoff `n/2 - 1`, radial mask, 3/2 padding.
    pub fn with_n(n: usize) -> Result<Self, SpectralError> {
        Self::new(n, (n / 2).saturating_sub(1), Pad::THREE_HALVES, Cutoff::Radial)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn dealias_pad(&self) -> Pad {
        self.dealias_pad
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn contains(&self, l: Mode) -> bool {
        if l.is_zero() {
            return false;
        }
        let k = self.max_mode as i64;
        match self.cutoff {
            Cutoff::Radial => l.norm_sq() <= k * k,
            Cutoff::Square => (l.max_abs() as i64) <= k,
        }
    }

    /// Largest `|l|²` among retained modes.
    pub fn max_norm_sq(&self) -> i64 {
        let k = self.max_mode as i64;
        match self.cutoff {
            Cutoff::Radial => k * k,
            Cutoff::Square => 2 * k * k,
        }
    }

    /// Padded grid used for quadratic products.
    pub fn dealias_size(&self) -> usize {
        self.dealias_pad.apply(self.n).expect("validated at construction")
    }

    /// Padded grid used for compositions with non-polynomial functions:
    /// at least twice the base resolution.
    pub fn nonlinear_size(&self) -> usize {
        self.dealias_size().max(2 * self.n)
    }
}

/// Retained modes of a [`GridSpec`], in a fixed order.
///
/// Coefficients of a real field are stored as pairs: slot `2i` holds the
/// cosine coefficient of `upper[i]` and slot `2i + 1` the sine coefficient of
/// `-upper[i]`. For the complex exponential expansion
/// `ω(x) = Σ_p ŵ_p exp(2πi p·x)` the bijection is
/// `ŵ_p = (c_p + i c_{-p}) / √2` for upper `p`, with `ŵ_{-p} = conj(ŵ_p)`.
#[derive(Debug)]
pub struct ModeSet {
    grid: GridSpec,
    upper: Vec<Mode>,
    index: HashMap<Mode, usize>,
}

impl ModeSet {
    pub fn new(grid: GridSpec) -> Self {
        let k = grid.max_mode() as i32;
        let mut upper = Vec::new();
        for l1 in 0..=k {
            for l2 in -k..=k {
                let m = Mode::new(l1, l2);
                if m.is_upper() && grid.contains(m) {
                    upper.push(m);
                }
            }
        }
        let index = upper.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        Self { grid, upper, index }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn upper(&self) -> &[Mode] {
        &self.upper
    }

    /// Number of real coefficients.
    pub fn len(&self) -> usize {
        2 * self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    /// Storage slot of the coefficient of `e_l`, if `l` is retained.
    pub fn slot(&self, l: Mode) -> Option<usize> {
        if l.is_upper() {
            self.index.get(&l).map(|&i| 2 * i)
        } else {
            self.index.get(&l.neg()).map(|&i| 2 * i + 1)
        }
    }

    /// Mode stored at a slot.
    pub fn mode_at(&self, slot: usize) -> Mode {
        let p = self.upper[slot / 2];
        if slot % 2 == 0 {
            p
        } else {
            p.neg()
        }
    }

    /// All retained modes, in slot order.
    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        self.upper.iter().flat_map(|&p| [p, p.neg()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_cutoff_at_nyquist() {
        assert!(GridSpec::new(64, 32, Pad::THREE_HALVES, Cutoff::Radial).is_err());
        assert!(GridSpec::new(64, 31, Pad::THREE_HALVES, Cutoff::Radial).is_ok());
        assert!(GridSpec::new(63, 20, Pad::THREE_HALVES, Cutoff::Radial).is_err());
    }

    #[test]
    fn pad_below_three_halves_rejected() {
        let p = Pad::new(5, 4).unwrap();
        assert!(GridSpec::new(64, 20, p, Cutoff::Radial).is_err());
    }

    #[test]
    fn odd_padded_size_rejected() {
        // 3/2 * 18 = 27
        assert!(matches!(Pad::THREE_HALVES.apply(18), Err(SpectralError::OddPaddedSize { .. })));
        assert_eq!(Pad::THREE_HALVES.apply(64).unwrap(), 96);
        assert_eq!(Pad::from_f64(1.5).unwrap(), Pad::THREE_HALVES);
    }

    #[test]
    fn radial_mode_count_matches_lattice_scan() {
        let g = GridSpec::with_n(16).unwrap();
        let set = ModeSet::new(g);
        let k = g.max_mode() as i32;
        let mut count = 0;
        for a in -k..=k {
            for b in -k..=k {
                if (a, b) != (0, 0) && a * a + b * b <= k * k {
                    count += 1;
                }
            }
        }
        assert_eq!(set.len(), count);
        for slot in 0..set.len() {
            assert_eq!(set.slot(set.mode_at(slot)), Some(slot));
        }
        assert_eq!(set.slot(Mode::new(0, 0)), None);
    }

    #[test]
    fn square_cutoff_keeps_corners() {
        let g = GridSpec::new(16, 4, Pad::THREE_HALVES, Cutoff::Square).unwrap();
        let set = ModeSet::new(g);
        assert_eq!(set.len(), 9 * 9 - 1);
        assert!(set.slot(Mode::new(4, -4)).is_some());
    }
}
