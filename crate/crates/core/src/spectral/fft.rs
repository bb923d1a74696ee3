//! Square 2D complex FFTs with pruning for band-limited spectra.
//!
//! Buffers are row-major `m × m` with index `i1 * m + i2`, sample `i`
//! sitting at `x = (i1 / m, i2 / m)`. Wavevector `p` lives at
//! `(p1 mod m, p2 mod m)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Plan2 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Plan2 {
    pub(crate) fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { m, fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m) }
    }

    #[inline]
    pub(crate) fn wrap(&self, p: i32) -> usize {
        p.rem_euclid(self.m as i32) as usize
    }

    /// In-place synthesis `f(x) = Σ_p F_p exp(2πi p·x)`, assuming `F` vanishes
    /// outside `|p_i| <= band`.
    pub(crate) fn inverse(&self, buf: &mut [Complex64], band: usize) {
        let m = self.m;
        debug_assert_eq!(buf.len(), m * m);
        let mut scratch = vec![Complex64::default(); self.inv.get_inplace_scratch_len()];
        // axis 2 on the rows that can be nonzero
        if 2 * band + 1 >= m {
            self.inv.process_with_scratch(buf, &mut scratch);
        } else {
            self.inv.process_with_scratch(&mut buf[..(band + 1) * m], &mut scratch);
            self.inv.process_with_scratch(&mut buf[(m - band) * m..], &mut scratch);
        }
        transpose(buf, m);
        self.inv.process_with_scratch(buf, &mut scratch);
        transpose(buf, m);
    }

    /// In-place analysis `F_p = m⁻² Σ_x f(x) exp(-2πi p·x)`; only entries with
    /// `|p_i| <= band` are guaranteed valid afterwards.
    pub(crate) fn forward(&self, buf: &mut [Complex64], band: usize) {
        let m = self.m;
        debug_assert_eq!(buf.len(), m * m);
        let mut scratch = vec![Complex64::default(); self.fwd.get_inplace_scratch_len()];
        self.fwd.process_with_scratch(buf, &mut scratch);
        transpose(buf, m);
        if 2 * band + 1 >= m {
            self.fwd.process_with_scratch(buf, &mut scratch);
        } else {
            self.fwd.process_with_scratch(&mut buf[..(band + 1) * m], &mut scratch);
            self.fwd.process_with_scratch(&mut buf[(m - band) * m..], &mut scratch);
        }
        transpose(buf, m);
        let scale = 1.0 / (m * m) as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }
}

fn transpose(buf: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverts_inverse_on_band() {
        let plan = Plan2::new(24);
        let m = 24;
        let band = 5;
        let mut spec = vec![Complex64::default(); m * m];
        for p1 in -5i32..=5 {
            for p2 in -5i32..=5 {
                let v = Complex64::new((p1 * 3 + p2) as f64 * 0.1, (p2 - p1) as f64 * 0.05);
                spec[plan.wrap(p1) * m + plan.wrap(p2)] = v;
            }
        }
        let mut buf = spec.clone();
        plan.inverse(&mut buf, band);
        // single-sample check against direct summation
        let (i1, i2) = (7usize, 3usize);
        let x = (i1 as f64 / m as f64, i2 as f64 / m as f64);
        let mut direct = Complex64::default();
        for p1 in -5i32..=5 {
            for p2 in -5i32..=5 {
                let phase = 2.0 * std::f64::consts::PI * (p1 as f64 * x.0 + p2 as f64 * x.1);
                direct += spec[plan.wrap(p1) * m + plan.wrap(p2)] * Complex64::from_polar(1.0, phase);
            }
        }
        assert!((buf[i1 * m + i2] - direct).norm() < 1e-12);
        plan.forward(&mut buf, band);
        for p1 in -5i32..=5 {
            for p2 in -5i32..=5 {
                let idx = plan.wrap(p1) * m + plan.wrap(p2);
                assert!((buf[idx] - spec[idx]).norm() < 1e-13);
            }
        }
    }
}
