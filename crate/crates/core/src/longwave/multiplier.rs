//! The Fourier multiplier that inverts the linear part of the scaled profile
//! equation, and its discrete application.
//!
//! Transform convention: `f^(k) = int f(x) e^{-i k x} dx`, so differentiation
//! is multiplication by `i k`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{sup, Grid};

/// Below this `|nu k|` the removable singularity at `k = 0` is evaluated by
/// series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Symbol `M^nu(z) = nu (1 - e^{-i nu z}) / (i c0 nu^2 z + 2 tau2 (cos(nu z) - 1))`,
/// and `1 / (c0 + i tau2 z)` at `nu = 0`. Accepts complex `z` for strip checks.
pub fn multiplier_symbol_complex(z: Complex64, nu: f64, c0: f64, tau2: f64) -> Complex64 {
    let i = Complex64::i();
    if nu == 0.0 {
        return 1.0 / (c0 + i * tau2 * z);
    }
    let w = nu * z;
    if w.norm() < SERIES_THRESHOLD {
        // numerator and denominator divided by nu^2 z, expanded to 4th order in w
        let num = i + w / 2.0 - i * w * w / 6.0 - w * w * w / 24.0;
        let den = i * c0 - tau2 * z * (1.0 - w * w / 12.0);
        return num / den;
    }
    nu * (1.0 - (-i * w).exp()) / (i * c0 * nu * w + 2.0 * tau2 * (w.cos() - 1.0))
}

pub fn multiplier_symbol(k: f64, nu: f64, c0: f64, tau2: f64) -> Complex64 {
    multiplier_symbol_complex(Complex64::new(k, 0.0), nu, c0, tau2)
}

/// Cached FFT plans for one grid.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            grid,
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
        }
    }

    /// Angular frequency of DFT bin `m`.
    pub fn frequency(&self, m: usize) -> f64 {
        let n = self.grid.n;
        let signed = if m < n / 2 {
            m as f64
        } else {
            m as f64 - n as f64
        };
        std::f64::consts::PI * signed / self.grid.half_width
    }

    /// Multiplies the spectrum of real `f` by `symbol(k)` and returns the real
    /// part of the result together with the largest discarded imaginary part.
    /// At the Nyquist bin only the even part `Re symbol` is used, which keeps
    /// real inputs real.
    pub fn apply(&self, f: &[f64], symbol: impl Fn(f64) -> Complex64) -> (Vec<f64>, f64) {
        let n = self.grid.n;
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (m, b) in buf.iter_mut().enumerate() {
            let s = symbol(self.frequency(m));
            *b *= if m == n / 2 {
                Complex64::new(s.re, 0.0)
            } else {
                s
            };
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        let leak = buf.iter().fold(0.0f64, |m, z| m.max((z.im * scale).abs()));
        (buf.iter().map(|z| z.re * scale).collect(), leak)
    }

    /// Spectral derivative; the Nyquist mode is dropped.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let k_nyq = self.frequency(self.grid.n / 2);
        self.apply(f, |k| {
            if k == k_nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            }
        })
        .0
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }
}

/// `sup_k |M^nu(k) - M^0(k)|` over `ks`.
pub fn symbol_sup_distance(ks: &[f64], nu: f64, c0: f64, tau2: f64) -> f64 {
    ks.iter()
        .map(|&k| (multiplier_symbol(k, nu, c0, tau2) - multiplier_symbol(k, 0.0, c0, tau2)).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn relative_leak(out: &[f64], leak: f64) -> f64 {
    leak / sup(out).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const C0: f64 = 0.5266;
    const TAU2: f64 = 0.15;

    #[test]
    fn zero_frequency_gives_inverse_speed() {
        for nu in [0.0, 1e-3, 0.1, 0.5] {
            let m = multiplier_symbol(0.0, nu, C0, TAU2);
            assert!((m - Complex64::new(1.0 / C0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn series_branch_is_continuous() {
        let nu = 0.1;
        for k in [5e-4, 9.99e-4, 1.0001e-3, 2e-3] {
            let direct = {
                let i = Complex64::i();
                let w = nu * k;
                nu * (1.0 - (-i * w).exp()) / (i * C0 * nu * w + 2.0 * TAU2 * (w.cos() - 1.0))
            };
            let m = multiplier_symbol(k, nu, C0, TAU2);
            assert!((m - direct).norm() < 1e-9 * m.norm(), "k = {k}");
        }
        let below = multiplier_symbol(0.999e-3, nu, C0, TAU2);
        let above = multiplier_symbol(1.001e-3, nu, C0, TAU2);
        assert!((below - above).norm() < 1e-5);
    }

    #[test]
    fn small_nu_approaches_limit_symbol() {
        let k = 2.3;
        let limit = multiplier_symbol(k, 0.0, C0, TAU2);
        let mut last = f64::INFINITY;
        for nu in [0.2, 0.1, 0.05, 0.025, 0.0125] {
            let d = (multiplier_symbol(k, nu, C0, TAU2) - limit).norm();
            assert!(d < last);
            last = d;
        }
        let first = (multiplier_symbol(k, 0.2, C0, TAU2) - limit).norm();
        assert!(last < first / 10.0);
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(k in -500.0f64..500.0, nu in 0.0f64..0.5) {
            let a = multiplier_symbol(k, nu, C0, TAU2);
            let b = multiplier_symbol(-k, nu, C0, TAU2);
            prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let grid = Grid::new(12.0, 512).unwrap();
        let sp = Spectral::new(grid);
        let f: Vec<f64> = grid.points().iter().map(|x| (-x * x).exp()).collect();
        let d = sp.derivative(&f);
        for (x, di) in grid.points().iter().zip(&d) {
            assert!((di + 2.0 * x * (-x * x).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_symbol_round_trips() {
        let grid = Grid::new(5.0, 256).unwrap();
        let sp = Spectral::new(grid);
        let f: Vec<f64> = grid
            .points()
            .iter()
            .map(|x| x.sin() * (-x * x).exp())
            .collect();
        let (g, leak) = sp.apply(&f, |_| Complex64::new(1.0, 0.0));
        assert!(leak < 1e-15);
        assert!(f.iter().zip(&g).all(|(a, b)| (a - b).abs() < 1e-15));
    }
}
