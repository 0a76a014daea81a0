use crate::error::{Error, Result};
use crate::model::{nl1_nu, nl2_nu, ModelParams};
use crate::profiles::ProfileContext;

use super::grid::{sup, Grid, GridFunction};
use super::multiplier::{multiplier_symbol, relative_leak, Spectral};
use super::quadrature::{interpolant_integral, shift, tail_integral, weighted_tail_integral};
use super::{Nonlinearity, SolverConfig};

/// Operator set on one grid for one parameter set and leading-order profile.
#[derive(Debug, Clone)]
pub struct LongWave {
    pub params: ModelParams,
    pub cfg: SolverConfig,
    pub profile: ProfileContext,
    pub grid: Grid,
    pub(crate) spectral: Spectral,
    pub(crate) sigma: Vec<f64>,
    /// Discrete `int_X^infty sigma`.
    pub(crate) sigma_tail: Vec<f64>,
    /// `zeta = P1^0(sigma)` computed on the grid.
    pub(crate) zeta: Vec<f64>,
    /// `R1^0(sigma)`.
    pub(crate) r1_sigma: Vec<f64>,
}

impl LongWave {
    pub fn new(params: &ModelParams, cfg: SolverConfig) -> Result<Self> {
        cfg.validate(params)?;
        let profile = ProfileContext::new(params, cfg.c0, cfg.theta)?;
        let half_width = cfg
            .half_width
            .unwrap_or_else(|| Self::auto_half_width(&profile));
        let grid = Grid::new(half_width, cfg.n)?;
        if grid.step() > cfg.max_spacing {
            return Err(Error::InvalidGrid(format!(
                "spacing {} exceeds the resolution bound {}",
                grid.step(),
                cfg.max_spacing
            )));
        }
        let sigma: Vec<f64> = grid.points().iter().map(|&x| profile.sigma(x)).collect();
        let sigma_tail = tail_integral(&sigma, grid.step());
        let mut lw = LongWave {
            params: *params,
            cfg,
            profile,
            grid,
            spectral: Spectral::new(grid),
            sigma,
            sigma_tail,
            zeta: Vec::new(),
            r1_sigma: Vec::new(),
        };
        lw.zeta = lw.p1_raw(&lw.sigma, 0.0);
        lw.r1_sigma = lw.r1_raw(&lw.sigma, 0.0);
        Ok(lw)
    }

    /// Smallest symmetric window on which `Sigma(L) / Sigma(-L) < 1e-12`,
    /// plus one decay length.
    pub fn auto_half_width(profile: &ProfileContext) -> f64 {
        let r = profile.decay_rate();
        let mut l = 1.0;
        while profile.big_sigma(l) / profile.big_sigma(-l) >= 1e-12 {
            l += 0.25;
        }
        l + 1.0 / r
    }

    pub fn sigma(&self) -> GridFunction {
        self.wrap(self.sigma.clone())
    }

    pub fn sigma_prime(&self) -> GridFunction {
        GridFunction::from_fn(self.grid, |x| self.profile.sigma_prime(x))
    }

    /// Grid realization of `zeta = P1^0(sigma)`.
    pub fn zeta(&self) -> GridFunction {
        self.wrap(self.zeta.clone())
    }

    pub(crate) fn wrap(&self, values: Vec<f64>) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values,
        }
    }

    pub(crate) fn h(&self) -> f64 {
        self.grid.step()
    }

    fn kappa_over_c0(&self) -> f64 {
        self.params.kappa() / self.cfg.c0
    }

    pub(crate) fn check_grid(&self, f: &GridFunction) -> Result<()> {
        if f.grid != self.grid {
            return Err(Error::InvalidGrid(format!(
                "function lives on {:?}, solver on {:?}",
                f.grid, self.grid
            )));
        }
        Ok(())
    }

    pub(crate) fn check_tail(&self, f: &[f64]) -> Result<()> {
        let edge = f
            .first()
            .map_or(0.0, |v| v.abs())
            .max(f.last().map_or(0.0, |v| v.abs()));
        let tol = self.cfg.tail_tol * sup(f);
        if edge > tol {
            return Err(Error::TailTooFat { edge, tol });
        }
        Ok(())
    }

    fn decaying(&self, f: &GridFunction) -> Result<()> {
        self.check_grid(f)?;
        self.check_tail(&f.values)
    }

    /// `E(f)(V, X) = exp((kappa / c0) int_V^X f)`.
    pub fn op_e(&self, f: &GridFunction, v: f64, x: f64) -> Result<f64> {
        self.check_grid(f)?;
        for point in [v, x] {
            if !self.grid.contains(point) {
                return Err(Error::OutOfDomain {
                    point,
                    half_width: self.grid.half_width,
                });
            }
        }
        let l = self.grid.half_width;
        let h = self.h();
        let integral = interpolant_integral(&f.values, (v + l) / h, (x + l) / h, h);
        Ok((self.kappa_over_c0() * integral).exp())
    }

    /// `(S^nu f, rate)` with rate the exponent density of `E(nu^{1/2} S^nu f)`.
    fn shifted_and_rate(&self, f: &[f64], nu: f64) -> (Vec<f64>, Vec<f64>) {
        let fs = shift(f, nu, self.h());
        let k = self.kappa_over_c0() * nu.sqrt();
        let rate = fs.iter().map(|v| k * v).collect();
        (fs, rate)
    }

    pub(crate) fn p1_raw(&self, f: &[f64], nu: f64) -> Vec<f64> {
        let (_, rate) = self.shifted_and_rate(f, nu);
        let scale = self.params.alpha / self.cfg.c0;
        weighted_tail_integral(&rate, f, self.h())
            .into_iter()
            .map(|v| scale * v)
            .collect()
    }

    fn nl2_samples(&self, fs: &[f64], g: &[f64], nu: f64) -> Result<Vec<f64>> {
        fs.iter()
            .zip(g)
            .map(|(&x, &y)| nl2_nu(x, y, nu, &self.params))
            .collect()
    }

    pub(crate) fn p2_raw(&self, f: &[f64], g: &[f64], nu: f64) -> Result<Vec<f64>> {
        let (fs, rate) = self.shifted_and_rate(f, nu);
        let integrand = self.nl2_samples(&fs, g, nu)?;
        let scale = 1.0 / self.cfg.c0;
        Ok(weighted_tail_integral(&rate, &integrand, self.h())
            .into_iter()
            .map(|v| scale * v)
            .collect())
    }

    pub(crate) fn r1_raw(&self, f: &[f64], nu: f64) -> Vec<f64> {
        let p1 = self.p1_raw(f, nu);
        let fs = shift(f, nu, self.h());
        let scale = self.params.kappa() * self.params.tau1() / self.cfg.c0;
        let integrand: Vec<f64> = p1.iter().zip(&fs).map(|(a, b)| scale * a * b).collect();
        tail_integral(&integrand, self.h())
    }

    pub(crate) fn r2_raw(&self, f: &[f64], g: &[f64], nu: f64) -> Result<Vec<f64>> {
        let p2 = self.p2_raw(f, g, nu)?;
        let fs = shift(f, nu, self.h());
        let n2 = self.nl2_samples(&fs, g, nu)?;
        let k = nu.sqrt() * self.params.kappa();
        let c0 = self.cfg.c0;
        let integrand: Vec<f64> = (0..f.len())
            .map(|i| (k * fs[i] * p2[i] - n2[i]) / c0)
            .collect();
        Ok(tail_integral(&integrand, self.h()))
    }

    pub(crate) fn r_raw(&self, f: &[f64], g: &[f64], nu: f64) -> Result<Vec<f64>> {
        let r1 = self.r1_raw(f, nu);
        if nu == 0.0 {
            return Ok(r1);
        }
        let r2 = self.r2_raw(f, g, nu)?;
        let s = nu.sqrt();
        Ok(r1.iter().zip(&r2).map(|(a, b)| a + s * b).collect())
    }

    pub(crate) fn n_raw(&self, f: &[f64], g: &[f64], nu: f64) -> Result<Vec<f64>> {
        let tau1 = self.params.tau1();
        let r2 = self.r2_raw(f, g, nu)?;
        if nu == 0.0 {
            return Ok(r2.iter().zip(f).map(|(a, b)| tau1 * a * b).collect());
        }
        let (r, c) = match self.cfg.nonlinearity {
            Nonlinearity::Literal => (self.r_raw(f, g, nu)?, nu.powf(1.5) * tau1),
            Nonlinearity::Lattice => {
                let s = nu.sqrt();
                let r: Vec<f64> = self
                    .r1_raw(f, nu)
                    .iter()
                    .zip(&r2)
                    .map(|(a, b)| a / tau1 + s * b)
                    .collect();
                (r, nu * nu * tau1 * self.params.k_a)
            }
        };
        (0..f.len())
            .map(|i| Ok(tau1 * r2[i] * f[i] - c * nl1_nu(f[i], r[i], nu, &self.params)?))
            .collect()
    }

    pub fn op_p1(&self, f: &GridFunction, nu: f64) -> Result<GridFunction> {
        self.decaying(f)?;
        Ok(self.wrap(self.p1_raw(&f.values, nu)))
    }

    pub fn op_p2(&self, f: &GridFunction, g: &GridFunction, nu: f64) -> Result<GridFunction> {
        self.decaying(f)?;
        self.check_grid(g)?;
        Ok(self.wrap(self.p2_raw(&f.values, &g.values, nu)?))
    }

    pub fn op_r1(&self, f: &GridFunction, nu: f64) -> Result<GridFunction> {
        self.decaying(f)?;
        Ok(self.wrap(self.r1_raw(&f.values, nu)))
    }

    pub fn op_r2(&self, f: &GridFunction, g: &GridFunction, nu: f64) -> Result<GridFunction> {
        self.decaying(f)?;
        self.check_grid(g)?;
        Ok(self.wrap(self.r2_raw(&f.values, &g.values, nu)?))
    }

    /// `R^nu = R1^nu + nu^{1/2} R2^nu`.
    pub fn op_r(&self, f: &GridFunction, g: &GridFunction, nu: f64) -> Result<GridFunction> {
        self.decaying(f)?;
        self.check_grid(g)?;
        Ok(self.wrap(self.r_raw(&f.values, &g.values, nu)?))
    }

    /// `N^nu(f, g) = tau1 R2^nu(f, g) f - nu^{3/2} tau1 n1^nu(f, R^nu(f, g))`
    /// under [`Nonlinearity::Literal`]. Under [`Nonlinearity::Lattice`] the
    /// second term is `nu^2 tau1 k_a n1^nu(f, R1^nu / tau1 + nu^{1/2} R2^nu)`.
    pub fn op_n(&self, f: &GridFunction, g: &GridFunction, nu: f64) -> Result<GridFunction> {
        self.decaying(f)?;
        self.check_grid(g)?;
        Ok(self.wrap(self.n_raw(&f.values, &g.values, nu)?))
    }

    pub(crate) fn multiplier_raw(&self, f: &[f64], nu: f64) -> Result<Vec<f64>> {
        self.check_tail(f)?;
        let (c0, tau2) = (self.cfg.c0, self.params.tau2());
        let (out, leak) = self
            .spectral
            .apply(f, |k| multiplier_symbol(k, nu, c0, tau2));
        let rel = relative_leak(&out, leak);
        if rel > self.cfg.quad_tol {
            return Err(Error::ImaginaryLeak {
                leak: rel,
                tol: self.cfg.quad_tol,
            });
        }
        Ok(out)
    }

    /// `M^nu f` through the discrete Fourier transform.
    pub fn apply_multiplier(&self, f: &GridFunction, nu: f64) -> Result<GridFunction> {
        self.check_grid(f)?;
        Ok(self.wrap(self.multiplier_raw(&f.values, nu)?))
    }

    /// `(c0 + tau2 d/dX) f` with the spectral derivative.
    pub fn apply_linear_part(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check_grid(f)?;
        let d = self.spectral.derivative(&f.values);
        let (c0, tau2) = (self.cfg.c0, self.params.tau2());
        Ok(self.wrap(
            f.values
                .iter()
                .zip(&d)
                .map(|(v, dv)| c0 * v + tau2 * dv)
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver(n: usize) -> LongWave {
        let p = ModelParams::reference();
        let cfg = SolverConfig {
            n,
            ..SolverConfig::new(&p, 0.1).unwrap()
        };
        LongWave::new(&p, cfg).unwrap()
    }

    #[test]
    fn window_resolves_the_tails() {
        let lw = solver(1 << 12);
        let prof = lw.profile;
        let l = lw.grid.half_width;
        assert!(prof.big_sigma(l) / prof.big_sigma(-l) < 1e-12);
        assert!(lw.sigma().edge_magnitude() < 1e-10 * lw.sigma().sup_norm());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let p = ModelParams::reference();
        let cfg = SolverConfig {
            n: 256,
            ..SolverConfig::new(&p, 0.1).unwrap()
        };
        assert!(matches!(LongWave::new(&p, cfg), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn e_operator_basics() {
        let lw = solver(1 << 12);
        let zero = GridFunction::zeros(lw.grid);
        assert_eq!(lw.op_e(&zero, -1.0, 2.0).unwrap(), 1.0);
        let s = lw.sigma();
        assert_eq!(lw.op_e(&s, 0.3, 0.3).unwrap(), 1.0);
        let l = lw.grid.half_width;
        let got = lw.op_e(&s, -l, l).unwrap();
        let want = (lw.params.kappa() / lw.cfg.c0 * lw.profile.big_sigma(-l)).exp();
        assert!((got / want - 1.0).abs() < 1e-6);
        assert!(matches!(
            lw.op_e(&s, -l - 1.0, 0.0),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn zero_inputs_give_zero() {
        let lw = solver(1 << 12);
        let zero = GridFunction::zeros(lw.grid);
        let s = lw.sigma();
        let z = lw.zeta();
        assert_eq!(lw.op_p1(&zero, 0.1).unwrap().sup_norm(), 0.0);
        assert_eq!(lw.op_p2(&s, &zero, 0.1).unwrap().sup_norm(), 0.0);
        assert_eq!(lw.op_r1(&zero, 0.1).unwrap().sup_norm(), 0.0);
        assert_eq!(lw.op_n(&zero, &z, 0.1).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn p1_of_sigma_is_zeta() {
        let lw = solver(1 << 15);
        let p1 = lw.op_p1(&lw.sigma(), 0.0).unwrap();
        let err = lw
            .grid
            .points()
            .iter()
            .zip(&p1.values)
            .map(|(&x, v)| (v - lw.profile.zeta(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < lw.cfg.quad_tol, "sup error {err}");
    }

    #[test]
    fn r1_at_zero_is_half_sigma_squared() {
        let lw = solver(1 << 15);
        let r1 = lw.op_r1(&lw.sigma(), 0.0).unwrap();
        let p = &lw.params;
        let c = p.alpha * p.kappa() * p.tau1() / (lw.cfg.c0 * lw.cfg.c0);
        let err = lw
            .grid
            .points()
            .iter()
            .zip(&r1.values)
            .map(|(&x, v)| (v - c * lw.profile.big_sigma(x).powi(2) / 2.0).abs())
            .fold(0.0, f64::max);
        assert!(err < lw.cfg.quad_tol, "sup error {err}");
    }

    #[test]
    fn r_reduces_to_r1_at_zero() {
        let lw = solver(1 << 12);
        let (s, z) = (lw.sigma(), lw.zeta());
        assert_eq!(lw.op_r(&s, &z, 0.0).unwrap(), lw.op_r1(&s, 0.0).unwrap());
        let r2 = lw.op_r2(&s, &z, 0.0).unwrap();
        let n = lw.op_n(&s, &z, 0.0).unwrap();
        let tau1 = lw.params.tau1();
        for i in 0..lw.grid.n {
            assert!((n.values[i] - tau1 * r2.values[i] * s.values[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn leading_order_equation_holds() {
        // c0 sigma + tau2 sigma' = R^0(sigma, zeta) sigma
        let lw = solver(1 << 15);
        let (s, z) = (lw.sigma(), lw.zeta());
        let r = lw.op_r(&s, &z, 0.0).unwrap();
        let sp = lw.sigma_prime();
        let tau2 = lw.params.tau2();
        let res = (0..lw.grid.n)
            .map(|i| {
                (lw.cfg.c0 * s.values[i] + tau2 * sp.values[i] - r.values[i] * s.values[i]).abs()
            })
            .fold(0.0, f64::max);
        assert!(res < lw.cfg.quad_tol, "residual {res}");
    }

    #[test]
    fn p1_moves_like_sqrt_nu() {
        let lw = solver(1 << 14);
        let s = lw.sigma();
        let base = lw.op_p1(&s, 0.0).unwrap();
        let dist = |nu: f64| {
            let p = lw.op_p1(&s, nu).unwrap();
            p.values
                .iter()
                .zip(&base.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let ratios: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&nu| dist(nu) / nu.sqrt())
            .collect();
        for w in ratios.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{ratios:?}");
        }
    }

    #[test]
    fn nonlinearity_forms_differ_only_in_the_efflux_term() {
        let p = ModelParams::reference();
        let base = SolverConfig {
            n: 1 << 12,
            ..SolverConfig::new(&p, 0.1).unwrap()
        };
        let lit = LongWave::new(&p, base).unwrap();
        let lat = LongWave::new(
            &p,
            SolverConfig {
                nonlinearity: Nonlinearity::Lattice,
                ..base
            },
        )
        .unwrap();
        let (s, z) = (lit.sigma(), lit.zeta());
        assert_eq!(
            lit.op_n(&s, &z, 0.0).unwrap(),
            lat.op_n(&s, &z, 0.0).unwrap()
        );
        let a = lit.op_n(&s, &z, 0.1).unwrap();
        let b = lat.op_n(&s, &z, 0.1).unwrap();
        let r = lit.op_r(&s, &z, 0.1).unwrap();
        let r1 = lit.op_r1(&s, 0.1).unwrap();
        let r2 = lit.op_r2(&s, &z, 0.1).unwrap();
        let (nu, tau1) = (0.1f64, p.tau1());
        for i in 0..lit.grid.n {
            let (f, k) = (s.values[i], p.k_a);
            let lit_term = nu.powf(1.5) * tau1 * f * f * r.values[i] / (k * (k + nu.powf(2.5) * f));
            let rr = r1.values[i] / tau1 + nu.sqrt() * r2.values[i];
            let lat_term = nu * nu * tau1 * f * f * rr / (k + nu.powf(2.5) * f);
            let diff = (a.values[i] + lit_term) - (b.values[i] + lat_term);
            assert!(diff.abs() < 1e-12 * (1.0 + lit_term.abs()), "{i}: {diff}");
        }
    }

    #[test]
    fn fat_tails_are_rejected() {
        let lw = solver(1 << 12);
        let flat = GridFunction::from_fn(lw.grid, |_| 1.0);
        assert!(matches!(
            lw.op_p1(&flat, 0.1),
            Err(Error::TailTooFat { .. })
        ));
        assert!(matches!(
            lw.apply_multiplier(&flat, 0.0),
            Err(Error::TailTooFat { .. })
        ));
    }
}
