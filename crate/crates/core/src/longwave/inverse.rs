//! The linearization `T` about `sigma` and its variation-of-constants right
//! inverse `S`.

use crate::error::Result;

use super::grid::GridFunction;
use super::operators::LongWave;
use super::quadrature::tail_integral;

/// `(int_0^1 e^{-mu u} du, int_0^1 u e^{-mu u} du)`.
fn exp_weights(mu: f64) -> (f64, f64) {
    if mu.abs() < 1e-2 {
        let m2 = mu * mu;
        let phi0 = 1.0 - mu / 2.0 + m2 / 6.0 - m2 * mu / 24.0 + m2 * m2 / 120.0;
        let phi1 = 0.5 - mu / 3.0 + m2 / 8.0 - m2 * mu / 30.0 + m2 * m2 / 144.0;
        (phi0, phi1)
    } else {
        let phi0 = -(-mu).exp_m1() / mu;
        (phi0, (phi0 - (-mu).exp()) / mu)
    }
}

impl LongWave {
    fn r1_prefactor(&self) -> f64 {
        let p = &self.params;
        p.alpha * p.kappa() * p.tau1() / (self.cfg.c0 * self.cfg.c0)
    }

    /// Derivative of `R1^0` at `sigma` in direction `f`:
    /// `(alpha kappa tau1 / c0^2) [int_X^inf (int_W^inf sigma) f + int_X^inf (int_W^inf f) sigma]`.
    pub(crate) fn dr1_raw(&self, f: &[f64]) -> Vec<f64> {
        let h = self.h();
        let f_tail = tail_integral(f, h);
        let c = self.r1_prefactor();
        let integrand: Vec<f64> = (0..f.len())
            .map(|i| c * (self.sigma_tail[i] * f[i] + f_tail[i] * self.sigma[i]))
            .collect();
        tail_integral(&integrand, h)
    }

    pub(crate) fn t_raw(&self, f: &[f64]) -> Result<Vec<f64>> {
        let dr = self.dr1_raw(f);
        let inner: Vec<f64> = (0..f.len())
            .map(|i| self.r1_sigma[i] * f[i] + dr[i] * self.sigma[i])
            .collect();
        let m = self.multiplier_raw(&inner, 0.0)?;
        Ok(f.iter().zip(&m).map(|(a, b)| a - b).collect())
    }

    /// `(S g)(X) = rho(X) int_0^X e^{P(W) - P(X)} (H g)(W) dW - (H g)(X)` with
    /// `H g = r int_X^inf g - g` and `P' = rho`.
    ///
    /// `Q(X) = int_0^X e^{P(W) - P(X)} (H g)(W) dW` is accumulated outward
    /// from the origin with `P` and `H g` linear on each cell and the
    /// exponential integrated exactly. Only the ratios `e^{P(W) - P(X)}`
    /// appear, so nothing overflows, and the far-left cancellation
    /// `rho Q - H g -> 0` holds to round-off rather than to O(h^2).
    pub(crate) fn s_raw(&self, g: &[f64]) -> Vec<f64> {
        let h = self.h();
        let n = g.len();
        let r = self.profile.decay_rate();
        let g_tail = tail_integral(g, h);
        let hg: Vec<f64> = (0..n).map(|i| r * g_tail[i] - g[i]).collect();
        let pts = self.grid.points();
        let big_p: Vec<f64> = pts
            .iter()
            .map(|&x| self.profile.linearized_rate_primitive(x))
            .collect();
        let rho: Vec<f64> = pts
            .iter()
            .map(|&x| self.profile.linearized_rate(x))
            .collect();

        let mut q = vec![0.0; n];
        let o = self.grid.origin();
        for i in o..n - 1 {
            let mu = big_p[i + 1] - big_p[i];
            let (phi0, phi1) = exp_weights(mu);
            q[i + 1] = (-mu).exp() * q[i] + h * (hg[i + 1] * phi0 + (hg[i] - hg[i + 1]) * phi1);
        }
        for i in (1..=o).rev() {
            let mu = big_p[i - 1] - big_p[i];
            let (phi0, phi1) = exp_weights(mu);
            q[i - 1] = (-mu).exp() * q[i] - h * (hg[i - 1] * phi0 + (hg[i] - hg[i - 1]) * phi1);
        }
        (0..n).map(|i| rho[i] * q[i] - hg[i]).collect()
    }

    /// `T f = f - M^0 [R1^0(sigma) f + (D R1^0(sigma) f) sigma]`.
    pub fn op_t(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check_grid(f)?;
        self.check_tail(&f.values)?;
        Ok(self.wrap(self.t_raw(&f.values)?))
    }

    pub fn op_s(&self, g: &GridFunction) -> Result<GridFunction> {
        self.check_grid(g)?;
        self.check_tail(&g.values)?;
        Ok(self.wrap(self.s_raw(&g.values)))
    }

    pub fn op_dr1(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check_grid(f)?;
        Ok(self.wrap(self.dr1_raw(&f.values)))
    }
}

#[cfg(test)]
mod tests {
    use super::super::SolverConfig;
    use super::*;
    use crate::model::ModelParams;

    fn solver(n: usize) -> LongWave {
        let p = ModelParams::reference();
        let cfg = SolverConfig {
            n,
            ..SolverConfig::new(&p, 0.1).unwrap()
        };
        LongWave::new(&p, cfg).unwrap()
    }

    fn gaussian(lw: &LongWave, center: f64, width: f64) -> GridFunction {
        GridFunction::from_fn(lw.grid, |x| (-((x - center) / width).powi(2) / 2.0).exp())
    }

    fn rel_l2(a: &GridFunction, b: &GridFunction) -> f64 {
        a.zip_with(b, |x, y| x - y).unwrap().l2_norm() / b.l2_norm()
    }

    #[test]
    fn s_is_a_right_inverse() {
        let lw = solver(1 << 16);
        for (c, w) in [(0.0, 0.5), (1.0, 0.3), (-1.5, 0.8)] {
            let g = gaussian(&lw, c, w);
            let tsg = lw.op_t(&lw.op_s(&g).unwrap()).unwrap();
            let err = rel_l2(&tsg, &g);
            assert!(err < 1e-6, "center {c}, width {w}: {err}");
        }
    }

    #[test]
    fn exp_weights_branches_agree() {
        for mu in [-0.3, -1e-2, -9.99e-3, 1e-5, 9.99e-3, 1e-2, 0.7] {
            let (p0, p1) = exp_weights(mu);
            let m = 20000;
            let (mut q0, mut q1) = (0.0, 0.0);
            for k in 0..m {
                let u = (k as f64 + 0.5) / m as f64;
                q0 += (-mu * u).exp() / m as f64;
                q1 += u * (-mu * u).exp() / m as f64;
            }
            assert!(
                (p0 - q0).abs() < 1e-9 && (p1 - q1).abs() < 1e-9,
                "mu = {mu}"
            );
        }
    }

    #[test]
    fn s_output_decays() {
        let lw = solver(1 << 12);
        let g = gaussian(&lw, 0.3, 0.5);
        let sg = lw.op_s(&g).unwrap();
        assert!(
            sg.edge_magnitude() < 1e-11 * sg.sup_norm(),
            "{}",
            sg.edge_magnitude()
        );
    }

    #[test]
    fn s_is_linear() {
        let lw = solver(1 << 12);
        let g1 = gaussian(&lw, 0.5, 0.4);
        let g2 = gaussian(&lw, -0.7, 0.9);
        let combo = g1.zip_with(&g2, |a, b| 2.5 * a - 1.25 * b).unwrap();
        let lhs = lw.op_s(&combo).unwrap();
        let s1 = lw.op_s(&g1).unwrap();
        let s2 = lw.op_s(&g2).unwrap();
        let rhs = s1.zip_with(&s2, |a, b| 2.5 * a - 1.25 * b).unwrap();
        let diff = lhs.zip_with(&rhs, |a, b| a - b).unwrap().sup_norm();
        assert!(diff < 1e-12 * rhs.sup_norm());
        assert!(lhs.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn translation_mode_is_in_the_kernel() {
        let lw = solver(1 << 16);
        let sp = lw.sigma_prime();
        let t = lw.op_t(&sp).unwrap();
        assert!(
            t.l2_norm() < lw.cfg.quad_tol * sp.l2_norm(),
            "{}",
            t.l2_norm() / sp.l2_norm()
        );
    }

    #[test]
    fn dr1_is_the_derivative_of_r1() {
        let lw = solver(1 << 12);
        let f = gaussian(&lw, 0.2, 0.6);
        let eps = 1e-6;
        let plus = lw.sigma().zip_with(&f, |s, v| s + eps * v).unwrap();
        let minus = lw.sigma().zip_with(&f, |s, v| s - eps * v).unwrap();
        let fd = lw
            .op_r1(&plus, 0.0)
            .unwrap()
            .zip_with(&lw.op_r1(&minus, 0.0).unwrap(), |a, b| {
                (a - b) / (2.0 * eps)
            })
            .unwrap();
        let dr = lw.op_dr1(&f).unwrap();
        let diff = fd.zip_with(&dr, |a, b| a - b).unwrap().sup_norm();
        assert!(diff < 1e-8 * dr.sup_norm(), "{diff}");
    }
}
