use serde::Serialize;

use crate::error::{Error, Result};

use super::grid::{derivative_fd, sup, GridFunction};
use super::operators::LongWave;

/// Per-iteration diagnostics of [`LongWave::picard_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `sup |eta1_new - eta1_old| + sup |eta2_new - eta2_old|`.
    pub step: f64,
    pub residual1: f64,
    pub residual2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub nu: f64,
    pub eta1: GridFunction,
    pub eta2: GridFunction,
    /// Picard iterations taken.
    pub iterations: usize,
    /// Defect-correction sweeps after the Picard phase.
    pub polish_iterations: usize,
    /// Sup norm of the `psi1` equation defect over `sup sigma`.
    pub residual1: f64,
    /// Sup norm of the `psi2` equation defect over `sup zeta`.
    pub residual2: f64,
    /// `||eta1||_{H^1_q} + ||eta2||_{W^{1,infty}}`.
    pub eta_norm: f64,
    pub history: Vec<IterationRecord>,
}

impl FixedPointResult {
    pub fn psi1(&self, lw: &LongWave) -> GridFunction {
        lw.wrap(
            self.eta1
                .values
                .iter()
                .zip(&lw.sigma)
                .map(|(e, s)| s + e)
                .collect(),
        )
    }

    pub fn psi2(&self, lw: &LongWave) -> GridFunction {
        lw.wrap(
            self.eta2
                .values
                .iter()
                .zip(&lw.zeta)
                .map(|(e, z)| z + e)
                .collect(),
        )
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

impl LongWave {
    /// `||f||_{H^1_q} = ||e^{q|X|} f||_{L^2} + ||e^{q|X|} f'||_{L^2}`.
    pub fn norm_h1q(&self, f: &GridFunction) -> f64 {
        let h = self.h();
        let q = self.cfg.q;
        let d = derivative_fd(&f.values, h);
        let weighted = |v: &[f64]| {
            let s: f64 = self
                .grid
                .points()
                .iter()
                .zip(v)
                .map(|(x, y)| {
                    let w = (q * x.abs()).exp() * y;
                    w * w
                })
                .sum();
            (h * s).sqrt()
        };
        weighted(&f.values) + weighted(&d)
    }

    /// `||f||_{W^{1,infty}} = sup |f| + sup |f'|`.
    pub fn norm_w1inf(&self, f: &GridFunction) -> f64 {
        sup(&f.values) + sup(&derivative_fd(&f.values, self.h()))
    }

    fn eta_norm(&self, eta1: &[f64], eta2: &[f64]) -> f64 {
        self.norm_h1q(&self.wrap(eta1.to_vec())) + self.norm_w1inf(&self.wrap(eta2.to_vec()))
    }

    /// Defects of both profile equations at `(psi1, psi2)`, unscaled.
    fn defects(&self, psi1: &[f64], psi2: &[f64], nu: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let r1 = self.r1_raw(psi1, nu);
        let mut inner = mul(&r1, psi1);
        if nu > 0.0 {
            let n = self.n_raw(psi1, psi2, nu)?;
            let s = nu.sqrt();
            inner.iter_mut().zip(&n).for_each(|(a, b)| *a += s * b);
        }
        let f1 = sub(psi1, &self.multiplier_raw(&inner, nu)?);
        let p1 = self.p1_raw(psi1, nu);
        let p2 = self.p2_raw(psi1, psi2, nu)?;
        let f2: Vec<f64> = (0..psi2.len())
            .map(|i| psi2[i] - p1[i] - nu * p2[i])
            .collect();
        Ok((f1, f2))
    }

    fn scaled(&self, f1: &[f64], f2: &[f64]) -> (f64, f64) {
        (sup(f1) / sup(&self.sigma), sup(f2) / sup(&self.zeta))
    }

    /// Scaled defects `(residual1, residual2)` of the profile equations at
    /// `(sigma + eta1, zeta + eta2)`.
    pub fn residuals(
        &self,
        eta1: &GridFunction,
        eta2: &GridFunction,
        nu: f64,
    ) -> Result<(f64, f64)> {
        self.check_grid(eta1)?;
        self.check_grid(eta2)?;
        let psi1 = add(&self.sigma, &eta1.values);
        let psi2 = add(&self.zeta, &eta2.values);
        let (f1, f2) = self.defects(&psi1, &psi2, nu)?;
        Ok(self.scaled(&f1, &f2))
    }

    /// One application of the fixed-point map, returning the new `(eta1, eta2)`.
    pub fn fixed_point_map(
        &self,
        eta1: &[f64],
        eta2: &[f64],
        nu: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let psi1 = add(&self.sigma, eta1);
        let psi2 = add(&self.zeta, eta2);
        let r1_nu = self.r1_raw(&psi1, nu);
        let r1_0 = self.r1_raw(&psi1, 0.0);
        let dr = self.dr1_raw(eta1);
        let a = mul(&r1_nu, &psi1);

        // V11 + V15 share M^nu; V12..V14 share M^0
        let mut with_nu = a.clone();
        if nu > 0.0 {
            let n = self.n_raw(&psi1, &psi2, nu)?;
            let s = nu.sqrt();
            with_nu.iter_mut().zip(&n).for_each(|(x, y)| *x += s * y);
        }
        let mut with_zero = vec![0.0; a.len()];
        for i in 0..a.len() {
            let v12 = (r1_nu[i] - r1_0[i]) * psi1[i];
            let v13 = (r1_0[i] - self.r1_sigma[i] - dr[i]) * self.sigma[i];
            let v14 = (r1_0[i] - self.r1_sigma[i]) * eta1[i];
            with_zero[i] = -a[i] + v12 + v13 + v14;
        }
        let sum_v = add(
            &self.multiplier_raw(&with_nu, nu)?,
            &self.multiplier_raw(&with_zero, 0.0)?,
        );
        let new_eta1 = self.s_raw(&sum_v);

        let v21 = sub(&self.p1_raw(&psi1, nu), &self.p1_raw(&psi1, 0.0));
        let v22 = sub(&self.p1_raw(&add(&self.sigma, &new_eta1), 0.0), &self.zeta);
        let p2 = self.p2_raw(&psi1, &psi2, nu)?;
        let new_eta2 = (0..a.len()).map(|i| v21[i] + v22[i] + nu * p2[i]).collect();
        Ok((new_eta1, new_eta2))
    }

    /// Picard iteration from `eta = 0` at `cfg.nu`, followed by optional
    /// defect correction.
    pub fn picard_solve(&self) -> Result<FixedPointResult> {
        let nu = self.cfg.nu;
        let n = self.grid.n;
        let d = self.cfg.damping;
        let mut eta1 = vec![0.0; n];
        let mut eta2 = vec![0.0; n];
        let mut history = Vec::new();
        let mut converged = false;
        let mut last_step = f64::INFINITY;
        for it in 1..=self.cfg.max_iter {
            let (m1, m2) = self.fixed_point_map(&eta1, &eta2, nu)?;
            let next1: Vec<f64> = (0..n).map(|i| (1.0 - d) * eta1[i] + d * m1[i]).collect();
            let next2: Vec<f64> = (0..n).map(|i| (1.0 - d) * eta2[i] + d * m2[i]).collect();
            // the H^1_q weight e^{q L} would lift round-off above picard_tol
            last_step = sup(&sub(&next1, &eta1)) + sup(&sub(&next2, &eta2));
            eta1 = next1;
            eta2 = next2;
            if !last_step.is_finite() {
                break;
            }
            let (f1, f2) = self.defects(&add(&self.sigma, &eta1), &add(&self.zeta, &eta2), nu)?;
            let (residual1, residual2) = self.scaled(&f1, &f2);
            history.push(IterationRecord {
                iteration: it,
                step: last_step,
                residual1,
                residual2,
            });
            if last_step < self.cfg.picard_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: history.len(),
                last_step,
            });
        }
        let iterations = history.len();

        let mut polish_iterations = 0;
        // at nu = 0 the map vanishes identically and (sigma, zeta) is returned as is
        if let (Some(tol), true) = (self.cfg.polish_tol, nu > 0.0) {
            while polish_iterations < self.cfg.max_polish {
                let psi1 = add(&self.sigma, &eta1);
                let (f1, f2) = self.defects(&psi1, &add(&self.zeta, &eta2), nu)?;
                let (r1, r2) = self.scaled(&f1, &f2);
                if r1 < tol && r2 < tol {
                    break;
                }
                let correction = self.s_raw(&f1);
                eta1 = sub(&eta1, &correction);
                let psi1 = add(&self.sigma, &eta1);
                let psi2 = add(&self.zeta, &eta2);
                let p1 = self.p1_raw(&psi1, nu);
                let p2 = self.p2_raw(&psi1, &psi2, nu)?;
                eta2 = (0..n).map(|i| p1[i] + nu * p2[i] - self.zeta[i]).collect();
                polish_iterations += 1;
            }
        }

        let (f1, f2) = self.defects(&add(&self.sigma, &eta1), &add(&self.zeta, &eta2), nu)?;
        let (residual1, residual2) = self.scaled(&f1, &f2);
        Ok(FixedPointResult {
            nu,
            eta_norm: self.eta_norm(&eta1, &eta2),
            eta1: self.wrap(eta1),
            eta2: self.wrap(eta2),
            iterations,
            polish_iterations,
            residual1,
            residual2,
            history,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Nonlinearity, SolverConfig};
    use super::*;
    use crate::model::ModelParams;

    fn solver(nu: f64, n: usize) -> LongWave {
        solver_with(nu, n, Nonlinearity::Literal)
    }

    fn solver_with(nu: f64, n: usize, nonlinearity: Nonlinearity) -> LongWave {
        let p = ModelParams::reference();
        let cfg = SolverConfig {
            n,
            nonlinearity,
            ..SolverConfig::new(&p, nu).unwrap()
        };
        LongWave::new(&p, cfg).unwrap()
    }

    /// Residuals fall until they reach the consistency floor of the discrete map.
    fn assert_contracting(res: &FixedPointResult) {
        let floor = res.history.last().unwrap().residual1 * 1.1;
        for w in res.history[1..].windows(2) {
            assert!(
                w[1].residual1 <= w[0].residual1 || w[1].residual1 <= floor,
                "{:?}",
                res.history
            );
        }
    }

    #[test]
    fn zero_nu_is_solved_by_the_leading_profile() {
        let lw = solver(0.0, 1 << 14);
        let res = lw.picard_solve().unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.eta1.sup_norm(), 0.0);
        assert_eq!(res.eta2.sup_norm(), 0.0);
        assert_eq!(res.eta_norm, 0.0);
        assert!(res.residual1 < lw.cfg.quad_tol && res.residual2 < lw.cfg.quad_tol);
    }

    #[test]
    fn norms_are_homogeneous_and_subadditive() {
        let lw = solver(0.1, 1 << 12);
        let f = lw.sigma();
        let g = lw.sigma_prime();
        let n = lw.norm_h1q(&f);
        let scaled = f.map(|v| -3.0 * v);
        assert!((lw.norm_h1q(&scaled) - 3.0 * n).abs() < 1e-12 * n);
        let sum = f.zip_with(&g, |a, b| a + b).unwrap();
        assert!(lw.norm_h1q(&sum) <= n + lw.norm_h1q(&g) + 1e-12);
        assert!(lw.norm_w1inf(&sum) <= lw.norm_w1inf(&f) + lw.norm_w1inf(&g) + 1e-12);
        assert_eq!(lw.norm_h1q(&GridFunction::zeros(lw.grid)), 0.0);
    }

    #[test]
    fn small_nu_converges_with_small_residuals() {
        let lw = solver(0.01, 1 << 14);
        let res = lw.picard_solve().unwrap();
        assert!(res.iterations < lw.cfg.max_iter);
        assert!(res.residual1 < 1e-8 && res.residual2 < 1e-8, "{res:?}");
        assert!(res.eta_norm > 0.0 && res.eta_norm.is_finite());
        assert_contracting(&res);
    }

    #[test]
    fn lattice_form_converges_at_moderate_nu() {
        let lw = solver_with(0.1, 1 << 14, Nonlinearity::Lattice);
        let res = lw.picard_solve().unwrap();
        assert!(res.residual1 < 1e-8 && res.residual2 < 1e-8, "{res:?}");
        assert_contracting(&res);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let p = ModelParams::reference();
        let cfg = SolverConfig {
            n: 1 << 12,
            max_iter: 2,
            picard_tol: 1e-14,
            ..SolverConfig::new(&p, 0.01).unwrap()
        };
        let lw = LongWave::new(&p, cfg).unwrap();
        assert!(matches!(
            lw.picard_solve(),
            Err(Error::NoConvergence { iterations: 2, .. })
        ));
    }
}
