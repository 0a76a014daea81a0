//! Closed-form leading-order travelling-wave profiles.
//!
//! Everything here is built on the antiderivative profile
//! `Sigma(X) = (6 c0^3 / (alpha kappa tau1 + 6 c0^2 e^{2 c0 X / tau2 + theta}))^{1/2}`,
//! the solution of the Bernoulli equation
//! `tau2 Sigma' + c0 Sigma - (alpha kappa tau1 / (6 c0^2)) Sigma^3 = 0`.
//! All evaluations go through `ln(alpha kappa tau1 + 6 c0^2 e^s)` so that
//! large `|X|` neither overflows nor loses the exponential tails.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{derived_constants, DerivedConstants, ModelParams, WaveScaling};
use crate::numerics::bisect;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileContext {
    pub dc: DerivedConstants,
    pub alpha: f64,
    pub c0: f64,
    pub theta: f64,
}

/// One row of a profile table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub x: f64,
    pub phi_a: f64,
    pub phi_p: f64,
    pub phi_r: f64,
    pub sigma: f64,
    pub big_sigma: f64,
    pub zeta: f64,
}

impl ProfileContext {
    pub fn new(p: &ModelParams, c0: f64, theta: f64) -> Result<Self> {
        let dc = derived_constants(p)?;
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c0",
                value: c0,
                reason: "speed coefficient must be strictly positive",
            });
        }
        Ok(ProfileContext {
            dc,
            alpha: p.alpha,
            c0,
            theta,
        })
    }

    /// Context with c0 = c_star, for which sup phi_A = 1.
    pub fn normalized(p: &ModelParams) -> Result<Self> {
        let c_star = derived_constants(p)?.c_star;
        Self::new(p, c_star, 0.0)
    }

    pub fn from_scaling(p: &ModelParams, s: &WaveScaling) -> Result<Self> {
        Self::new(p, s.c0, s.theta)
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    /// alpha kappa tau1
    fn a(&self) -> f64 {
        self.alpha * self.dc.kappa * self.dc.tau1
    }

    /// 6 c0^2
    fn b(&self) -> f64 {
        6.0 * self.c0 * self.c0
    }

    /// r = c0 / tau2; sigma decays like e^{-r X} on the right.
    pub fn decay_rate(&self) -> f64 {
        self.c0 / self.dc.tau2
    }

    fn exponent(&self, x: f64) -> f64 {
        2.0 * self.decay_rate() * x + self.theta
    }

    /// ln(a + b e^s), evaluated without overflow.
    fn log_denominator(&self, x: f64) -> f64 {
        let la = self.a().ln();
        let lb = self.b().ln() + self.exponent(x);
        let (hi, lo) = if la > lb { (la, lb) } else { (lb, la) };
        hi + (lo - hi).exp().ln_1p()
    }

    pub fn big_sigma(&self, x: f64) -> f64 {
        let c0 = self.c0;
        (0.5 * ((6.0 * c0 * c0 * c0).ln() - self.log_denominator(x))).exp()
    }

    /// sigma = -Sigma'.
    pub fn sigma(&self, x: f64) -> f64 {
        let c0 = self.c0;
        let log = 1.5 * (6.0 * c0 * c0 * c0).ln() + self.exponent(x)
            - 1.5 * self.log_denominator(x)
            - self.dc.tau2.ln();
        log.exp()
    }

    /// Derivative of sigma, `sigma * 2r (1 - 3/2 b e^s / (a + b e^s))`.
    pub fn sigma_prime(&self, x: f64) -> f64 {
        let frac = (self.b().ln() + self.exponent(x) - self.log_denominator(x)).exp();
        2.0 * self.decay_rate() * self.sigma(x) * (1.0 - 1.5 * frac)
    }

    /// Coefficient of the Bernoulli equation linearized about Sigma,
    /// `rho = (c0 - (alpha kappa tau1 / c0^2) Sigma^2 / 2) / tau2`.
    pub fn linearized_rate(&self, x: f64) -> f64 {
        let r = self.decay_rate();
        r * (1.0 - 3.0 * (self.a().ln() - self.log_denominator(x)).exp())
    }

    /// Antiderivative of [`Self::linearized_rate`],
    /// `ln((a + b e^s)^{3/2} / e^s)`.
    pub fn linearized_rate_primitive(&self, x: f64) -> f64 {
        1.5 * self.log_denominator(x) - self.exponent(x)
    }

    pub fn zeta(&self, x: f64) -> f64 {
        self.alpha / self.c0 * self.big_sigma(x)
    }

    /// Leading-order (phi_A, phi_P, phi_R).
    pub fn phi_star(&self, x: f64) -> (f64, f64, f64) {
        let ld = self.log_denominator(x);
        let phi_a = self.sigma(x);
        let phi_p = (6.0 * self.c0).sqrt() * self.alpha * (-0.5 * ld).exp();
        let phi_r = 3.0 * self.alpha * self.dc.kappa * self.c0 * (-ld).exp();
        (phi_a, phi_p, phi_r)
    }

    /// Sigma(-inf) = (6 c0^3 / (alpha kappa tau1))^{1/2}; also the total mass of sigma.
    pub fn sigma_mass(&self) -> f64 {
        (6.0 * self.c0.powi(3) / self.a()).sqrt()
    }

    /// Limits of (phi_P, phi_R) as X -> -inf.
    pub fn residue_limits(&self) -> (f64, f64) {
        (
            (6.0 * self.c0 * self.alpha * self.alpha / self.a()).sqrt(),
            3.0 * self.c0 / self.dc.tau1,
        )
    }

    /// Location of the sigma maximum, where e^s = 2a/b.
    pub fn peak_location(&self) -> f64 {
        ((2.0 * self.a() / self.b()).ln() - self.theta) / (2.0 * self.decay_rate())
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma(self.peak_location())
    }

    /// Distance between the two points where phi_A equals
    /// `threshold * sup phi_A`.
    pub fn w_star(&self, threshold: f64) -> Result<f64> {
        let (left, right) = self.level_crossings(threshold)?;
        Ok(right - left)
    }

    pub fn level_crossings(&self, threshold: f64) -> Result<(f64, f64)> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::NoBracket("threshold must lie in (0, 1)"));
        }
        let x_peak = self.peak_location();
        let level = threshold * self.sigma_max();
        let f = |x: f64| self.sigma(x) - level;
        let step = 1.0 / self.decay_rate();
        let mut lo = x_peak - step;
        while f(lo) > 0.0 {
            lo -= step;
        }
        let mut hi = x_peak + step;
        while f(hi) > 0.0 {
            hi += step;
        }
        let left = bisect(f, lo, x_peak, 1e-13)?;
        let right = bisect(f, x_peak, hi, 1e-13)?;
        Ok((left, right))
    }

    pub fn row(&self, x: f64) -> ProfileRow {
        let (phi_a, phi_p, phi_r) = self.phi_star(x);
        ProfileRow {
            x,
            phi_a,
            phi_p,
            phi_r,
            sigma: self.sigma(x),
            big_sigma: self.big_sigma(x),
            zeta: self.zeta(x),
        }
    }

    /// `n >= 2` rows uniformly spaced on `[x_min, x_max]`.
    pub fn tabulate(&self, x_min: f64, x_max: f64, n: usize) -> Vec<ProfileRow> {
        let n = n.max(2);
        let dx = (x_max - x_min) / (n - 1) as f64;
        (0..n).map(|i| self.row(x_min + i as f64 * dx)).collect()
    }

    /// Half-width L of a window centred on the sigma peak outside which
    /// Sigma drops below `rel_tol * Sigma(-inf)` on the right and sigma below
    /// `rel_tol * sup sigma` on the left.
    pub fn support_half_width(&self, rel_tol: f64) -> f64 {
        let r = self.decay_rate();
        let right = (1.0 / rel_tol).ln() / r;
        let left = (1.0 / rel_tol).ln() / (2.0 * r);
        self.peak_location().abs() + right.max(left) + 2.0 / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ProfileContext {
        ProfileContext::normalized(&ModelParams::reference()).unwrap()
    }

    #[test]
    fn big_sigma_limits() {
        let c = ctx();
        assert!(c.big_sigma(200.0) < 1e-200);
        assert!((c.big_sigma(-200.0) - c.sigma_mass()).abs() < 1e-15);
        assert!(c.big_sigma(1e6).is_finite() && c.big_sigma(-1e6).is_finite());
    }

    #[test]
    fn theta_is_a_translation() {
        let c = ctx();
        let theta = 0.7;
        let shifted = c.with_theta(theta);
        let dx = theta * c.dc.tau2 / (2.0 * c.c0);
        for i in -20..20 {
            let x = i as f64 * 0.05;
            assert!((shifted.big_sigma(x) - c.big_sigma(x + dx)).abs() < 1e-14);
            let (a1, p1, r1) = shifted.phi_star(x);
            let (a0, p0, r0) = c.phi_star(x + dx);
            assert!((a1 - a0).abs() < 1e-13 && (p1 - p0).abs() < 1e-14 && (r1 - r0).abs() < 1e-16);
        }
    }

    #[test]
    fn bernoulli_residual_vanishes() {
        let c = ctx();
        let coef = c.a() / (6.0 * c.c0 * c.c0);
        for i in -100..100 {
            let x = i as f64 * 0.03;
            let s = c.big_sigma(x);
            let res = -c.dc.tau2 * c.sigma(x) + c.c0 * s - coef * s.powi(3);
            assert!(res.abs() < 1e-13, "residual {res} at {x}");
        }
    }

    #[test]
    fn sigma_is_minus_sigma_prime() {
        let c = ctx();
        let h = 1e-4;
        for i in -40..40 {
            let x = i as f64 * 0.05;
            let fd = -(c.big_sigma(x + h) - c.big_sigma(x - h)) / (2.0 * h);
            assert!((fd - c.sigma(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn derivative_helpers_match_differences() {
        let c = ctx().with_theta(0.3);
        let h = 1e-5;
        for i in -30..30 {
            let x = i as f64 * 0.1;
            let fd = (c.sigma(x + h) - c.sigma(x - h)) / (2.0 * h);
            assert!((fd - c.sigma_prime(x)).abs() < 1e-7);
            let fd = (c.linearized_rate_primitive(x + h) - c.linearized_rate_primitive(x - h))
                / (2.0 * h);
            assert!((fd - c.linearized_rate(x)).abs() < 1e-7);
            let s = c.big_sigma(x);
            let rho = (c.c0 - c.a() / (c.c0 * c.c0) * s * s / 2.0) / c.dc.tau2;
            assert!((rho - c.linearized_rate(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn zeta_is_scaled_big_sigma() {
        let c = ctx();
        for x in [-3.0, -0.5, 0.0, 0.4, 2.0] {
            assert!((c.zeta(x) / c.big_sigma(x) - c.alpha / c.c0).abs() < 1e-14);
        }
        assert!(c.zeta(50.0) < 1e-50);
        assert!((c.zeta(-50.0) - c.alpha / c.c0 * c.sigma_mass()).abs() < 1e-14);
    }

    #[test]
    fn normalized_peak_is_one() {
        let c = ctx();
        assert!((c.sigma_max() - 1.0).abs() < 1e-13);
        let h = 1e-5;
        let xp = c.peak_location();
        let slope = (c.sigma(xp + h) - c.sigma(xp - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-8);
    }

    #[test]
    fn residue_limits_match_prefactors() {
        let c = ctx();
        let (lp, lr) = c.residue_limits();
        let (_, p_left, r_left) = c.phi_star(-60.0);
        assert!((p_left - lp).abs() < 1e-14);
        assert!((r_left - lr).abs() < 1e-16);
        assert!((lr - c.dc.hr_star).abs() < 1e-15);
        assert!((lp - c.dc.hp_star).abs() < 1e-14);
        let (a_right, p_right, r_right) = c.phi_star(60.0);
        assert!(a_right < 1e-50 && p_right < 1e-50 && r_right < 1e-50);
        assert!(c.phi_star(-60.0).0 < 1e-50);
    }

    #[test]
    fn profile_shape_identity() {
        // phi_A [a + b e^s]^{3/2} / e^s is X-independent
        let c = ctx();
        let k = |x: f64| {
            let s = c.exponent(x);
            c.phi_star(x).0 * (c.a() + c.b() * s.exp()).powf(1.5) / s.exp()
        };
        let k0 = k(0.0);
        for x in [-2.0, -1.0, 0.5, 1.5] {
            assert!((k(x) / k0 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn width_is_finite_and_scales() {
        let c = ctx();
        let w = c.w_star(0.05).unwrap();
        assert!(w > 0.0 && w.is_finite());
        assert!(c.w_star(1.0).is_err());
        assert!(c.w_star(0.0).is_err());
        // doubling tau2 at fixed c0 stretches X by two
        let mut p = ModelParams::reference();
        p.t_diff *= 2.0;
        let stretched = ProfileContext::new(&p, c.c0, 0.0).unwrap();
        let w2 = stretched.w_star(0.05).unwrap();
        assert!((w2 / w - 2.0).abs() < 1e-9);
    }
}
