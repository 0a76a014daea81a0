//! Numerical realization of the long-wave fixed-point construction.
//!
//! In the scaled variables a travelling pulse is a pair `(psi1, psi2)` on the
//! real line solving
//!
//! ```text
//! psi1 = M^nu ( R1^nu(psi1) psi1 + nu^{1/2} N^nu(psi1, psi2) )
//! psi2 = P1^nu(psi1) + nu P2^nu(psi1, psi2)
//! ```
//!
//! which at `nu = 0` is solved by `(sigma, zeta)`. For `nu > 0` the correction
//! `eta = (psi1 - sigma, psi2 - zeta)` is found by Picard iteration on
//! `eta1 = S sum V1k(eta)`, `eta2 = V21 + V22 + V23`, where `S` is an explicit
//! right inverse of the linearization `T`.
//!
//! Functions live on a uniform grid over `[-L, L)`. Tail integrals
//! `int_X^infty` are cumulative trapezoid sums from the right edge and the
//! multiplier is applied with the FFT, both of which assume the decaying
//! inputs are negligible at the edges; this is checked against `tail_tol`.

mod grid;
mod inverse;
mod multiplier;
mod operators;
mod picard;
pub mod quadrature;

pub use grid::{Grid, GridFunction};
pub use multiplier::{
    multiplier_symbol, multiplier_symbol_complex, symbol_sup_distance, Spectral, SERIES_THRESHOLD,
};
pub use operators::LongWave;
pub use picard::{FixedPointResult, IterationRecord};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derived_constants, ModelParams};

/// Form of the efflux correction inside `N^nu`.
///
/// `Literal` evaluates `nu^{3/2} tau1 n1^nu(f, R^nu)` as written. There
/// `R1^nu` already carries the factor `tau1`, so the correction scales like
/// `nu^2 tau1^2` and dominates the iteration once `nu^2 tau1` is of order one.
/// `Lattice` uses the form obtained by inserting the long-wave Ansatz into
/// the lattice efflux `T_act R A / (k_a + A)` directly:
/// `nu^2 tau1 k_a n1^nu(f, R1^nu / tau1 + nu^{1/2} R2^nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    #[default]
    Literal,
    Lattice,
}

impl std::str::FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Nonlinearity::Literal),
            "lattice" => Ok(Nonlinearity::Lattice),
            other => Err(Error::InvalidInput(format!(
                "unknown nonlinearity {other:?}; expected literal or lattice"
            ))),
        }
    }
}

/// Settings of one long-wave solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Scaling parameter, `nu = epsilon^{2/5}`.
    pub nu: f64,
    /// Speed coefficient of the leading-order profile.
    pub c0: f64,
    /// Phase of the leading-order profile.
    pub theta: f64,
    /// Weight rate of the `H^1_q` norm, `0 < q < c0 / tau2`.
    pub q: f64,
    pub quad_tol: f64,
    pub picard_tol: f64,
    pub max_iter: usize,
    /// Grid size, a power of two.
    pub n: usize,
    /// Truncation half-width; chosen from the profile tails when `None`.
    pub half_width: Option<f64>,
    /// Largest admissible grid spacing.
    pub max_spacing: f64,
    /// Edge magnitude, relative to the sup norm, above which a decaying input
    /// is rejected.
    pub tail_tol: f64,
    /// Relaxation factor of the Picard update; 1 is the plain iteration.
    pub damping: f64,
    /// When set and `nu > 0`, the converged Picard iterate is refined by
    /// defect correction until both scaled residuals fall below this value.
    pub polish_tol: Option<f64>,
    pub max_polish: usize,
    pub nonlinearity: Nonlinearity,
}

impl SolverConfig {
    /// Defaults with `c0 = c_star` and `q` at half its admissible bound.
    pub fn new(p: &ModelParams, nu: f64) -> Result<Self> {
        let dc = derived_constants(p)?;
        Ok(SolverConfig {
            nu,
            c0: dc.c_star,
            theta: 0.0,
            q: 0.5 * dc.c_star / dc.tau2,
            quad_tol: 1e-6,
            picard_tol: 1e-10,
            max_iter: 200,
            n: 1 << 16,
            half_width: None,
            max_spacing: 1e-2,
            tail_tol: 1e-9,
            damping: 1.0,
            polish_tol: Some(1e-10),
            max_polish: 50,
            nonlinearity: Nonlinearity::Literal,
        })
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    /// Upper bound `c0 / tau2` on the weight rate.
    pub fn q_bound(&self, p: &ModelParams) -> f64 {
        self.c0 / p.tau2()
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        p.validate()?;
        let positive = [
            ("c0", self.c0),
            ("quad_tol", self.quad_tol),
            ("picard_tol", self.picard_tol),
            ("max_spacing", self.max_spacing),
            ("tail_tol", self.tail_tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: self.nu,
                reason: "must be nonnegative",
            });
        }
        if !(self.q > 0.0 && self.q < self.q_bound(p)) {
            return Err(Error::InvalidParameter {
                name: "q",
                value: self.q,
                reason: "weight rate must lie in (0, c0 / tau2)",
            });
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "damping",
                value: self.damping,
                reason: "must lie in (0, 1]",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
                reason: "at least one iteration is needed",
            });
        }
        if let Some(l) = self.half_width {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "half_width",
                    value: l,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let p = ModelParams::reference();
        let cfg = SolverConfig::new(&p, 0.1).unwrap();
        assert!(cfg.validate(&p).is_ok());
        let bound = cfg.q_bound(&p);
        assert!((bound - derived_constants(&p).unwrap().c_star / p.tau2()).abs() < 1e-15);
        for bad in [
            SolverConfig { q: bound, ..cfg },
            SolverConfig { q: 0.0, ..cfg },
            SolverConfig { nu: -0.1, ..cfg },
            SolverConfig {
                damping: 0.0,
                ..cfg
            },
            SolverConfig { max_iter: 0, ..cfg },
            SolverConfig {
                half_width: Some(-1.0),
                ..cfg
            },
        ] {
            assert!(bad.validate(&p).is_err(), "{bad:?}");
        }
    }
}
