//! Model parameters, derived constants and the pointwise nonlinearities shared
//! by the lattice simulator and the long-wave solver.
//!
//! The rational maps are written exactly as they appear in the compressed
//! form of the model; simplified forms only show up in tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Biological parameters of the up-the-gradient PIN1 model.
///
/// `delta` and `k_2` are the PIN decay and depolarization rates of the
/// expanded system; both zero gives the base model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub t_act: f64,
    pub t_diff: f64,
    pub k_a: f64,
    pub k_r: f64,
    pub k_m: f64,
    pub k_1: f64,
    pub alpha: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub k_2: f64,
}

impl ModelParams {
    /// Parameter set used for the single-pulse and scaling experiments:
    /// T_act = 800, T_diff = 0.15, k_a = 1, k_m = k_r = 100, k_1 = 200,
    /// alpha = 0.1.
    pub fn reference() -> Self {
        ModelParams {
            t_act: 800.0,
            t_diff: 0.15,
            k_a: 1.0,
            k_r: 100.0,
            k_m: 100.0,
            k_1: 200.0,
            alpha: 0.1,
            delta: 0.0,
            k_2: 0.0,
        }
    }

    pub fn with_decay(mut self, delta: f64, k_2: f64) -> Self {
        self.delta = delta;
        self.k_2 = k_2;
        self
    }

    pub fn is_expanded(&self) -> bool {
        self.delta != 0.0 || self.k_2 != 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_act", self.t_act),
            ("t_diff", self.t_diff),
            ("k_a", self.k_a),
            ("k_r", self.k_r),
            ("k_m", self.k_m),
            ("k_1", self.k_1),
            ("alpha", self.alpha),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be strictly positive and finite",
                });
            }
        }
        for (name, value) in [("delta", self.delta), ("k_2", self.k_2)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be nonnegative and finite",
                });
            }
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.k_1 / (self.k_r * self.k_m)
    }

    pub fn tau1(&self) -> f64 {
        self.t_act / self.k_a
    }

    pub fn tau2(&self) -> f64 {
        self.t_diff
    }
}

/// Compressed constants and the leading-order height/speed prefactors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub kappa: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// Speed prefactor: c ~ c_star * h_A^{2/5}.
    pub c_star: f64,
    /// Height prefactor of the unpolarized PIN residue: h_P ~ hp_star * h_A^{1/5}.
    pub hp_star: f64,
    /// Height prefactor of the polarized PIN residue: h_R ~ hr_star * h_A^{2/5}.
    pub hr_star: f64,
}

impl DerivedConstants {
    /// The combination 9 alpha kappa tau1 tau2^2 / 8 whose fifth root is c_star.
    pub fn speed_base(alpha: f64, kappa: f64, tau1: f64, tau2: f64) -> f64 {
        9.0 * alpha * kappa * tau1 * tau2 * tau2 / 8.0
    }
}

pub fn derived_constants(p: &ModelParams) -> Result<DerivedConstants> {
    p.validate()?;
    let kappa = p.kappa();
    let tau1 = p.tau1();
    let tau2 = p.tau2();
    let base = DerivedConstants::speed_base(p.alpha, kappa, tau1, tau2);
    let c_star = base.powf(0.2);
    let hp_star = (6.0 * p.alpha / (kappa * tau1)).sqrt() * base.powf(0.1);
    let hr_star = 3.0 / tau1 * base.powf(0.2);
    Ok(DerivedConstants {
        kappa,
        tau1,
        tau2,
        c_star,
        hp_star,
        hr_star,
    })
}

/// Long-wave scaling: amplitude `epsilon`, `nu = epsilon^{2/5}`, speed
/// coefficient `c0` and profile phase `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveScaling {
    pub epsilon: f64,
    pub nu: f64,
    pub c0: f64,
    pub theta: f64,
}

impl WaveScaling {
    pub fn from_epsilon(epsilon: f64, c0: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                reason: "must be nonnegative",
            });
        }
        Self::checked(epsilon, epsilon.powf(0.4), c0, 0.0)
    }

    pub fn from_nu(nu: f64, c0: f64) -> Result<Self> {
        if !(nu >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: nu,
                reason: "must be nonnegative",
            });
        }
        Self::checked(nu.powf(2.5), nu, c0, 0.0)
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    fn checked(epsilon: f64, nu: f64, c0: f64, theta: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c0",
                value: c0,
                reason: "speed coefficient must be strictly positive",
            });
        }
        Ok(WaveScaling {
            epsilon,
            nu,
            c0,
            theta,
        })
    }

    /// Lattice speed c = nu * c0.
    pub fn speed(&self) -> f64 {
        self.nu * self.c0
    }
}

fn positive_denominator(what: &'static str, denominator: f64) -> Result<f64> {
    if denominator > 0.0 {
        Ok(denominator)
    } else {
        Err(Error::Domain { what, denominator })
    }
}

/// Q1(x, y) = x^2 y / (k_a + x).
pub fn q1(x: f64, y: f64, p: &ModelParams) -> Result<f64> {
    let d = positive_denominator("q1", p.k_a + x)?;
    Ok(x * x * y / d)
}

/// Q2(x, y) = kappa (k_r y + k_m x + x y) / ((k_r + x)(k_m + y)) x y.
pub fn q2(x: f64, y: f64, p: &ModelParams) -> Result<f64> {
    let dr = positive_denominator("q2", p.k_r + x)?;
    let dm = positive_denominator("q2", p.k_m + y)?;
    Ok(p.kappa() * ((p.k_r * y + p.k_m * x + x * y) / (dr * dm)) * x * y)
}

/// Scaled nonlinearity n1^nu(X, Y) = X^2 Y / (k_a (k_a + nu^{5/2} X)).
pub fn nl1_nu(x: f64, y: f64, nu: f64, p: &ModelParams) -> Result<f64> {
    let d = positive_denominator("nl1_nu", p.k_a + nu.powf(2.5) * x)?;
    Ok(x * x * y / (p.k_a * d))
}

/// Scaled nonlinearity
/// n2^nu(X, Y) = kappa (k_r Y + k_m nu^2 X + nu^{5/2} X Y) /
///               ((k_r + nu^{5/2} X)(k_m + nu^{1/2} Y)) X Y.
pub fn nl2_nu(x: f64, y: f64, nu: f64, p: &ModelParams) -> Result<f64> {
    let nu52 = nu.powf(2.5);
    let dr = positive_denominator("nl2_nu", p.k_r + nu52 * x)?;
    let dm = positive_denominator("nl2_nu", p.k_m + nu.sqrt() * y)?;
    Ok(p.kappa() * ((p.k_r * y + p.k_m * nu * nu * x + nu52 * x * y) / (dr * dm)) * x * y)
}

/// Michaelis-Menten polarization flux k_1 a/(k_r + a) * p/(k_m + p) that
/// moves PIN from the unpolarized to the right-polarized pool. `a_right` is
/// the auxin in the right-hand neighbour.
pub fn polarization_flux(a_right: f64, pin: f64, p: &ModelParams) -> Result<f64> {
    let dr = positive_denominator("polarization flux", p.k_r + a_right)?;
    let dm = positive_denominator("polarization flux", p.k_m + pin)?;
    Ok(p.k_1 * (a_right / dr) * (pin / dm))
}

/// Compressed-form PIN rates (dP/dt, dR/dt) of a single cell for the base
/// model: dP = -kappa a_right P + alpha a + Q2(a_right, P), dR = kappa a_right P - Q2.
pub fn pin_rates_compressed(a_right: f64, a: f64, pin: f64, p: &ModelParams) -> Result<(f64, f64)> {
    let linear = p.kappa() * a_right * pin;
    let correction = q2(a_right, pin, p)?;
    Ok((-linear + p.alpha * a + correction, linear - correction))
}
