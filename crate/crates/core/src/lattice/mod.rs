//! Method-of-lines simulation of the auxin/PIN lattice on a finite row of
//! cells.

mod integrate;
pub mod io;

pub use integrate::{default_dt, integrate, run_wavetrain, IntegrateOptions, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{polarization_flux, ModelParams};

/// Per-cell auxin `a`, unpolarized PIN `p` and right-polarized PIN `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub t: f64,
    pub a: Vec<f64>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
}

impl LatticeState {
    pub fn zeros(n: usize) -> Self {
        LatticeState {
            t: 0.0,
            a: vec![0.0; n],
            p: vec![0.0; n],
            r: vec![0.0; n],
        }
    }

    /// Row at rest except for `a_diamond` auxin in the first cell.
    pub fn pulse_seed(n: usize, a_diamond: f64) -> Self {
        let mut s = Self::zeros(n);
        s.a[0] = a_diamond;
        s
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.len();
        if n < 3 || self.p.len() != n || self.r.len() != n {
            return Err(Error::InvalidInput(format!(
                "lattice arrays must share a length >= 3 (got {}, {}, {})",
                n,
                self.p.len(),
                self.r.len()
            )));
        }
        Ok(())
    }

    /// Smallest entry over all three components, with its cell index.
    pub fn min_component(&self) -> (usize, f64) {
        self.a
            .iter()
            .chain(&self.p)
            .chain(&self.r)
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| {
                if v < acc.1 {
                    (i % self.len(), v)
                } else {
                    acc
                }
            })
    }

    /// Cyclic rotation by `shift` cells to the right.
    pub fn rotated(&self, shift: usize) -> Self {
        let rot = |v: &Vec<f64>| {
            let mut out = v.clone();
            out.rotate_right(shift % v.len());
            out
        };
        LatticeState {
            t: self.t,
            a: rot(&self.a),
            p: rot(&self.p),
            r: rot(&self.r),
        }
    }
}

/// How the row is closed at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Neumann auxin condition A_0 = A_1 with R_0 = 0 on the left and the sink
    /// A_{N+1} = 0 on the right. `a_left_init` is the seed placed in cell 1.
    PaperRow {
        a_left_init: f64,
    },
    Periodic,
    /// `PaperRow` with a constant `rate` added to dA_1/dt.
    InfluxLeft {
        rate: f64,
    },
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BoundaryCondition::InfluxLeft { rate } if !(rate >= 0.0) => {
                Err(Error::InvalidParameter {
                    name: "rate",
                    value: rate,
                    reason: "influx rate must be nonnegative",
                })
            }
            BoundaryCondition::PaperRow { a_left_init } if !(a_left_init >= 0.0) => {
                Err(Error::InvalidParameter {
                    name: "a_left_init",
                    value: a_left_init,
                    reason: "seed concentration must be nonnegative",
                })
            }
            _ => Ok(()),
        }
    }

    fn influx(&self) -> f64 {
        match *self {
            BoundaryCondition::InfluxLeft { rate } => rate,
            _ => 0.0,
        }
    }
}

/// Time derivatives of the three lattice components.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub a: Vec<f64>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
}

pub fn rhs(state: &LatticeState, p: &ModelParams, bc: &BoundaryCondition) -> Result<Derivative> {
    state.validate()?;
    let n = state.len();
    let mut d = Derivative {
        a: vec![0.0; n],
        p: vec![0.0; n],
        r: vec![0.0; n],
    };
    rhs_into(
        &state.a, &state.p, &state.r, p, bc, &mut d.a, &mut d.p, &mut d.r,
    )?;
    Ok(d)
}

fn active_efflux(a: f64, r: f64, p: &ModelParams) -> Result<f64> {
    let d = p.k_a + a;
    if d > 0.0 {
        Ok(p.t_act * r * a / d)
    } else {
        Err(Error::Domain {
            what: "active transport",
            denominator: d,
        })
    }
}

/// Slice-level right-hand side. Reproduces the base model when
/// `delta = k_2 = 0` and the expanded system otherwise.
#[allow(clippy::too_many_arguments)]
pub(crate) fn rhs_into(
    a: &[f64],
    pin: &[f64],
    r: &[f64],
    p: &ModelParams,
    bc: &BoundaryCondition,
    da: &mut [f64],
    dp: &mut [f64],
    dr: &mut [f64],
) -> Result<()> {
    let n = a.len();
    let periodic = matches!(bc, BoundaryCondition::Periodic);
    // ghost cells
    let (a_left, r_left, a_right) = if periodic {
        (a[n - 1], r[n - 1], a[0])
    } else {
        (a[0], 0.0, 0.0)
    };

    let mut efflux_prev = active_efflux(a_left, r_left, p)?;
    for j in 0..n {
        let a_prev = if j == 0 { a_left } else { a[j - 1] };
        let a_next = if j + 1 == n { a_right } else { a[j + 1] };
        let efflux = active_efflux(a[j], r[j], p)?;
        da[j] = efflux_prev - efflux + p.t_diff * (a_next - 2.0 * a[j] + a_prev);
        efflux_prev = efflux;

        let polarization = polarization_flux(a_next, pin[j], p)?;
        dp[j] = -polarization + p.alpha * a[j] + p.k_2 * r[j] - p.delta * pin[j];
        dr[j] = polarization - p.k_2 * r[j];
    }
    da[0] += bc.influx();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_state_has_zero_derivative() {
        let p = ModelParams::reference();
        for bc in [
            BoundaryCondition::Periodic,
            BoundaryCondition::PaperRow { a_left_init: 0.1 },
        ] {
            let d = rhs(&LatticeState::zeros(7), &p, &bc).unwrap();
            assert!(d.a.iter().chain(&d.p).chain(&d.r).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn three_cell_periodic_diffusion() {
        let p = ModelParams::reference();
        let mut s = LatticeState::zeros(3);
        s.a[0] = 1.0;
        let d = rhs(&s, &p, &BoundaryCondition::Periodic).unwrap();
        let expected_a = [-0.3, 0.15, 0.15];
        for (x, e) in d.a.iter().zip(expected_a) {
            assert!((x - e).abs() < 1e-15);
        }
        assert!((d.p[0] - 0.1).abs() < 1e-15);
        assert_eq!(d.p[1], 0.0);
        assert!(d.r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn influx_only_touches_first_cell() {
        let p = ModelParams::reference();
        let s = LatticeState::zeros(5);
        let d = rhs(&s, &p, &BoundaryCondition::InfluxLeft { rate: 0.025 }).unwrap();
        assert_eq!(d.a[0], 0.025);
        assert!(d.a[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn paper_row_left_edge_is_closed() {
        // uniform auxin with R = 0: only the right sink drains
        let p = ModelParams::reference();
        let mut s = LatticeState::zeros(5);
        s.a.iter_mut().for_each(|v| *v = 1.0);
        let d = rhs(&s, &p, &BoundaryCondition::PaperRow { a_left_init: 1.0 }).unwrap();
        assert_eq!(d.a[0], 0.0);
        assert!((d.a[4] + p.t_diff).abs() < 1e-15);
    }

    #[test]
    fn rejects_short_or_ragged_rows() {
        let p = ModelParams::reference();
        assert!(rhs(&LatticeState::zeros(2), &p, &BoundaryCondition::Periodic).is_err());
        let mut s = LatticeState::zeros(4);
        s.r.pop();
        assert!(rhs(&s, &p, &BoundaryCondition::Periodic).is_err());
    }

    #[test]
    fn pole_crossing_is_an_error() {
        let p = ModelParams::reference();
        let mut s = LatticeState::zeros(4);
        s.a[2] = -1.5;
        assert!(matches!(
            rhs(&s, &p, &BoundaryCondition::Periodic),
            Err(Error::Domain { .. })
        ));
    }

    fn arb_state(n: usize) -> impl Strategy<Value = LatticeState> {
        (
            proptest::collection::vec(0.0f64..1.0, n),
            proptest::collection::vec(0.0f64..1.0, n),
            proptest::collection::vec(0.0f64..0.01, n),
        )
            .prop_map(|(a, p, r)| LatticeState { t: 0.0, a, p, r })
    }

    proptest! {
        #[test]
        fn polarized_pin_never_decreases(s in arb_state(8)) {
            let p = ModelParams::reference();
            let d = rhs(&s, &p, &BoundaryCondition::PaperRow { a_left_init: 0.0 }).unwrap();
            prop_assert!(d.r.iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn pin_production_balance(s in arb_state(8)) {
            let p = ModelParams::reference();
            let d = rhs(&s, &p, &BoundaryCondition::Periodic).unwrap();
            for j in 0..s.len() {
                let lhs = d.p[j] + d.r[j];
                prop_assert!((lhs - p.alpha * s.a[j]).abs() <= 1e-14);
            }
        }

        #[test]
        fn periodic_auxin_is_a_divergence(s in arb_state(8)) {
            let p = ModelParams::reference();
            let d = rhs(&s, &p, &BoundaryCondition::Periodic).unwrap();
            let total: f64 = d.a.iter().sum();
            let scale: f64 = d.a.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
            prop_assert!(total.abs() <= 1e-12 * scale);
        }

        #[test]
        fn periodic_rhs_commutes_with_rotation(s in arb_state(6), shift in 0usize..6) {
            let p = ModelParams::reference();
            let d = rhs(&s, &p, &BoundaryCondition::Periodic).unwrap();
            let dr = rhs(&s.rotated(shift), &p, &BoundaryCondition::Periodic).unwrap();
            let mut expected = d.a.clone();
            expected.rotate_right(shift);
            prop_assert_eq!(dr.a, expected);
        }
    }
}
