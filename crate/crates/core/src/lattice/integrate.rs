use crate::error::{Error, Result};
use crate::model::ModelParams;

use super::{rhs_into, BoundaryCondition, LatticeState};

/// Time-ordered, uniformly sampled lattice snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<LatticeState>,
    pub sample_dt: f64,
    pub params: ModelParams,
    pub bc: BoundaryCondition,
}

impl Trajectory {
    pub fn n_cells(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.len())
    }

    pub fn last(&self) -> &LatticeState {
        self.snapshots
            .last()
            .expect("trajectory has at least one snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Any component above this magnitude (or NaN) aborts the run.
    pub blowup_bound: f64,
    /// When set, any component below `-tol` aborts the run.
    pub negativity_tol: Option<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            blowup_bound: 1e6,
            negativity_tol: None,
        }
    }
}

/// Linearized stability heuristic for the explicit step,
/// 0.2 / (T_act max R / k_a + 4 T_diff + k_1/k_m + alpha).
pub fn default_dt(p: &ModelParams, state: &LatticeState) -> f64 {
    let r_max = state.r.iter().cloned().fold(0.0, f64::max);
    0.2 / (p.t_act * r_max / p.k_a + 4.0 * p.t_diff + p.k_1 / p.k_m + p.alpha)
}

struct Rk4Scratch {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl Rk4Scratch {
    fn new(len: usize) -> Self {
        Rk4Scratch {
            k: [
                vec![0.0; len],
                vec![0.0; len],
                vec![0.0; len],
                vec![0.0; len],
            ],
            stage: vec![0.0; len],
        }
    }
}

fn eval(
    y: &[f64],
    n: usize,
    p: &ModelParams,
    bc: &BoundaryCondition,
    out: &mut [f64],
) -> Result<()> {
    let (a, rest) = y.split_at(n);
    let (pin, r) = rest.split_at(n);
    let (da, rest) = out.split_at_mut(n);
    let (dp, dr) = rest.split_at_mut(n);
    rhs_into(a, pin, r, p, bc, da, dp, dr)
}

fn rk4_step(
    y: &mut [f64],
    n: usize,
    dt: f64,
    p: &ModelParams,
    bc: &BoundaryCondition,
    s: &mut Rk4Scratch,
) -> Result<()> {
    let [k1, k2, k3, k4] = &mut s.k;
    eval(y, n, p, bc, k1)?;
    for ((st, yi), ki) in s.stage.iter_mut().zip(y.iter()).zip(k1.iter()) {
        *st = yi + 0.5 * dt * ki;
    }
    eval(&s.stage, n, p, bc, k2)?;
    for ((st, yi), ki) in s.stage.iter_mut().zip(y.iter()).zip(k2.iter()) {
        *st = yi + 0.5 * dt * ki;
    }
    eval(&s.stage, n, p, bc, k3)?;
    for ((st, yi), ki) in s.stage.iter_mut().zip(y.iter()).zip(k3.iter()) {
        *st = yi + dt * ki;
    }
    eval(&s.stage, n, p, bc, k4)?;
    for i in 0..y.len() {
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}

fn to_state(t: f64, y: &[f64], n: usize) -> LatticeState {
    LatticeState {
        t,
        a: y[..n].to_vec(),
        p: y[n..2 * n].to_vec(),
        r: y[2 * n..].to_vec(),
    }
}

fn check(t: f64, y: &[f64], n: usize, opts: &IntegrateOptions) -> Result<()> {
    for (i, &v) in y.iter().enumerate() {
        if !v.is_finite() || v.abs() > opts.blowup_bound {
            return Err(Error::InstabilityDetected {
                t,
                cell: i % n,
                value: v,
            });
        }
        if let Some(tol) = opts.negativity_tol {
            if v < -tol {
                return Err(Error::NegativeState {
                    t,
                    cell: i % n,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

/// Fixed-step classical RK4 from `initial.t` to `t_end`.
///
/// The step count is rounded up to a multiple of `sample_every`, so the
/// effective step never exceeds `dt` and snapshots are exactly uniform.
/// Initial and final states are always recorded.
pub fn integrate(
    initial: &LatticeState,
    p: &ModelParams,
    bc: &BoundaryCondition,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    initial.validate()?;
    p.validate()?;
    bc.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "time step must be positive",
        });
    }
    if !(t_end > initial.t) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "must exceed the initial time",
        });
    }
    let sample_every = sample_every.max(1);
    let span = t_end - initial.t;
    let n_samples = ((span / dt).ceil() as usize).div_ceil(sample_every).max(1);
    let n_steps = n_samples * sample_every;
    let h = span / n_steps as f64;

    let n = initial.len();
    let mut y: Vec<f64> = initial
        .a
        .iter()
        .chain(&initial.p)
        .chain(&initial.r)
        .copied()
        .collect();
    let mut scratch = Rk4Scratch::new(3 * n);
    let mut snapshots = Vec::with_capacity(n_samples + 1);
    snapshots.push(initial.clone());

    for step in 1..=n_steps {
        rk4_step(&mut y, n, h, p, bc, &mut scratch)?;
        let t = initial.t + step as f64 * h;
        check(t, &y, n, opts)?;
        if step % sample_every == 0 {
            snapshots.push(to_state(t, &y, n));
        }
    }

    Ok(Trajectory {
        snapshots,
        sample_dt: h * sample_every as f64,
        params: *p,
        bc: *bc,
    })
}

/// Pulse train fed by a constant auxin influx into the first cell of an
/// initially empty row. Requires the decaying/depolarizing expanded model.
pub fn run_wavetrain(
    p_expanded: &ModelParams,
    n_cells: usize,
    influx_rate: f64,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    for (name, value) in [
        ("delta", p_expanded.delta),
        ("k_2", p_expanded.k_2),
        ("influx_rate", influx_rate),
    ] {
        if !(value > 0.0) {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "wavetrain runs need a strictly positive value",
            });
        }
    }
    integrate(
        &LatticeState::zeros(n_cells),
        p_expanded,
        &BoundaryCondition::InfluxLeft { rate: influx_rate },
        t_end,
        dt,
        sample_every,
        &IntegrateOptions::default(),
    )
}
