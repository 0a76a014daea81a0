//! Wave metrology: peak tracking, speed/width/height measurement, log-log
//! power-law fits, profile rescaling and pulse censuses for wavetrains.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{
    default_dt, integrate, BoundaryCondition, IntegrateOptions, LatticeState, Trajectory,
};
use crate::model::{derived_constants, ModelParams};
use crate::numerics::{golden_min, interp_uniform, linear_fit};
use crate::profiles::ProfileContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Component {
    A,
    P,
    R,
}

impl Component {
    pub fn of<'a>(&self, s: &'a LatticeState) -> &'a [f64] {
        match self {
            Component::A => &s.a,
            Component::P => &s.p,
            Component::R => &s.r,
        }
    }
}

/// Cells excluded at each end of the row before a pulse counts as established.
pub fn guard_band(n_cells: usize) -> usize {
    30.max(n_cells / 10)
}

/// Argmax of `ys` refined by a three-point parabola; returns
/// (fractional index, interpolated maximum).
pub fn parabolic_peak(ys: &[f64]) -> (f64, f64) {
    let (j, &m) = ys
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| {
            if *v > *acc.1 {
                (i, v)
            } else {
                acc
            }
        });
    if j == 0 || j + 1 == ys.len() {
        return (j as f64, m);
    }
    let (l, r) = (ys[j - 1], ys[j + 1]);
    let curv = l - 2.0 * m + r;
    if curv >= 0.0 {
        return (j as f64, m);
    }
    let d = 0.5 * (l - r) / curv;
    (j as f64 + d, m - 0.25 * (l - r) * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakSample {
    /// index into `Trajectory::snapshots`
    pub snapshot: usize,
    pub t: f64,
    /// fractional 0-based cell index
    pub x: f64,
}

/// Peak positions while the peak sits inside `[guard, N - 1 - guard]`.
///
/// Only the first contiguous run of qualifying snapshots is kept, so a pulse
/// that has reached the right sink does not re-enter the track.
pub fn track_peak_with_guard(
    traj: &Trajectory,
    component: Component,
    guard: usize,
) -> Result<Vec<PeakSample>> {
    let n = traj.n_cells();
    if n <= 2 * guard + 2 {
        return Err(Error::NoPulse);
    }
    let hi = (n - 1 - guard) as f64;
    let mut track = Vec::new();
    for (k, s) in traj.snapshots.iter().enumerate() {
        let ys = component.of(s);
        let (x, m) = parabolic_peak(ys);
        let inside = m > 0.0 && x >= guard as f64 && x <= hi;
        if inside {
            track.push(PeakSample {
                snapshot: k,
                t: s.t,
                x,
            });
        } else if !track.is_empty() {
            break;
        }
    }
    if track.is_empty() {
        Err(Error::NoPulse)
    } else {
        Ok(track)
    }
}

pub fn track_peak(traj: &Trajectory, component: Component) -> Result<Vec<PeakSample>> {
    track_peak_with_guard(traj, component, guard_band(traj.n_cells()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureOptions {
    pub threshold: f64,
    /// `None` selects `guard_band(N)`.
    pub guard: Option<usize>,
    pub min_samples: usize,
    pub interpolation: CrossingInterpolation,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            threshold: 0.05,
            guard: None,
            min_samples: 10,
            interpolation: CrossingInterpolation::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveMeasurement {
    /// cells per unit time
    pub speed: f64,
    /// cells
    pub width: f64,
    pub h_a: f64,
    pub h_p: f64,
    pub h_r: f64,
    /// central snapshot of the window
    pub profile: LatticeState,
    /// fractional peak index of `profile`
    pub peak_x: f64,
    pub window: (f64, f64),
    pub track: Vec<PeakSample>,
    pub guard: usize,
}

/// How the threshold crossing is located between two cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum CrossingInterpolation {
    Linear,
    /// linear in `ln A`; exact on exponential tails
    #[default]
    LogLinear,
}

/// Fractional offset in `[0, 1]` from `lo` toward `hi` where the level is met.
fn crossing(lo: f64, hi: f64, level: f64, mode: CrossingInterpolation) -> f64 {
    match mode {
        CrossingInterpolation::LogLinear if lo > 0.0 && hi > 0.0 => {
            (level / lo).ln() / (hi / lo).ln()
        }
        _ => (level - lo) / (hi - lo),
    }
}

/// Distance between the two `threshold * max` crossings of `ys` around its
/// peak.
pub fn level_width_with(ys: &[f64], threshold: f64, mode: CrossingInterpolation) -> Result<f64> {
    let (xp, m) = parabolic_peak(ys);
    let level = threshold * m;
    let jp = xp.round() as usize;
    let undefined = Error::WidthUndefined { threshold };
    let mut j = jp;
    while ys[j] >= level {
        if j == 0 {
            return Err(undefined);
        }
        j -= 1;
    }
    let left = j as f64 + crossing(ys[j], ys[j + 1], level, mode);
    let mut j = jp;
    while ys[j] >= level {
        if j + 1 == ys.len() {
            return Err(undefined);
        }
        j += 1;
    }
    let right = j as f64 - crossing(ys[j], ys[j - 1], level, mode);
    Ok(right - left)
}

pub fn level_width(ys: &[f64], threshold: f64) -> Result<f64> {
    level_width_with(ys, threshold, CrossingInterpolation::default())
}

pub fn measure_with(traj: &Trajectory, opts: &MeasureOptions) -> Result<WaveMeasurement> {
    let n = traj.n_cells();
    let guard = opts.guard.unwrap_or_else(|| guard_band(n));
    let track = track_peak_with_guard(traj, Component::A, guard)?;
    if track.len() < opts.min_samples.max(2) {
        return Err(Error::NoPulse);
    }
    let ts: Vec<f64> = track.iter().map(|s| s.t).collect();
    let xs: Vec<f64> = track.iter().map(|s| s.x).collect();
    let (speed, _, _) = linear_fit(&ts, &xs);

    let central = &track[track.len() / 2];
    let profile = traj.snapshots[central.snapshot].clone();
    let width = level_width_with(&profile.a, opts.threshold, opts.interpolation)?;

    let cells = guard..n - guard;
    let (mut h_a, mut h_p, mut h_r) = (0.0f64, 0.0f64, 0.0f64);
    for s in &track {
        let snap = &traj.snapshots[s.snapshot];
        for j in cells.clone() {
            h_a = h_a.max(snap.a[j]);
            h_p = h_p.max(snap.p[j]);
            h_r = h_r.max(snap.r[j]);
        }
    }
    Ok(WaveMeasurement {
        speed,
        width,
        h_a,
        h_p,
        h_r,
        profile,
        peak_x: central.x,
        window: (track[0].t, track[track.len() - 1].t),
        track,
        guard,
    })
}

pub fn measure(traj: &Trajectory) -> Result<WaveMeasurement> {
    measure_with(traj, &MeasureOptions::default())
}

/// log y = exponent * log x + log_prefactor
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub log_prefactor: f64,
    pub rms_residual: f64,
    pub n_points: usize,
}

impl ScalingFit {
    pub fn prefactor(&self) -> f64 {
        self.log_prefactor.exp()
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.prefactor() * x.powf(self.exponent)
    }
}

/// Least squares in log-log space over the strictly positive, finite pairs.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    if lx.len() < 2 {
        return Err(Error::FitFailed(lx.len()));
    }
    let (exponent, log_prefactor, rms_residual) = linear_fit(&lx, &ly);
    Ok(ScalingFit {
        exponent,
        log_prefactor,
        rms_residual,
        n_points: lx.len(),
    })
}

/// Settings for a single-pulse run seeded by `A_diamond` in the first cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseRunConfig {
    pub n_cells: usize,
    /// `None` selects `suggested_t_end`.
    pub t_end: Option<f64>,
    /// `None` selects `default_dt` on the seeded state.
    pub dt: Option<f64>,
    /// approximate number of stored snapshots
    pub snapshots: usize,
    pub measure: MeasureOptions,
}

impl Default for PulseRunConfig {
    fn default() -> Self {
        PulseRunConfig {
            n_cells: 500,
            t_end: None,
            dt: None,
            snapshots: 800,
            measure: MeasureOptions::default(),
        }
    }
}

/// Amplitude predicted from auxin mass conservation: the pulse
/// `eps * phi_A(eps^{2/5} j)` carries mass `eps^{3/5} Sigma(-inf)`.
pub fn predicted_amplitude(p: &ModelParams, a_diamond: f64) -> Result<f64> {
    let ctx = ProfileContext::normalized(p)?;
    Ok((a_diamond / ctx.sigma_mass()).powf(5.0 / 3.0))
}

/// Horizon long enough for the predicted pulse to cross the whole row.
pub fn suggested_t_end(p: &ModelParams, a_diamond: f64, n_cells: usize) -> Result<f64> {
    let eps = predicted_amplitude(p, a_diamond)?;
    let c = derived_constants(p)?.c_star * eps.powf(0.4);
    Ok(1.3 * n_cells as f64 / c)
}

pub fn run_pulse(p: &ModelParams, a_diamond: f64, cfg: &PulseRunConfig) -> Result<Trajectory> {
    if !(a_diamond > 0.0) {
        return Err(Error::InvalidParameter {
            name: "a_diamond",
            value: a_diamond,
            reason: "seed amplitude must be positive",
        });
    }
    let init = LatticeState::pulse_seed(cfg.n_cells, a_diamond);
    let t_end = match cfg.t_end {
        Some(t) => t,
        None => suggested_t_end(p, a_diamond, cfg.n_cells)?,
    };
    let dt = cfg.dt.unwrap_or_else(|| default_dt(p, &init));
    let sample_every = ((t_end / dt) / cfg.snapshots.max(1) as f64).ceil().max(1.0) as usize;
    integrate(
        &init,
        p,
        &BoundaryCondition::PaperRow {
            a_left_init: a_diamond,
        },
        t_end,
        dt,
        sample_every,
        &IntegrateOptions::default(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub a_diamond: f64,
    pub measurement: WaveMeasurement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub speed: ScalingFit,
    pub width: ScalingFit,
    pub h_p: ScalingFit,
    pub h_r: ScalingFit,
}

/// Runs and measures one pulse per amplitude (in parallel), then fits
/// c, w, h_P and h_R against h_A.
pub fn sweep_and_fit(
    amplitudes: &[f64],
    p: &ModelParams,
    cfg: &PulseRunConfig,
) -> Result<SweepResult> {
    if amplitudes.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "a sweep needs at least 3 amplitudes, got {}",
            amplitudes.len()
        )));
    }
    let points = amplitudes
        .par_iter()
        .map(|&a| {
            let traj = run_pulse(p, a, cfg)?;
            let measurement = measure_with(&traj, &cfg.measure)?;
            Ok(SweepPoint {
                a_diamond: a,
                measurement,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ha: Vec<f64> = points.iter().map(|s| s.measurement.h_a).collect();
    let col = |f: fn(&WaveMeasurement) -> f64| {
        points.iter().map(|s| f(&s.measurement)).collect::<Vec<_>>()
    };
    Ok(SweepResult {
        speed: fit_power_law(&ha, &col(|m| m.speed))?,
        width: fit_power_law(&ha, &col(|m| m.width))?,
        h_p: fit_power_law(&ha, &col(|m| m.h_p))?,
        h_r: fit_power_law(&ha, &col(|m| m.h_r))?,
        points,
    })
}

/// Measured profile in long-wave coordinates on a uniform X grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledProfile {
    pub x0: f64,
    pub dx: f64,
    pub a: Vec<f64>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
}

impl RescaledProfile {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    /// Maps back to lattice values at cell `j`.
    pub fn unrescale(&self, h_a: f64, peak_x: f64, j: usize) -> (f64, f64, f64) {
        let nu = h_a.powf(0.4);
        let x = nu * (j as f64 - peak_x);
        (
            h_a * interp_uniform(&self.a, self.x0, self.dx, x),
            h_a.powf(0.2) * interp_uniform(&self.p, self.x0, self.dx, x),
            nu * interp_uniform(&self.r, self.x0, self.dx, x),
        )
    }
}

/// Compresses space by `h_A^{2/5}` about the A-peak and divides (A, P, R) by
/// `(h_A, h_A^{1/5}, h_A^{2/5})`. Cells `[lo, hi]` are resampled onto
/// `n_out` uniform points.
pub fn rescale_cells(
    m: &WaveMeasurement,
    lo: usize,
    hi: usize,
    n_out: usize,
) -> Result<RescaledProfile> {
    let n = m.profile.len();
    if !(m.h_a > 0.0) || lo >= hi || hi >= n || n_out < 2 {
        return Err(Error::InvalidInput(
            "rescaling needs a positive height and a nonempty cell range".into(),
        ));
    }
    let nu = m.h_a.powf(0.4);
    let x0 = nu * (lo as f64 - m.peak_x);
    let x1 = nu * (hi as f64 - m.peak_x);
    let dx = (x1 - x0) / (n_out - 1) as f64;
    let sample = |ys: &[f64], scale: f64| -> Vec<f64> {
        (0..n_out)
            .map(|i| {
                let j = m.peak_x + (x0 + i as f64 * dx) / nu;
                interp_uniform(ys, 0.0, 1.0, j.clamp(lo as f64, hi as f64)) / scale
            })
            .collect()
    };
    Ok(RescaledProfile {
        x0,
        dx,
        a: sample(&m.profile.a, m.h_a),
        p: sample(&m.profile.p, m.h_a.powf(0.2)),
        r: sample(&m.profile.r, nu),
    })
}

/// Rescaled profile over `[peak - 2 w, peak + 2 w]` (clipped to the guarded
/// cells), sampled exactly at the cells so no interpolation error enters.
pub fn rescale_profile(m: &WaveMeasurement) -> Result<RescaledProfile> {
    let n = m.profile.len();
    let half = (2.0 * m.width).ceil();
    let lo = (m.peak_x - half).floor().max(m.guard as f64) as usize;
    let hi = ((m.peak_x + half).ceil() as usize).min(n - 1 - m.guard);
    rescale_cells(m, lo, hi, hi - lo + 1)
}

/// Sup-distances between a rescaled profile and the leading-order profiles
/// after optimal translation, each relative to the sup of the reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileDistance {
    pub a: f64,
    pub p: f64,
    pub r: f64,
    /// translation applied to the reference, in X units
    pub shift: f64,
}

fn sup_distance(ys: &[f64], prof: &RescaledProfile, f: impl Fn(f64) -> f64) -> f64 {
    ys.iter()
        .enumerate()
        .map(|(i, y)| (y - f(prof.x(i))).abs())
        .fold(0.0, f64::max)
}

/// A single translation aligns all three components; it is chosen to
/// minimise the A distance (coarse scan, then golden-section refinement).
pub fn aligned_distance(prof: &RescaledProfile, ctx: &ProfileContext) -> ProfileDistance {
    let xp = ctx.peak_location();
    let da = |s: f64| sup_distance(&prof.a, prof, |x| ctx.phi_star(x + xp + s).0);
    let span = 1.0 / ctx.decay_rate();
    let steps = 80;
    let (mut best, mut best_v) = (0.0, da(0.0));
    for k in 0..=steps {
        let s = -span + 2.0 * span * k as f64 / steps as f64;
        let v = da(s);
        if v < best_v {
            best = s;
            best_v = v;
        }
    }
    let h = 2.0 * span / steps as f64;
    let (shift, dist_a) = golden_min(da, best - h, best + h, 1e-9);
    let (dist_a, shift) = if dist_a <= best_v {
        (dist_a, shift)
    } else {
        (best_v, best)
    };
    let sup = |k: usize| {
        let (x_lo, x_hi) = (xp - 40.0 * span, xp + 40.0 * span);
        let lim = ctx.residue_limits();
        let m = (0..4000)
            .map(|i| {
                let v = ctx.phi_star(x_lo + (x_hi - x_lo) * i as f64 / 3999.0);
                if k == 1 {
                    v.1
                } else {
                    v.2
                }
            })
            .fold(0.0, f64::max);
        m.max(if k == 1 { lim.0 } else { lim.1 })
    };
    let dp = sup_distance(&prof.p, prof, |x| ctx.phi_star(x + xp + shift).1) / sup(1);
    let dr = sup_distance(&prof.r, prof, |x| ctx.phi_star(x + xp + shift).2) / sup(2);
    ProfileDistance {
        a: dist_a / ctx.sigma_max(),
        p: dp,
        r: dr,
        shift,
    }
}

/// A local maximum of the auxin row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pulse {
    pub x: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CensusOptions {
    /// maxima below this auxin level are ignored
    pub min_height: f64,
    /// a maximum must rise this far above the lowest value within
    /// `prominence_radius` cells on both sides
    pub min_prominence: f64,
    pub prominence_radius: usize,
    /// cells at the left end (where influx accumulates) that are ignored
    pub left_guard: usize,
    /// cells at the right end treated as the exit zone
    pub right_guard: usize,
    /// largest displacement between consecutive censuses for one pulse
    pub max_step: f64,
    /// a vanished pulse within this many cells of a survivor counts as merged
    pub merge_radius: f64,
    /// heights must differ by this relative margin for a speed comparison
    pub height_gap: f64,
    /// half-width, in censuses, of the window used for pulse velocities
    pub velocity_window: usize,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            min_height: 0.02,
            min_prominence: 0.02,
            prominence_radius: 12,
            left_guard: 10,
            right_guard: 30,
            max_step: 5.0,
            merge_radius: 12.0,
            height_gap: 0.2,
            velocity_window: 3,
        }
    }
}

pub fn census(a: &[f64], opts: &CensusOptions) -> Vec<Pulse> {
    let n = a.len();
    let lo = opts.left_guard.max(1);
    let hi = n.saturating_sub(opts.right_guard.max(1));
    let rad = opts.prominence_radius.max(1);
    let mut out = Vec::new();
    for j in lo..hi {
        if !(a[j] >= opts.min_height && a[j] > a[j - 1] && a[j] >= a[j + 1]) {
            continue;
        }
        let left_min = a[j.saturating_sub(rad)..=j]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let right_min = a[j..=(j + rad).min(n - 1)]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if a[j] - left_min.max(right_min) < opts.min_prominence {
            continue;
        }
        let (l, m, r) = (a[j - 1], a[j], a[j + 1]);
        let curv = l - 2.0 * m + r;
        let d = if curv < 0.0 {
            0.5 * (l - r) / curv
        } else {
            0.0
        };
        out.push(Pulse {
            x: j as f64 + d,
            height: m - 0.25 * (l - r) * d,
        });
    }
    out
}

/// One pulse followed through consecutive censuses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseTrack {
    /// census index of the first entry
    pub start: usize,
    pub x: Vec<f64>,
    pub height: Vec<f64>,
}

impl PulseTrack {
    fn end(&self) -> usize {
        self.start + self.x.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MergeEvent {
    pub t: f64,
    /// position of the vanished pulse
    pub x_lost: f64,
    /// position of the nearest surviving pulse
    pub x_survivor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WavetrainReport {
    pub times: Vec<f64>,
    pub counts: Vec<usize>,
    pub max_coexisting: usize,
    pub tracks: Vec<PulseTrack>,
    pub merges: Vec<MergeEvent>,
    /// coexisting pulse pairs whose heights differ by more than the gap
    pub comparisons: usize,
    pub taller_faster: usize,
}

impl WavetrainReport {
    pub fn taller_faster_fraction(&self) -> f64 {
        if self.comparisons == 0 {
            0.0
        } else {
            self.taller_faster as f64 / self.comparisons as f64
        }
    }
}

/// For each pulse in `next`, the index of the pulse in `prev` it continues.
/// Pulses only move right (up to half a cell of jitter), and each earlier
/// pulse is continued by at most one later pulse, the nearest.
fn link(prev: &[Pulse], next: &[Pulse], max_step: f64) -> Vec<Option<usize>> {
    let mut best: Vec<Option<(usize, f64)>> = vec![None; prev.len()];
    for (qi, q) in next.iter().enumerate() {
        let cand = prev
            .iter()
            .enumerate()
            .filter(|(_, p)| q.x >= p.x - 0.5 && q.x - p.x <= max_step)
            .min_by(|a, b| (q.x - a.1.x).abs().total_cmp(&(q.x - b.1.x).abs()));
        if let Some((pi, p)) = cand {
            let d = (q.x - p.x).abs();
            if best[pi].is_none_or(|(_, bd)| d < bd) {
                best[pi] = Some((qi, d));
            }
        }
    }
    let mut out = vec![None; next.len()];
    for (pi, b) in best.iter().enumerate() {
        if let Some((qi, _)) = b {
            out[*qi] = Some(pi);
        }
    }
    out
}

/// Pulse census over every snapshot, pulse tracking, merge detection and
/// height/speed comparisons among coexisting pulses.
pub fn analyze_wavetrain(traj: &Trajectory, opts: &CensusOptions) -> WavetrainReport {
    let n = traj.n_cells();
    let exit = n.saturating_sub(opts.right_guard) as f64 - opts.merge_radius;
    let censuses: Vec<Vec<Pulse>> = traj.snapshots.iter().map(|s| census(&s.a, opts)).collect();
    let times = traj.times();

    let mut tracks: Vec<PulseTrack> = Vec::new();
    // track id of each pulse in the current census
    let mut active: Vec<usize> = Vec::new();
    let mut merges = Vec::new();
    for (k, pulses) in censuses.iter().enumerate() {
        let links = if k == 0 {
            vec![None; pulses.len()]
        } else {
            link(&censuses[k - 1], pulses, opts.max_step)
        };
        let mut next_active = Vec::with_capacity(pulses.len());
        for (q, l) in pulses.iter().zip(&links) {
            let id = match l {
                Some(pi) => active[*pi],
                None => {
                    tracks.push(PulseTrack {
                        start: k,
                        x: Vec::new(),
                        height: Vec::new(),
                    });
                    tracks.len() - 1
                }
            };
            tracks[id].x.push(q.x);
            tracks[id].height.push(q.height);
            next_active.push(id);
        }
        if k > 0 {
            let prev = &censuses[k - 1];
            for (pi, p) in prev.iter().enumerate() {
                let continued = links.contains(&Some(pi));
                if continued || p.x >= exit {
                    continue;
                }
                let survivor = pulses
                    .iter()
                    .zip(&links)
                    .filter(|(_, l)| l.is_some())
                    .map(|(q, _)| q)
                    .min_by(|a, b| (a.x - p.x).abs().total_cmp(&(b.x - p.x).abs()));
                if let Some(s) = survivor {
                    if (s.x - p.x).abs() <= opts.merge_radius {
                        merges.push(MergeEvent {
                            t: times[k],
                            x_lost: p.x,
                            x_survivor: s.x,
                        });
                    }
                }
            }
        }
        active = next_active;
    }

    let w = opts.velocity_window.max(1);
    let (mut comparisons, mut taller_faster) = (0, 0);
    for k in w..censuses.len().saturating_sub(w) {
        let span = times[k + w] - times[k - w];
        let moving: Vec<(f64, f64)> = tracks
            .iter()
            .filter(|tr| tr.start + w <= k && k + w < tr.end())
            .map(|tr| {
                let i = k - tr.start;
                (tr.height[i], (tr.x[i + w] - tr.x[i - w]) / span)
            })
            .collect();
        for a in 0..moving.len() {
            for b in a + 1..moving.len() {
                let (tall, short) = if moving[a].0 >= moving[b].0 {
                    (moving[a], moving[b])
                } else {
                    (moving[b], moving[a])
                };
                if tall.0 > (1.0 + opts.height_gap) * short.0 {
                    comparisons += 1;
                    if tall.1 > short.1 {
                        taller_faster += 1;
                    }
                }
            }
        }
    }

    let counts: Vec<usize> = censuses.iter().map(|c| c.len()).collect();
    WavetrainReport {
        times,
        max_coexisting: counts.iter().copied().max().unwrap_or(0),
        counts,
        tracks,
        merges,
        comparisons,
        taller_faster,
    }
}
