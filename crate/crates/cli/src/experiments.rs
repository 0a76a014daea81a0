//! Built-in experiment runners.

use auxin_core::lattice::{io as traj_io, run_wavetrain, Trajectory};
use auxin_core::longwave::{multiplier_symbol, LongWave, Nonlinearity, SolverConfig};
use auxin_core::metrology::{
    aligned_distance, analyze_wavetrain, measure_with, rescale_profile, run_pulse, sweep_and_fit,
    CensusOptions, MeasureOptions, PulseRunConfig, RescaledProfile, WaveMeasurement,
};
use auxin_core::profiles::ProfileContext;
use auxin_core::{derived_constants, ModelParams};
use serde::{Deserialize, Serialize};

use crate::artifacts::Artifacts;
use crate::error::{CliError, Result};
use crate::registry::TypedExperiment;
use crate::svg::{Figure, Plot, Series, Style};

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite (got {v})"
        )))
    }
}

fn check_run_shape(
    n_cells: usize,
    t_end: Option<f64>,
    dt: Option<f64>,
    snapshots: usize,
    threshold: f64,
) -> Result<()> {
    if n_cells < 100 {
        return Err(invalid(format!(
            "n_cells must be at least 100 (got {n_cells})"
        )));
    }
    if let Some(t) = t_end {
        require_positive("t_end", t)?;
    }
    if let Some(d) = dt {
        require_positive("dt", d)?;
    }
    if snapshots < 20 {
        return Err(invalid(format!(
            "snapshots must be at least 20 (got {snapshots})"
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid(format!(
            "threshold must lie in (0, 1) (got {threshold})"
        )));
    }
    Ok(())
}

/// Keeps about `keep` evenly spaced snapshots, always including the last.
fn thin(traj: &Trajectory, keep: usize) -> Trajectory {
    let n = traj.snapshots.len();
    if keep == 0 || keep >= n {
        return traj.clone();
    }
    let stride = n.div_ceil(keep);
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if idx.last() != Some(&(n - 1)) {
        idx.push(n - 1);
    }
    Trajectory {
        snapshots: idx.iter().map(|&i| traj.snapshots[i].clone()).collect(),
        sample_dt: traj.sample_dt * stride as f64,
        ..traj.clone()
    }
}

fn write_trajectory(out: &mut Artifacts, name: &str, traj: &Trajectory) -> Result<()> {
    let mut buf = Vec::new();
    traj_io::write_csv(traj, &mut buf).map_err(|e| CliError::io("formatting trajectory", e))?;
    out.write_bytes(name, &buf)
}

fn cells(ys: &[f64]) -> Vec<(f64, f64)> {
    ys.iter()
        .enumerate()
        .map(|(j, &y)| ((j + 1) as f64, y))
        .collect()
}

/// Leading-order reference shifted onto a measured rescaled profile.
fn aligned_reference(
    prof: &RescaledProfile,
    ctx: &ProfileContext,
    shift: f64,
) -> Vec<(f64, f64, f64, f64)> {
    let xp = ctx.peak_location();
    (0..prof.len())
        .map(|i| {
            let x = prof.x(i);
            let (a, p, r) = ctx.phi_star(x + xp + shift);
            (x, a, p, r)
        })
        .collect()
}

fn overlay_panels(
    curves: &[(String, &RescaledProfile)],
    ctx: &ProfileContext,
    shift: f64,
) -> Figure {
    let names = ["A / h_A", "P / h_P", "R / h_R"];
    let refs = curves
        .first()
        .map(|(_, p)| aligned_reference(p, ctx, shift))
        .unwrap_or_default();
    let panels = (0..3)
        .map(|c| {
            let mut plot = Plot::new(format!("rescaled {}", names[c]), "X", names[c]);
            for (label, prof) in curves {
                let ys = match c {
                    0 => &prof.a,
                    1 => &prof.p,
                    _ => &prof.r,
                };
                let pts = ys
                    .iter()
                    .enumerate()
                    .map(|(i, &y)| (prof.x(i), y))
                    .collect();
                let style = if curves.len() == 1 {
                    Style::Markers
                } else {
                    Style::Line
                };
                plot = plot.with(Series::new(label.clone(), pts, style));
            }
            let reference = refs.iter().map(|&(x, a, p, r)| (x, [a, p, r][c])).collect();
            plot.with(Series::new("leading order", reference, Style::Dashed).color("#000000"))
        })
        .collect();
    Figure::stacked(panels)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseRunSettings {
    /// auxin seeded in the first cell
    pub a_diamond: f64,
    pub n_cells: usize,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub snapshots: usize,
    pub threshold: f64,
    /// snapshots kept in trajectory.csv; 0 keeps all
    pub csv_snapshots: usize,
}

impl Default for PulseRunSettings {
    fn default() -> Self {
        PulseRunSettings {
            a_diamond: 0.15,
            n_cells: 500,
            t_end: None,
            dt: None,
            snapshots: 800,
            threshold: 0.05,
            csv_snapshots: 50,
        }
    }
}

impl PulseRunSettings {
    fn run_config(&self) -> PulseRunConfig {
        PulseRunConfig {
            n_cells: self.n_cells,
            t_end: self.t_end,
            dt: self.dt,
            snapshots: self.snapshots,
            measure: MeasureOptions {
                threshold: self.threshold,
                ..MeasureOptions::default()
            },
        }
    }
}

#[derive(Serialize)]
struct MeasurementRow {
    a_diamond: f64,
    h_a: f64,
    speed: f64,
    width: f64,
    h_p: f64,
    h_r: f64,
    peak_x: f64,
    t_fit_start: f64,
    t_fit_end: f64,
    speed_predicted: f64,
    width_predicted: f64,
    h_p_predicted: f64,
    h_r_predicted: f64,
}

fn measurement_row(
    p: &ModelParams,
    a_diamond: f64,
    m: &WaveMeasurement,
    threshold: f64,
) -> Result<MeasurementRow> {
    let dc = derived_constants(p)?;
    let w_star = ProfileContext::normalized(p)?.w_star(threshold)?;
    Ok(MeasurementRow {
        a_diamond,
        h_a: m.h_a,
        speed: m.speed,
        width: m.width,
        h_p: m.h_p,
        h_r: m.h_r,
        peak_x: m.peak_x,
        t_fit_start: m.window.0,
        t_fit_end: m.window.1,
        speed_predicted: dc.c_star * m.h_a.powf(0.4),
        width_predicted: w_star * m.h_a.powf(-0.4),
        h_p_predicted: dc.hp_star * m.h_a.powf(0.2),
        h_r_predicted: dc.hr_star * m.h_a.powf(0.4),
    })
}

#[derive(Serialize)]
struct RescaledRow {
    x: f64,
    a: f64,
    p: f64,
    r: f64,
    phi_a: f64,
    phi_p: f64,
    phi_r: f64,
}

#[derive(Serialize)]
struct DistanceRow {
    a_diamond: f64,
    dist_a: f64,
    dist_p: f64,
    dist_r: f64,
    shift: f64,
}

/// One pulse seeded at the left end of a resting row.
pub struct PulseRun;

impl TypedExperiment for PulseRun {
    type Settings = PulseRunSettings;
    const KIND: &'static str = "pulse_run";
    const SUMMARY: &'static str = "single pulse: trajectory, measurement and rescaled profile";

    fn validate(&self, p: &ModelParams, s: &PulseRunSettings) -> Result<()> {
        if p.is_expanded() {
            return Err(invalid("pulse_run needs delta = k_2 = 0"));
        }
        require_positive("a_diamond", s.a_diamond)?;
        check_run_shape(s.n_cells, s.t_end, s.dt, s.snapshots, s.threshold)
    }

    fn execute(&self, p: &ModelParams, s: &PulseRunSettings, out: &mut Artifacts) -> Result<()> {
        let cfg = s.run_config();
        let traj = run_pulse(p, s.a_diamond, &cfg)?;
        write_trajectory(out, "trajectory.csv", &thin(&traj, s.csv_snapshots))?;

        let m = measure_with(&traj, &cfg.measure)?;
        out.write_csv(
            "measurement.csv",
            [measurement_row(p, s.a_diamond, &m, s.threshold)?],
        )?;

        let ctx = ProfileContext::normalized(p)?;
        let prof = rescale_profile(&m)?;
        let d = aligned_distance(&prof, &ctx);
        out.write_csv(
            "distance.csv",
            [DistanceRow {
                a_diamond: s.a_diamond,
                dist_a: d.a,
                dist_p: d.p,
                dist_r: d.r,
                shift: d.shift,
            }],
        )?;
        let reference = aligned_reference(&prof, &ctx, d.shift);
        out.write_csv(
            "rescaled.csv",
            reference
                .iter()
                .enumerate()
                .map(|(i, &(x, pa, pp, pr))| RescaledRow {
                    x,
                    a: prof.a[i],
                    p: prof.p[i],
                    r: prof.r[i],
                    phi_a: pa,
                    phi_p: pp,
                    phi_r: pr,
                }),
        )?;

        let snap = &m.profile;
        let title = |c: &str| format!("{c} at t = {:.1}", snap.t);
        out.write_svg(
            "snapshot.svg",
            &Figure::stacked(vec![
                Plot::new(title("A"), "cell j", "A").with(Series::new(
                    "A",
                    cells(&snap.a),
                    Style::Line,
                )),
                Plot::new(title("P"), "cell j", "P").with(Series::new(
                    "P",
                    cells(&snap.p),
                    Style::Line,
                )),
                Plot::new(title("R"), "cell j", "R").with(Series::new(
                    "R",
                    cells(&snap.r),
                    Style::Line,
                )),
            ]),
        )?;
        out.write_svg(
            "overlay.svg",
            &overlay_panels(
                &[(format!("A_diamond = {}", s.a_diamond), &prof)],
                &ctx,
                d.shift,
            ),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub amplitudes: Vec<f64>,
    pub n_cells: usize,
    pub snapshots: usize,
    pub threshold: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            amplitudes: vec![0.05, 0.1, 0.15, 0.2, 0.3],
            n_cells: 500,
            snapshots: 800,
            threshold: 0.05,
        }
    }
}

#[derive(Serialize)]
struct FitRow {
    quantity: &'static str,
    exponent: f64,
    predicted_exponent: f64,
    prefactor: f64,
    predicted_prefactor: f64,
    rms_residual: f64,
    n_points: usize,
}

/// Single-pulse runs over several seed amplitudes with power-law fits.
pub struct Sweep;

impl TypedExperiment for Sweep {
    type Settings = SweepSettings;
    const KIND: &'static str = "sweep";
    const SUMMARY: &'static str = "amplitude sweep with power-law fits of speed, width and heights";

    fn validate(&self, p: &ModelParams, s: &SweepSettings) -> Result<()> {
        if p.is_expanded() {
            return Err(invalid("sweep needs delta = k_2 = 0"));
        }
        if s.amplitudes.len() < 3 {
            return Err(invalid("sweep needs at least three amplitudes"));
        }
        for &a in &s.amplitudes {
            require_positive("amplitude", a)?;
        }
        check_run_shape(s.n_cells, None, None, s.snapshots, s.threshold)
    }

    fn execute(&self, p: &ModelParams, s: &SweepSettings, out: &mut Artifacts) -> Result<()> {
        let cfg = PulseRunSettings {
            n_cells: s.n_cells,
            snapshots: s.snapshots,
            threshold: s.threshold,
            ..PulseRunSettings::default()
        }
        .run_config();
        let res = sweep_and_fit(&s.amplitudes, p, &cfg)?;
        let rows = res
            .points
            .iter()
            .map(|pt| measurement_row(p, pt.a_diamond, &pt.measurement, s.threshold))
            .collect::<Result<Vec<_>>>()?;
        out.write_csv("sweep.csv", &rows)?;

        let dc = derived_constants(p)?;
        let ctx = ProfileContext::normalized(p)?;
        let w_star = ctx.w_star(s.threshold)?;
        let quantities = [
            ("speed", &res.speed, 0.4, dc.c_star),
            ("width", &res.width, -0.4, w_star),
            ("h_p", &res.h_p, 0.2, dc.hp_star),
            ("h_r", &res.h_r, 0.4, dc.hr_star),
        ];
        out.write_csv(
            "fits.csv",
            quantities.iter().map(|&(name, fit, e, c)| FitRow {
                quantity: name,
                exponent: fit.exponent,
                predicted_exponent: e,
                prefactor: fit.prefactor(),
                predicted_prefactor: c,
                rms_residual: fit.rms_residual,
                n_points: fit.n_points,
            }),
        )?;

        let mut profiles = Vec::new();
        let mut distances = Vec::new();
        for pt in &res.points {
            let prof = rescale_profile(&pt.measurement)?;
            let d = aligned_distance(&prof, &ctx);
            distances.push(DistanceRow {
                a_diamond: pt.a_diamond,
                dist_a: d.a,
                dist_p: d.p,
                dist_r: d.r,
                shift: d.shift,
            });
            profiles.push((format!("A_diamond = {}", pt.a_diamond), prof));
        }
        out.write_csv("distances.csv", &distances)?;

        let h_a: Vec<f64> = rows.iter().map(|r| r.h_a).collect();
        let (lo, hi) = h_a
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                (l.min(v), h.max(v))
            });
        let line = |f: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> {
            (0..=40)
                .map(|i| {
                    let x = lo * (hi / lo).powf(i as f64 / 40.0);
                    (x, f(x))
                })
                .collect()
        };
        for (k, &(name, fit, e, c)) in quantities.iter().enumerate() {
            let measured: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.h_a, [r.speed, r.width, r.h_p, r.h_r][k]))
                .collect();
            let plot = Plot::new(format!("{name} against h_A"), "h_A", name)
                .log_log()
                .with(Series::new("measured", measured, Style::Markers))
                .with(Series::new(
                    format!("fit, exponent {:.3}", fit.exponent),
                    line(&|x| fit.predict(x)),
                    Style::Line,
                ))
                .with(Series::new(
                    format!("predicted, exponent {e}"),
                    line(&|x| c * x.powf(e)),
                    Style::Dashed,
                ));
            out.write_svg(&format!("{name}.svg"), &Figure::single(plot))?;
        }

        let refs: Vec<(String, &RescaledProfile)> =
            profiles.iter().map(|(l, p)| (l.clone(), p)).collect();
        let shift = distances.first().map_or(0.0, |d| d.shift);
        out.write_svg("overlay.svg", &overlay_panels(&refs, &ctx, shift))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavetrainSettings {
    /// PIN decay rate
    pub delta: f64,
    /// depolarization rate
    pub k_2: f64,
    /// auxin influx into the first cell per unit time
    pub influx_rate: f64,
    pub n_cells: usize,
    pub t_end: f64,
    pub dt: f64,
    /// RK4 steps between stored snapshots
    pub sample_every: usize,
    pub csv_snapshots: usize,
    pub snapshot_panels: usize,
    pub min_height: f64,
    pub min_prominence: f64,
    pub merge_radius: f64,
    pub height_gap: f64,
}

impl Default for WavetrainSettings {
    fn default() -> Self {
        let c = CensusOptions::default();
        WavetrainSettings {
            delta: 0.1,
            k_2: 0.2,
            influx_rate: 0.025,
            n_cells: 500,
            t_end: 3000.0,
            dt: 0.07,
            sample_every: 20,
            csv_snapshots: 60,
            snapshot_panels: 4,
            min_height: c.min_height,
            min_prominence: c.min_prominence,
            merge_radius: c.merge_radius,
            height_gap: c.height_gap,
        }
    }
}

#[derive(Serialize)]
struct CensusRow {
    t: f64,
    count: usize,
}

#[derive(Serialize)]
struct PulseRow {
    track: usize,
    t: f64,
    x: f64,
    height: f64,
}

#[derive(Serialize)]
struct WavetrainSummary {
    snapshots: usize,
    max_coexisting: usize,
    merges: usize,
    comparisons: usize,
    taller_faster: usize,
    taller_faster_fraction: f64,
}

/// Pulse train driven by constant influx in the decaying model.
pub struct Wavetrain;

impl TypedExperiment for Wavetrain {
    type Settings = WavetrainSettings;
    const KIND: &'static str = "wavetrain";
    const SUMMARY: &'static str =
        "pulse train under constant influx with census and merge detection";

    fn validate(&self, _p: &ModelParams, s: &WavetrainSettings) -> Result<()> {
        for (name, v) in [
            ("delta", s.delta),
            ("k_2", s.k_2),
            ("influx_rate", s.influx_rate),
            ("t_end", s.t_end),
            ("dt", s.dt),
            ("merge_radius", s.merge_radius),
        ] {
            require_positive(name, v)?;
        }
        if s.n_cells < 100 {
            return Err(invalid(format!(
                "n_cells must be at least 100 (got {})",
                s.n_cells
            )));
        }
        if s.sample_every == 0 || s.snapshot_panels == 0 {
            return Err(invalid(
                "sample_every and snapshot_panels must be at least 1",
            ));
        }
        Ok(())
    }

    fn execute(&self, p: &ModelParams, s: &WavetrainSettings, out: &mut Artifacts) -> Result<()> {
        let pe = p.with_decay(s.delta, s.k_2);
        let traj = run_wavetrain(&pe, s.n_cells, s.influx_rate, s.t_end, s.dt, s.sample_every)?;
        let opts = CensusOptions {
            min_height: s.min_height,
            min_prominence: s.min_prominence,
            merge_radius: s.merge_radius,
            height_gap: s.height_gap,
            ..CensusOptions::default()
        };
        let rep = analyze_wavetrain(&traj, &opts);
        write_trajectory(out, "trajectory.csv", &thin(&traj, s.csv_snapshots))?;
        out.write_csv(
            "census.csv",
            rep.times
                .iter()
                .zip(&rep.counts)
                .map(|(&t, &count)| CensusRow { t, count }),
        )?;
        let mut pulses = Vec::new();
        for (id, tr) in rep.tracks.iter().enumerate() {
            for (k, (&x, &height)) in tr.x.iter().zip(&tr.height).enumerate() {
                pulses.push(PulseRow {
                    track: id,
                    t: rep.times[tr.start + k],
                    x,
                    height,
                });
            }
        }
        out.write_csv("pulses.csv", &pulses)?;
        out.write_csv("merges.csv", &rep.merges)?;
        out.write_csv(
            "summary.csv",
            [WavetrainSummary {
                snapshots: rep.times.len(),
                max_coexisting: rep.max_coexisting,
                merges: rep.merges.len(),
                comparisons: rep.comparisons,
                taller_faster: rep.taller_faster,
                taller_faster_fraction: rep.taller_faster_fraction(),
            }],
        )?;

        let n = traj.snapshots.len();
        let panels = (1..=s.snapshot_panels)
            .map(|k| {
                let snap = &traj.snapshots[(k * (n - 1)) / s.snapshot_panels];
                Plot::new(format!("A at t = {:.0}", snap.t), "cell j", "A").with(Series::new(
                    "A",
                    cells(&snap.a),
                    Style::Line,
                ))
            })
            .collect();
        out.write_svg("snapshots.svg", &Figure::stacked(panels))?;
        let counts = rep
            .times
            .iter()
            .zip(&rep.counts)
            .map(|(&t, &c)| (t, c as f64))
            .collect();
        out.write_svg(
            "counts.svg",
            &Figure::single(
                Plot::new("pulses on the row", "t", "count").with(Series::new(
                    "count",
                    counts,
                    Style::Line,
                )),
            ),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfilesSettings {
    /// speed coefficient; the normalizing value when omitted
    pub c0: Option<f64>,
    pub theta: f64,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub points: usize,
    /// level used for the reported width
    pub threshold: f64,
}

impl Default for ProfilesSettings {
    fn default() -> Self {
        ProfilesSettings {
            c0: None,
            theta: 0.0,
            x_min: None,
            x_max: None,
            points: 801,
            threshold: 0.05,
        }
    }
}

#[derive(Serialize)]
struct ConstantsRow {
    c0: f64,
    theta: f64,
    kappa: f64,
    tau1: f64,
    tau2: f64,
    c_star: f64,
    hp_star: f64,
    hr_star: f64,
    w_star: f64,
    sigma_max: f64,
    peak_location: f64,
    sigma_mass: f64,
    decay_rate: f64,
}

/// Tabulates the closed-form leading-order profiles.
pub struct Profiles;

impl Profiles {
    fn context(p: &ModelParams, s: &ProfilesSettings) -> Result<ProfileContext> {
        let c0 = match s.c0 {
            Some(c) => c,
            None => derived_constants(p)?.c_star,
        };
        Ok(ProfileContext::new(p, c0, s.theta)?)
    }
}

impl TypedExperiment for Profiles {
    type Settings = ProfilesSettings;
    const KIND: &'static str = "profiles";
    const SUMMARY: &'static str = "leading-order profiles and derived constants";

    fn validate(&self, p: &ModelParams, s: &ProfilesSettings) -> Result<()> {
        if let Some(c) = s.c0 {
            require_positive("c0", c)?;
        }
        if !s.theta.is_finite() {
            return Err(invalid("theta must be finite"));
        }
        if s.points < 2 {
            return Err(invalid("points must be at least 2"));
        }
        if let (Some(a), Some(b)) = (s.x_min, s.x_max) {
            if !(a < b) {
                return Err(invalid(format!("x_min {a} must be below x_max {b}")));
            }
        }
        if !(s.threshold > 0.0 && s.threshold < 1.0) {
            return Err(invalid("threshold must lie in (0, 1)"));
        }
        Self::context(p, s).map(|_| ())
    }

    fn execute(&self, p: &ModelParams, s: &ProfilesSettings, out: &mut Artifacts) -> Result<()> {
        let ctx = Self::context(p, s)?;
        let xp = ctx.peak_location();
        let half = ctx.support_half_width(1e-6);
        let x_min = s.x_min.unwrap_or(xp - half);
        let x_max = s.x_max.unwrap_or(xp + half);
        if x_min >= x_max {
            return Err(invalid(format!("window [{x_min}, {x_max}] is empty")));
        }
        let rows = ctx.tabulate(x_min, x_max, s.points);
        out.write_csv("profiles.csv", &rows)?;
        out.write_csv(
            "constants.csv",
            [ConstantsRow {
                c0: ctx.c0,
                theta: ctx.theta,
                kappa: ctx.dc.kappa,
                tau1: ctx.dc.tau1,
                tau2: ctx.dc.tau2,
                c_star: ctx.dc.c_star,
                hp_star: ctx.dc.hp_star,
                hr_star: ctx.dc.hr_star,
                w_star: ctx.w_star(s.threshold)?,
                sigma_max: ctx.sigma_max(),
                peak_location: xp,
                sigma_mass: ctx.sigma_mass(),
                decay_rate: ctx.decay_rate(),
            }],
        )?;
        let col = |f: fn(&auxin_core::profiles::ProfileRow) -> f64| {
            rows.iter().map(|r| (r.x, f(r))).collect()
        };
        out.write_svg(
            "profiles.svg",
            &Figure::stacked(vec![
                Plot::new("auxin", "X", "phi_A").with(Series::new(
                    "phi_A",
                    col(|r| r.phi_a),
                    Style::Line,
                )),
                Plot::new("PIN residues", "X", "phi_P, phi_R")
                    .with(Series::new("phi_P", col(|r| r.phi_p), Style::Line))
                    .with(Series::new("phi_R", col(|r| r.phi_r), Style::Line)),
                Plot::new("long-wave profiles", "X", "sigma, zeta")
                    .with(Series::new("sigma", col(|r| r.sigma), Style::Line))
                    .with(Series::new("zeta", col(|r| r.zeta), Style::Dashed)),
            ]),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LongWaveSettings {
    pub nu_list: Vec<f64>,
    /// values of nu for the multiplier symbol comparison
    pub symbol_nus: Vec<f64>,
    /// grid size, a power of two
    pub n: usize,
    pub quad_tol: f64,
    pub picard_tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub nonlinearity: Nonlinearity,
    /// grid points between rows of the psi tables
    pub csv_stride: usize,
    pub symbol_points: usize,
}

impl Default for LongWaveSettings {
    fn default() -> Self {
        LongWaveSettings {
            nu_list: vec![0.0, 0.005, 0.01, 0.02],
            symbol_nus: vec![0.2, 0.1, 0.05, 0.025],
            n: 1 << 16,
            quad_tol: 1e-6,
            picard_tol: 1e-10,
            max_iter: 200,
            damping: 1.0,
            nonlinearity: Nonlinearity::Literal,
            csv_stride: 16,
            symbol_points: 2000,
        }
    }
}

impl LongWaveSettings {
    fn solver(&self, p: &ModelParams, nu: f64) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(p, nu)?;
        cfg.n = self.n;
        cfg.quad_tol = self.quad_tol;
        cfg.picard_tol = self.picard_tol;
        cfg.max_iter = self.max_iter;
        cfg.damping = self.damping;
        cfg.nonlinearity = self.nonlinearity;
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct SolveRow {
    nu: f64,
    status: &'static str,
    iterations: Option<usize>,
    polish_iterations: Option<usize>,
    residual1: Option<f64>,
    residual2: Option<f64>,
    eta_norm: Option<f64>,
    eta_norm_over_cbrt_nu: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct PsiRow {
    x: f64,
    sigma: f64,
    zeta: f64,
    eta1: f64,
    eta2: f64,
    psi1: f64,
    psi2: f64,
}

#[derive(Serialize)]
struct SymbolRow {
    nu: f64,
    sup_distance: f64,
    over_cbrt_nu: f64,
}

/// Long-wave fixed-point solves over a list of nu values.
pub struct LongWaveStudy;

impl TypedExperiment for LongWaveStudy {
    type Settings = LongWaveSettings;
    const KIND: &'static str = "longwave";
    const SUMMARY: &'static str = "corrected long-wave profiles by fixed-point iteration";

    fn validate(&self, p: &ModelParams, s: &LongWaveSettings) -> Result<()> {
        if s.nu_list.is_empty() {
            return Err(invalid("nu_list must not be empty"));
        }
        if s.n < 256 || !s.n.is_power_of_two() {
            return Err(invalid(format!(
                "n must be a power of two >= 256 (got {})",
                s.n
            )));
        }
        for &nu in &s.nu_list {
            s.solver(p, nu)?.validate(p)?;
        }
        for &nu in &s.symbol_nus {
            require_positive("symbol nu", nu)?;
        }
        if !(s.damping > 0.0 && s.damping <= 1.0) {
            return Err(invalid(format!(
                "damping must lie in (0, 1] (got {})",
                s.damping
            )));
        }
        if s.csv_stride == 0 || s.symbol_points < 2 {
            return Err(invalid(
                "csv_stride must be positive and symbol_points at least 2",
            ));
        }
        Ok(())
    }

    fn execute(&self, p: &ModelParams, s: &LongWaveSettings, out: &mut Artifacts) -> Result<()> {
        let mut rows = Vec::new();
        let mut psi_plot = Plot::new("psi1", "X", "psi1");
        let mut zeta_plot = Plot::new("psi2", "X", "psi2");
        for &nu in &s.nu_list {
            let solved = LongWave::new(p, s.solver(p, nu)?)
                .and_then(|lw| lw.picard_solve().map(|r| (lw, r)));
            let (lw, res) = match solved {
                Ok(v) => v,
                Err(e) => {
                    rows.push(SolveRow {
                        nu,
                        status: "error",
                        iterations: None,
                        polish_iterations: None,
                        residual1: None,
                        residual2: None,
                        eta_norm: None,
                        eta_norm_over_cbrt_nu: None,
                        error: Some(e.to_string()),
                    });
                    continue;
                }
            };
            rows.push(SolveRow {
                nu,
                status: "ok",
                iterations: Some(res.iterations),
                polish_iterations: Some(res.polish_iterations),
                residual1: Some(res.residual1),
                residual2: Some(res.residual2),
                eta_norm: Some(res.eta_norm),
                eta_norm_over_cbrt_nu: (nu > 0.0).then(|| res.eta_norm / nu.cbrt()),
                error: None,
            });
            let (sigma, zeta) = (lw.sigma(), lw.zeta());
            let (psi1, psi2) = (res.psi1(&lw), res.psi2(&lw));
            let table: Vec<PsiRow> = (0..lw.grid.n)
                .step_by(s.csv_stride)
                .map(|i| PsiRow {
                    x: lw.grid.x(i),
                    sigma: sigma.values[i],
                    zeta: zeta.values[i],
                    eta1: res.eta1.values[i],
                    eta2: res.eta2.values[i],
                    psi1: psi1.values[i],
                    psi2: psi2.values[i],
                })
                .collect();
            out.write_csv(&format!("psi_nu{nu}.csv"), &table)?;
            if nu == 0.0 {
                psi_plot = psi_plot.with(Series::new(
                    "sigma",
                    table.iter().map(|r| (r.x, r.sigma)).collect(),
                    Style::Dashed,
                ));
                zeta_plot = zeta_plot.with(Series::new(
                    "zeta",
                    table.iter().map(|r| (r.x, r.zeta)).collect(),
                    Style::Dashed,
                ));
            }
            let label = format!("nu = {nu}");
            psi_plot = psi_plot.with(Series::new(
                &label,
                table.iter().map(|r| (r.x, r.psi1)).collect(),
                Style::Line,
            ));
            zeta_plot = zeta_plot.with(Series::new(
                label,
                table.iter().map(|r| (r.x, r.psi2)).collect(),
                Style::Line,
            ));
        }
        out.write_csv("convergence.csv", &rows)?;
        out.write_svg("psi.svg", &Figure::stacked(vec![psi_plot, zeta_plot]))?;

        // symbol comparison over the resolved band of the default grid
        let base = s.solver(p, 0.0)?;
        let ctx = ProfileContext::new(p, base.c0, base.theta)?;
        let h = 2.0 * LongWave::auto_half_width(&ctx) / s.n as f64;
        let k_max = std::f64::consts::PI / h;
        let ks: Vec<f64> = (0..s.symbol_points)
            .map(|i| k_max * i as f64 / (s.symbol_points - 1) as f64)
            .collect();
        let tau2 = p.tau2();
        let symbol: Vec<SymbolRow> = s
            .symbol_nus
            .iter()
            .map(|&nu| {
                let sup = ks
                    .iter()
                    .map(|&k| {
                        (multiplier_symbol(k, nu, base.c0, tau2)
                            - multiplier_symbol(k, 0.0, base.c0, tau2))
                        .norm()
                    })
                    .fold(0.0, f64::max);
                SymbolRow {
                    nu,
                    sup_distance: sup,
                    over_cbrt_nu: sup / nu.cbrt(),
                }
            })
            .collect();
        out.write_csv("symbol.csv", &symbol)?;

        let converged: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.nu, r.eta_norm?)))
            .filter(|(nu, _)| *nu > 0.0)
            .collect();
        let mut norms = Plot::new("correction size", "nu", "norm")
            .log_log()
            .with(Series::new("eta norm", converged.clone(), Style::Markers))
            .with(Series::new(
                "symbol distance",
                symbol.iter().map(|r| (r.nu, r.sup_distance)).collect(),
                Style::Markers,
            ));
        if let Some(&(nu0, e0)) = converged.first() {
            let nus: Vec<f64> = converged
                .iter()
                .map(|c| c.0)
                .chain(s.symbol_nus.iter().copied())
                .collect();
            let (lo, hi) = nus
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                    (l.min(v), h.max(v))
                });
            let guide = [lo, hi]
                .iter()
                .map(|&x| (x, e0 * (x / nu0).cbrt()))
                .collect();
            norms = norms.with(Series::new("slope 1/3", guide, Style::Dashed));
        }
        out.write_svg("convergence.svg", &Figure::single(norms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_keeps_the_last_snapshot() {
        let p = ModelParams::reference();
        let traj = run_pulse(
            &p,
            0.15,
            &PulseRunConfig {
                n_cells: 60,
                t_end: Some(5.0),
                dt: Some(0.05),
                snapshots: 25,
                ..PulseRunConfig::default()
            },
        )
        .unwrap();
        let n = traj.snapshots.len();
        let t = thin(&traj, 7);
        assert!(t.snapshots.len() <= 8);
        assert_eq!(t.last(), traj.last());
        assert_eq!(thin(&traj, 0).snapshots.len(), n);
    }

    #[test]
    fn settings_reject_bad_values() {
        let p = ModelParams::reference();
        let bad = PulseRunSettings {
            a_diamond: -1.0,
            ..Default::default()
        };
        assert!(PulseRun.validate(&p, &bad).is_err());
        let few = SweepSettings {
            amplitudes: vec![0.1, 0.2],
            ..Default::default()
        };
        assert!(Sweep.validate(&p, &few).is_err());
        let window = ProfilesSettings {
            x_min: Some(1.0),
            x_max: Some(0.0),
            ..Default::default()
        };
        assert!(Profiles.validate(&p, &window).is_err());
        let grid = LongWaveSettings {
            n: 1000,
            ..Default::default()
        };
        assert!(LongWaveStudy.validate(&p, &grid).is_err());
        assert!(Wavetrain
            .validate(&p, &WavetrainSettings::default())
            .is_ok());
    }

    #[test]
    fn expanded_params_are_refused_for_single_pulses() {
        let p = ModelParams::reference().with_decay(0.1, 0.2);
        assert!(PulseRun.validate(&p, &PulseRunSettings::default()).is_err());
    }
}
