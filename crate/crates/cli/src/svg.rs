//! Static SVG figures: stacked panels of line, dashed-line and marker series
//! on linear or logarithmic axes.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 48.0;

/// Categorical palette used when a series has no colour of its own.
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Markers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    pub color: Option<&'static str>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, style: Style) -> Self {
        Series {
            label: label.into(),
            points,
            style,
            color: None,
        }
    }

    pub fn color(mut self, c: &'static str) -> Self {
        self.color = Some(c);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Plot {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Figure {
    pub panels: Vec<Plot>,
}

impl Figure {
    pub fn single(p: Plot) -> Self {
        Figure { panels: vec![p] }
    }

    pub fn stacked(panels: Vec<Plot>) -> Self {
        Figure { panels }
    }

    pub fn render(&self) -> String {
        let height = PANEL_HEIGHT * self.panels.len().max(1) as f64;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for (k, p) in self.panels.iter().enumerate() {
            render_panel(&mut s, p, k as f64 * PANEL_HEIGHT);
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Axis mapping from data to pixels.
struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
    p0: f64,
    p1: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool, p0: f64, p1: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
            lo -= pad;
            hi += pad;
        }
        let pad = 0.04 * (hi - lo);
        Axis {
            log,
            lo: lo - pad,
            hi: hi + pad,
            p0,
            p1,
        }
    }

    fn map(&self, v: f64) -> Option<f64> {
        let t = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        t.is_finite()
            .then(|| self.p0 + (t - self.lo) / (self.hi - self.lo) * (self.p1 - self.p0))
    }

    /// Tick positions in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let decades: Vec<f64> = (a..=b).map(|e| 10f64.powi(e)).collect();
            if decades.len() >= 2 {
                return decades;
            }
            let mut out = Vec::new();
            for e in (self.lo.floor() as i32)..=(self.hi.ceil() as i32) {
                for m in [1.0, 2.0, 5.0] {
                    let v = m * 10f64.powi(e);
                    if v.log10() >= self.lo && v.log10() <= self.hi {
                        out.push(v);
                    }
                }
            }
            return out;
        }
        // nearest 1-2-5 step to about six intervals
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .min_by(|a, b| (a / raw).ln().abs().total_cmp(&(b / raw).ln().abs()))
            .unwrap_or(mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|i| i as f64 * step).collect()
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{v:.0e}");
    }
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn render_panel(s: &mut String, p: &Plot, top: f64) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (top + PANEL_HEIGHT - MARGIN_B, top + MARGIN_T);
    let xs = Axis::fit(
        p.series.iter().flat_map(|s| s.points.iter().map(|q| q.0)),
        p.log_x,
        x0,
        x1,
    );
    let ys = Axis::fit(
        p.series.iter().flat_map(|s| s.points.iter().map(|q| q.1)),
        p.log_y,
        y0,
        y1,
    );

    let _ = writeln!(
        s,
        r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        top + 20.0,
        escape(&p.title)
    );
    for t in xs.ticks() {
        if let Some(px) = xs.map(t) {
            let _ = writeln!(
                s,
                r##"<line x1="{px:.1}" y1="{y0:.1}" x2="{px:.1}" y2="{:.1}" stroke="#888"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                y0 + 5.0,
                y0 + 18.0,
                tick_label(t)
            );
        }
    }
    for t in ys.ticks() {
        if let Some(py) = ys.map(t) {
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="#888"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                x0 - 5.0,
                x0 - 8.0,
                py + 4.0,
                tick_label(t)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        y0 + 36.0,
        escape(&p.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate({:.1},{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        x0 - 58.0,
        (y0 + y1) / 2.0,
        escape(&p.y_label)
    );

    for (k, ser) in p.series.iter().enumerate() {
        let color = ser.color.unwrap_or(PALETTE[k % PALETTE.len()]);
        let pts: Vec<(f64, f64)> = ser
            .points
            .iter()
            .filter_map(|&(x, y)| Some((xs.map(x)?, ys.map(y)?)))
            .collect();
        match ser.style {
            Style::Markers => {
                for (px, py) in &pts {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{px:.1}" cy="{py:.1}" r="3.5" fill="{color}"/>"#
                    );
                }
            }
            Style::Line | Style::Dashed => {
                let dash = if ser.style == Style::Dashed {
                    r#" stroke-dasharray="6,4""#
                } else {
                    ""
                };
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.6"{dash} points="{}"/>"#,
                    path.join(" ")
                );
            }
        }
        let ly = y1 + 14.0 + 18.0 * k as f64;
        let lx = x1 + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"{}/><text x="{:.1}" y="{ly:.1}">{}</text>"#,
            ly - 4.0,
            lx + 22.0,
            ly - 4.0,
            if ser.style == Style::Dashed {
                r#" stroke-dasharray="6,4""#
            } else {
                ""
            },
            lx + 28.0,
            escape(&ser.label)
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_series_and_panel() {
        let a = Plot::new("first <A>", "x", "y")
            .with(Series::new(
                "line",
                vec![(0.0, 0.0), (1.0, 2.0)],
                Style::Line,
            ))
            .with(Series::new(
                "dash",
                vec![(0.0, 1.0), (1.0, 1.0)],
                Style::Dashed,
            ));
        let b = Plot::new("second", "h", "c").log_log().with(Series::new(
            "pts",
            vec![(0.01, 0.1), (0.1, 0.3), (-1.0, 5.0)],
            Style::Markers,
        ));
        let svg = Figure::stacked(vec![a, b]).render();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        // the nonpositive point is dropped on log axes
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("first &lt;A&gt;"));
        assert!(svg.contains(r#"height="600""#));
    }

    #[test]
    fn linear_ticks_are_round() {
        let ax = Axis::fit([0.0, 0.93].into_iter(), false, 0.0, 100.0);
        let t = ax.ticks();
        assert!(t.len() >= 4);
        assert!(t
            .iter()
            .all(|v| ((v / 0.2).round() * 0.2 - v).abs() < 1e-12));
    }

    #[test]
    fn log_ticks_cover_decades() {
        let ax = Axis::fit([0.003, 2.0].into_iter(), true, 0.0, 100.0);
        assert_eq!(ax.ticks(), vec![0.01, 0.1, 1.0]);
        assert_eq!(tick_label(0.25), "0.25");
        assert_eq!(tick_label(1e-5), "1e-5");
    }

    #[test]
    fn degenerate_ranges_still_render() {
        let p =
            Plot::new("flat", "x", "y").with(Series::new("c", vec![(1.0, 3.0)], Style::Markers));
        let svg = Figure::single(p).render();
        assert!(!svg.contains("NaN"));
        let empty = Figure::single(Plot::new("none", "x", "y")).render();
        assert!(!empty.contains("NaN"));
    }

    proptest::proptest! {
        #[test]
        fn ticks_are_sorted_and_inside(lo in -1e4f64..1e4, span in 1e-6f64..1e4, log in proptest::bool::ANY) {
            let (a, b) = if log { (span.min(1.0), span.max(1.0) * 3.0) } else { (lo, lo + span) };
            let ax = Axis::fit([a, b].into_iter(), log, 0.0, 100.0);
            let t = ax.ticks();
            proptest::prop_assert!(!t.is_empty() && t.len() <= 12, "{:?}", t);
            proptest::prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
            for v in t {
                let px = ax.map(v).unwrap();
                proptest::prop_assert!((-1e-9..=100.0 + 1e-9).contains(&px));
            }
        }
    }
}
