//! Static SVG charts.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MetricSeries, MetricsError, Point};
use crate::generate::ALPHA_C;
use crate::profile::ProfileRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 80.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps data coordinates onto the plotting area.
#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
    log: bool,
}

impl Scale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64, log: bool) -> Self {
        let (lo, hi) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
        let (lo, hi) = if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        Scale { lo, hi, px_lo, px_hi, log }
    }

    fn map(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.floor() as i32, self.hi.ceil() as i32);
            return (a..=b)
                .map(|e| 10f64.powi(e))
                .filter(|&t| t.log10() >= self.lo - 1e-9 && t.log10() <= self.hi + 1e-9)
                .collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 2.5, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + step * 1e-9 {
            out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
            t += step;
        }
        out
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 0.01 || v.abs() >= 1e5) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Canvas { out }
    }

    fn x_axis(&mut self, scale: &Scale, label: &str) {
        let y = HEIGHT - BOTTOM;
        let _ = writeln!(self.out, r#"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#, WIDTH - RIGHT);
        for t in scale.ticks() {
            let x = scale.map(t);
            let _ = writeln!(
                self.out,
                r#"<line x1="{x:.2}" y1="{y}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                y + 5.0,
                y + 18.0,
                tick_label(t)
            );
        }
        let _ = writeln!(
            self.out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 20.0,
            escape(label)
        );
    }

    fn y_axis(&mut self, scale: &Scale, label: &str, right: bool, color: &str) {
        let x = if right { WIDTH - RIGHT } else { LEFT };
        let dir = if right { 1.0 } else { -1.0 };
        let anchor = if right { "start" } else { "end" };
        let _ = writeln!(self.out, r#"<line x1="{x}" y1="{TOP}" x2="{x}" y2="{}" stroke="{color}"/>"#, HEIGHT - BOTTOM);
        for t in scale.ticks() {
            let y = scale.map(t);
            let _ = writeln!(
                self.out,
                r#"<line x1="{x}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="{color}"/><text x="{}" y="{:.2}" text-anchor="{anchor}" fill="{color}">{}</text>"#,
                x + 5.0 * dir,
                x + 8.0 * dir,
                y + 4.0,
                tick_label(t)
            );
        }
        let lx = if right { WIDTH - 15.0 } else { 18.0 };
        let ly = (TOP + HEIGHT - BOTTOM) / 2.0;
        let _ = writeln!(
            self.out,
            r#"<text x="{lx}" y="{ly}" text-anchor="middle" fill="{color}" transform="rotate(-90 {lx} {ly})">{}</text>"#,
            escape(label)
        );
    }

    fn polyline(&mut self, points: &[Point], xs: &Scale, ys: &Scale, color: &str) {
        let coords: Vec<String> = points
            .iter()
            .map(|p| format!("{:.2},{:.2}", xs.map(p.x), ys.map(p.y)))
            .collect();
        let _ = writeln!(
            self.out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for c in &coords {
            let (cx, cy) = c.split_once(',').expect("formatted pair");
            let _ = writeln!(self.out, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
    }

    fn vline(&mut self, x: f64, color: &str, dash: &str, caption: &str, caption_y: f64) {
        let _ = writeln!(
            self.out,
            r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="{color}" stroke-dasharray="{dash}"/><text x="{:.2}" y="{caption_y}" fill="{color}">{}</text>"#,
            HEIGHT - BOTTOM,
            x + 4.0,
            escape(caption)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = TOP + 12.0 + 16.0 * i as f64;
            let _ = writeln!(
                self.out,
                r#"<rect x="{}" y="{}" width="12" height="3" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
                LEFT + 10.0,
                y - 4.0,
                LEFT + 28.0,
                y,
                escape(label)
            );
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// One or more series on shared axes. With `log_x` the x axis is
/// logarithmic (used for satisfiability ratios).
pub fn line_chart(series: &[MetricSeries], title: &str, x_label: &str, y_label: &str, log_x: bool) -> String {
    let mut canvas = Canvas::new(title);
    let all = || series.iter().flat_map(|s| s.points.iter());
    let Some((x_lo, x_hi)) = extent(all().map(|p| p.x)) else {
        return canvas.finish();
    };
    let (y_lo, y_hi) = extent(all().map(|p| p.y)).expect("points exist");
    let xs = Scale::new(x_lo, x_hi, LEFT, WIDTH - RIGHT, log_x);
    let ys = Scale::new(y_lo.min(0.0), y_hi.max(1e-12), HEIGHT - BOTTOM, TOP, false);
    canvas.x_axis(&xs, x_label);
    canvas.y_axis(&ys, y_label, false, "black");
    let mut legend = Vec::new();
    for (s, color) in series.iter().zip(COLORS.iter().cycle()) {
        canvas.polyline(&s.points, &xs, &ys, color);
        legend.push((s.label.as_str(), *color));
    }
    canvas.legend(&legend);
    canvas.finish()
}

/// Which solver-effort measure the right axis shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Secondary {
    #[default]
    Decisions,
    WallTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseChart {
    pub psat: MetricSeries,
    pub decisions: MetricSeries,
    pub wall_time: MetricSeries,
    /// α where P(SAT) first falls below one half, if it does.
    pub crossing: Option<f64>,
    pub svg: String,
}

impl PhaseChart {
    /// Writes `phase.svg` and the `phase_psat.csv`, `phase_decisions.csv`
    /// and `phase_wall_time.csv` companions into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), MetricsError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| MetricsError::Io { path, source }
        };
        let svg_path = dir.join("phase.svg");
        std::fs::write(&svg_path, &self.svg).map_err(io(&svg_path))?;
        self.psat.write_csv(&dir.join("phase_psat.csv"))?;
        self.decisions.write_csv(&dir.join("phase_decisions.csv"))?;
        self.wall_time.write_csv(&dir.join("phase_wall_time.csv"))
    }
}

/// P(SAT) on the left axis and mean solver effort on the right, against α,
/// with a marker at the critical density and at the empirical crossing.
pub fn phase_chart(profile: &[ProfileRow], secondary: Secondary) -> Result<PhaseChart, MetricsError> {
    let first = profile.first().ok_or(MetricsError::EmptyProfile)?;
    if let Some(other) = profile.iter().find(|r| r.n != first.n) {
        return Err(MetricsError::MixedSizes(first.n, other.n));
    }
    let mut rows: Vec<&ProfileRow> = profile.iter().collect();
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let series = |name: &str, y: fn(&ProfileRow) -> f64| MetricSeries {
        label: format!("n={} {name}", first.n),
        window: 1,
        points: rows
            .iter()
            .map(|r| Point {
                x: r.alpha,
                y: y(r),
                support: r.samples,
            })
            .collect(),
    };
    let psat = series("p_sat", |r| r.p_sat);
    let decisions = series("mean_decisions", |r| r.mean_decisions);
    let wall_time = series("mean_wall_time_s", |r| r.mean_wall_time);
    let crossing = psat.crossing(0.5);

    let right = match secondary {
        Secondary::Decisions => &decisions,
        Secondary::WallTime => &wall_time,
    };
    let mut canvas = Canvas::new(&format!("Random 3-SAT phase transition, n = {}", first.n));
    let (x_lo, x_hi) = extent(rows.iter().map(|r| r.alpha)).expect("non-empty");
    let (x_lo, x_hi) = (x_lo.min(ALPHA_C), x_hi.max(ALPHA_C));
    let xs = Scale::new(x_lo, x_hi, LEFT, WIDTH - RIGHT, false);
    let left = Scale::new(0.0, 1.0, HEIGHT - BOTTOM, TOP, false);
    let (_, r_hi) = extent(right.points.iter().map(|p| p.y)).expect("non-empty");
    let rs = Scale::new(0.0, r_hi.max(1e-12), HEIGHT - BOTTOM, TOP, false);
    canvas.x_axis(&xs, "α = m / n");
    canvas.y_axis(&left, "P(SAT)", false, COLORS[0]);
    let right_label = match secondary {
        Secondary::Decisions => "mean DPLL decisions",
        Secondary::WallTime => "mean wall time (s)",
    };
    canvas.y_axis(&rs, right_label, true, COLORS[1]);
    canvas.vline(xs.map(ALPHA_C), "gray", "6 4", &format!("α_c = {ALPHA_C}"), TOP + 12.0);
    if let Some(c) = crossing {
        canvas.vline(xs.map(c), COLORS[2], "2 3", &format!("P(SAT) = 0.5 at α = {c:.2}"), TOP + 28.0);
    }
    canvas.polyline(&psat.points, &xs, &left, COLORS[0]);
    canvas.polyline(&right.points, &xs, &rs, COLORS[1]);
    Ok(PhaseChart {
        svg: canvas.finish(),
        psat,
        decisions,
        wall_time,
        crossing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alpha: f64, p_sat: f64, decisions: f64) -> ProfileRow {
        ProfileRow {
            n: 20,
            alpha,
            samples: 100,
            mean_decisions: decisions,
            mean_wall_time: 1e-4,
            p_sat,
        }
    }

    #[test]
    fn crossing_and_companions() {
        let profile = [row(5.0, 0.2, 30.0), row(3.0, 1.0, 5.0), row(4.0, 0.8, 20.0)];
        let chart = phase_chart(&profile, Secondary::Decisions).unwrap();
        assert_eq!(chart.psat.points.iter().map(|p| p.x).collect::<Vec<_>>(), vec![3.0, 4.0, 5.0]);
        assert!((chart.crossing.unwrap() - 4.5).abs() < 1e-12);
        assert!(chart.svg.contains("α_c = 4.267"));
        assert!(chart.svg.contains("P(SAT) = 0.5 at α = 4.50"));
        assert!(chart.svg.starts_with("<svg") && chart.svg.ends_with("</svg>\n"));

        let dir = tempfile::tempdir().unwrap();
        chart.write(dir.path()).unwrap();
        for (file, series) in [
            ("phase_psat.csv", &chart.psat),
            ("phase_decisions.csv", &chart.decisions),
            ("phase_wall_time.csv", &chart.wall_time),
        ] {
            assert_eq!(&MetricSeries::read_csv(&dir.path().join(file)).unwrap(), series);
        }
    }

    #[test]
    fn single_alpha_has_no_crossing() {
        let chart = phase_chart(&[row(4.0, 0.5, 10.0)], Secondary::WallTime).unwrap();
        assert_eq!(chart.crossing, None);
        assert_eq!(chart.psat.points.len(), 1);
        assert!(!chart.svg.contains("P(SAT) = 0.5 at"));
    }

    #[test]
    fn errors() {
        assert!(matches!(phase_chart(&[], Secondary::Decisions), Err(MetricsError::EmptyProfile)));
        let mut other = row(4.0, 0.5, 1.0);
        other.n = 10;
        assert!(matches!(
            phase_chart(&[row(3.0, 1.0, 1.0), other], Secondary::Decisions),
            Err(MetricsError::MixedSizes(20, 10))
        ));
    }

    #[test]
    fn line_chart_is_deterministic_and_escapes() {
        let s = MetricSeries {
            label: "a<b".into(),
            window: 4,
            points: vec![Point { x: 0.01, y: 0.5, support: 3 }, Point { x: 0.5, y: 1.0, support: 2 }],
        };
        let svg = line_chart(std::slice::from_ref(&s), "t", "ratio", "accuracy", true);
        assert_eq!(svg, line_chart(&[s], "t", "ratio", "accuracy", true));
        assert!(svg.contains("a&lt;b"));
        assert!(line_chart(&[], "t", "x", "y", false).ends_with("</svg>\n"));
    }
}
