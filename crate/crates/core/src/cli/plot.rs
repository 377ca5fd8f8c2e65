//! Minimal deterministic SVG line plots with an optional log-scale y axis.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers only, no connecting line.
    pub markers_only: bool,
}

impl SweepSeries {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        SweepSeries {
            label: label.into(),
            points,
            markers_only: false,
        }
    }

    pub fn markers(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        SweepSeries {
            markers_only: true,
            ..Self::line(label, points)
        }
    }

    pub fn validate(&self, log_y: bool) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Plot(format!("series {:?} is empty", self.label)));
        }
        if self.points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Plot(format!(
                "series {:?}: x must be strictly increasing",
                self.label
            )));
        }
        if log_y && self.points.iter().any(|p| !(p.1 > 0.0)) {
            return Err(Error::Plot(format!(
                "series {:?}: log scale needs positive y",
                self.label
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotAxes {
    pub log_y: bool,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

impl Default for PlotAxes {
    fn default() -> Self {
        PlotAxes {
            log_y: true,
            title: String::new(),
            x_label: "gamma".into(),
            y_label: "SER".into(),
            x_range: None,
            y_range: None,
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let f = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    f * mag
}

/// Renders the plot; identical input gives identical bytes.
pub fn render_svg(series: &[SweepSeries], axes: &PlotAxes) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Plot("nothing to plot".into()));
    }
    for s in series {
        s.validate(axes.log_y)?;
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1) = axes.x_range.unwrap_or_else(|| {
        all().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)))
    });
    let (mut y0, mut y1) = axes.y_range.unwrap_or_else(|| {
        all().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)))
    });
    if axes.log_y {
        if axes.y_range.is_none() {
            y0 = 10f64.powf(y0.log10().floor());
            y1 = 10f64.powf(y1.log10().ceil());
        }
        if !(y0 > 0.0) {
            return Err(Error::Plot("log scale needs a positive y range".into()));
        }
    }
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 <= y0 {
        if axes.log_y {
            y0 /= 10.0;
            y1 *= 10.0;
        } else {
            y0 -= 0.5;
            y1 += 0.5;
        }
    }
    let ty = |y: f64| if axes.log_y { y.log10() } else { y };
    let (ty0, ty1) = (ty(y0), ty(y1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (1.0 - (ty(y) - ty0) / (ty1 - ty0)) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#);

    // grid and tick labels
    let _ = writeln!(out, r##"<g stroke="#dddddd" stroke-width="1">"##);
    let mut yticks = Vec::new();
    if axes.log_y {
        let (lo, hi) = (ty0.ceil() as i32, ty1.floor() as i32);
        for e in lo..=hi {
            let y = 10f64.powi(e);
            yticks.push((y, format!("1e{e}")));
        }
    } else {
        let step = nice_step(y1 - y0);
        let mut k = (y0 / step).ceil() as i64;
        while k as f64 * step <= y1 + 1e-9 * step {
            let y = k as f64 * step;
            yticks.push((y, format!("{}", (y / step).round() * step)));
            k += 1;
        }
    }
    for (y, _) in &yticks {
        let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, py(*y), LEFT + pw, py(*y));
    }
    let xstep = nice_step(x1 - x0);
    let mut xticks = Vec::new();
    let mut k = (x0 / xstep).ceil() as i64;
    while k as f64 * xstep <= x1 + 1e-9 * xstep {
        xticks.push(k as f64 * xstep);
        k += 1;
    }
    for x in &xticks {
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{TOP}" x2="{:.2}" y2="{:.2}"/>"#, px(*x), px(*x), TOP + ph);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for (y, label) in &yticks {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, py(*y) + 4.0);
    }
    for x in &xticks {
        let label = format!("{}", (x / xstep).round() * xstep);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, px(*x), TOP + ph + 18.0);
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0, escape(&axes.x_label));
    let _ = writeln!(out, r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#, TOP + ph / 2.0, escape(&axes.y_label));
    if !axes.title.is_empty() {
        let _ = writeln!(out, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&axes.title));
    }

    // data
    let _ = writeln!(out, r#"<g clip-path="url(#plot)">"#);
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if !s.markers_only && s.points.len() > 1 {
            let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        }
        if s.markers_only || s.points.len() == 1 {
            for &(x, y) in &s.points {
                let _ = writeln!(out, r#"<rect x="{:.2}" y="{:.2}" width="6" height="6" fill="none" stroke="{color}"/>"#, px(x) - 3.0, py(y) - 3.0);
            }
        }
    }
    let _ = writeln!(out, "</g>");

    // legend
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let y = TOP + 14.0 + 16.0 * i as f64;
        let x = LEFT + pw - 170.0;
        if s.markers_only {
            let _ = writeln!(out, r#"<rect x="{:.2}" y="{:.2}" width="6" height="6" fill="none" stroke="{color}"/>"#, x + 9.0, y - 7.0);
        } else {
            let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/>"#, y - 4.0, x + 24.0, y - 4.0);
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, x + 30.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn plot_svg(series: &[SweepSeries], axes: &PlotAxes, path: impl AsRef<Path>) -> Result<()> {
    let svg = render_svg(series, axes)?;
    std::fs::write(path.as_ref(), svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> SweepSeries {
        SweepSeries::line("bound", vec![(0.1, 0.84), (1.0, 0.37), (2.0, 0.058), (3.0, 0.0034)])
    }

    #[test]
    fn deterministic_with_decade_grid() {
        let axes = PlotAxes {
            x_range: Some((0.1, 3.0)),
            y_range: Some((1e-3, 1.0)),
            ..PlotAxes::default()
        };
        let mc = SweepSeries::markers("simulation", vec![(0.1, 0.8), (2.6, 0.0089)]);
        let a = render_svg(&[curve(), mc.clone()], &axes).unwrap();
        let b = render_svg(&[curve(), mc], &axes).unwrap();
        assert_eq!(a, b);
        for label in ["1e-3", "1e-2", "1e-1", "1e0"] {
            assert!(a.contains(&format!(">{label}</text>")), "{label}");
        }
        assert!(a.contains(">bound</text>") && a.contains(">simulation</text>"));
        assert_eq!(a.matches("<polyline").count(), 1);
    }

    #[test]
    fn single_point_is_a_marker() {
        let s = SweepSeries::line("one", vec![(1.0, 0.5)]);
        let svg = render_svg(&[s], &PlotAxes::default()).unwrap();
        assert!(!svg.contains("<polyline"));
        assert!(svg.contains("<rect x="));
    }

    #[test]
    fn rejects_bad_series() {
        assert!(render_svg(&[], &PlotAxes::default()).is_err());
        let empty = SweepSeries::line("e", vec![]);
        assert!(render_svg(&[empty], &PlotAxes::default()).is_err());
        let zero = SweepSeries::line("z", vec![(0.0, 0.0), (1.0, 0.1)]);
        assert!(render_svg(&[zero.clone()], &PlotAxes::default()).is_err());
        let linear = PlotAxes {
            log_y: false,
            ..PlotAxes::default()
        };
        assert!(render_svg(&[zero], &linear).is_ok());
        let unsorted = SweepSeries::line("u", vec![(1.0, 0.1), (0.5, 0.2)]);
        assert!(render_svg(&[unsorted], &linear).is_err());
    }
}
