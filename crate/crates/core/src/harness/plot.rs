//! Standalone SVG line plots of a run.
//!
//! Each plot carries its axis ranges as `data-*` attributes on the
//! `plot-area` group so tools can read the scale without parsing tick labels.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::sim::SimLog;
use crate::trajectory::ParamCurve;
use crate::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub const PLOT_FILES: [&str; 4] = [
    "psi_vs_t.svg",
    "psidot_vs_t.svg",
    "wrench_vs_t.svg",
    "reference_nominal_vs_advanced.svg",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub opacity: f64,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, color: &'static str) -> Self {
        Self {
            label: label.into(),
            points,
            color,
            opacity: 1.0,
            dashed: false,
        }
    }
}

/// Axis range of a set of values, padded by 5% and widened when flat.
fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (x_min, x_max) = axis_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y_min, y_max) = axis_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * pw;
    let sy = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g id="plot-area" data-x-min="{x_min:e}" data-x-max="{x_max:e}" data-y-min="{y_min:e}" data-y-max="{y_max:e}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = x_min + f * (x_max - x_min);
        let yv = y_min + f * (y_max - y_min);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{MARGIN_TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            MARGIN_TOP + ph,
            MARGIN_TOP + ph + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT + pw,
            MARGIN_LEFT - 6.0,
            py + 4.0,
            tick(yv)
        );
    }
    for (k, ser) in series.iter().enumerate() {
        let mut pts = String::with_capacity(ser.points.len() * 16);
        for &(x, y) in &ser.points {
            let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let dash = if ser.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<polyline class="series" fill="none" stroke="{}" stroke-opacity="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            ser.color,
            ser.opacity,
            pts.trim_end()
        );
        let ly = MARGIN_TOP + 14.0 + 18.0 * k as f64;
        let lx = MARGIN_LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-opacity="{}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            ser.color,
            ser.opacity,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(ylabel)
    );
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// The four run plots, as (file name, SVG text).
pub fn render_plots(log: &SimLog, curve: Option<&ParamCurve>) -> Vec<(&'static str, String)> {
    let rows = &log.rows;
    let col = |f: &dyn Fn(&super::sim::LogRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter().map(|r| (r.t, f(r))).collect()
    };

    let mut psi_ref = Series::new("t", col(&|r| r.t), "#7f7f7f");
    psi_ref.dashed = true;
    let psi = line_plot(
        "Free parameter",
        "t [s]",
        "psi",
        &[Series::new("psi", col(&|r| r.psi), PALETTE[0]), psi_ref],
    );

    let psidot = line_plot(
        "Free parameter rate",
        "t [s]",
        "psi_dot",
        &[Series::new("psi_dot", col(&|r| r.psi_dot), PALETTE[1])],
    );

    let mut wrench_series = Vec::new();
    for (i, name) in ["fx", "fy", "fz"].iter().enumerate() {
        if rows.iter().any(|r| r.f_hands[i] != 0.0) {
            wrench_series.push(Series::new(
                format!("hands {name}"),
                col(&|r| r.f_hands[i]),
                PALETTE[i],
            ));
        }
    }
    if rows.iter().any(|r| r.f_feet.iter().any(|&v| v != 0.0)) {
        wrench_series.push(Series::new(
            "|feet f|",
            col(&|r| r.f_feet.fixed_rows::<3>(0).norm()),
            PALETTE[3],
        ));
    }
    if wrench_series.is_empty() {
        wrench_series.push(Series::new("hands fx", col(&|r| r.f_hands[0]), PALETTE[0]));
    }
    let wrench = line_plot("Applied wrench", "t [s]", "force [N]", &wrench_series);

    let mut ref_series = Vec::new();
    let labels = ["x", "y", "z", "rx", "ry", "rz"];
    let nominal: Option<Vec<crate::Vec6>> = curve.map(|c| {
        rows.iter()
            .map(|r| c.eval(r.t).expect("log times are non-negative"))
            .collect()
    });
    for i in 0..6 {
        let varies = |vals: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            hi > lo
        };
        let advanced_varies = varies(&mut rows.iter().map(|r| r.x_d[i]));
        let nominal_varies = nominal
            .as_ref()
            .is_some_and(|n| varies(&mut n.iter().map(|v| v[i])));
        if !advanced_varies && !nominal_varies {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        if let Some(n) = &nominal {
            let mut s = Series::new(
                format!("{} nominal", labels[i]),
                rows.iter().zip(n).map(|(r, v)| (r.t, v[i])).collect(),
                color,
            );
            s.opacity = 0.35;
            ref_series.push(s);
        }
        ref_series.push(Series::new(
            format!("{} advanced", labels[i]),
            col(&|r| r.x_d[i]),
            color,
        ));
    }
    if ref_series.is_empty() {
        ref_series.push(Series::new("x advanced", col(&|r| r.x_d[0]), PALETTE[0]));
    }
    let reference = line_plot("Reference trajectory", "t [s]", "pose", &ref_series);

    vec![
        (PLOT_FILES[0], psi),
        (PLOT_FILES[1], psidot),
        (PLOT_FILES[2], wrench),
        (PLOT_FILES[3], reference),
    ]
}

pub fn write_plots(log: &SimLog, curve: Option<&ParamCurve>, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for (name, svg) in render_plots(log, curve) {
        let path = dir.join(name);
        std::fs::write(&path, svg).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_series_gets_nonzero_range() {
        let (lo, hi) = axis_range([2.0, 2.0].into_iter());
        assert!(lo < 2.0 && hi > 2.0);
        let (lo, hi) = axis_range(std::iter::empty());
        assert_eq!((lo, hi), (0.0, 1.0));
    }

    #[test]
    fn plot_is_standalone_svg() {
        let svg = line_plot(
            "a<b",
            "t",
            "y",
            &[Series::new("s", vec![(0.0, 1.0), (1.0, 3.0)], "red")],
        );
        assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(svg.contains("a&lt;b"));
        assert!(!svg.contains("href"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
