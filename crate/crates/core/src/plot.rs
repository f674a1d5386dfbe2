//! Static SVG rendering of aggregated reject curves.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{Band, RunSummary};

const PANEL: f64 = 320.0;
const MARGIN: f64 = 48.0;
const GAP: f64 = 64.0;

struct Panel {
    x0: f64,
    y0: f64,
}

impl Panel {
    fn x(&self, coverage: f64) -> f64 {
        self.x0 + coverage.clamp(0.0, 1.0) * PANEL
    }

    fn y(&self, v: f64) -> f64 {
        self.y0 + (1.0 - v.clamp(0.0, 1.0)) * PANEL
    }
}

fn polyline(p: &Panel, grid: &[f64], values: &[f64]) -> String {
    let mut s = String::new();
    for (c, v) in grid.iter().zip(values).filter(|(_, v)| v.is_finite()) {
        let _ = write!(s, "{:.2},{:.2} ", p.x(*c), p.y(*v));
    }
    s.trim_end().to_string()
}

fn band_polygon(p: &Panel, grid: &[f64], band: &Band) -> String {
    let upper = polyline(p, grid, &band.q95);
    let lower: Vec<String> = grid
        .iter()
        .zip(&band.q05)
        .rev()
        .filter(|(_, v)| v.is_finite())
        .map(|(c, v)| format!("{:.2},{:.2}", p.x(*c), p.y(*v)))
        .collect();
    format!("{upper} {}", lower.join(" "))
}

fn panel_svg(out: &mut String, p: &Panel, title: &str, grid: &[f64], band: &Band, tau: Option<f64>) {
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{PANEL}" height="{PANEL}" fill="none" stroke="black"/>"#,
        p.x0, p.y0
    );
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{t}</text>"#,
            p.x(t),
            p.y0 + PANEL + 14.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{t}</text>"#,
            p.x0 - 4.0,
            p.y(t) + 3.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{title}</text>"#,
        p.x0 + PANEL / 2.0,
        p.y0 - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">coverage</text>"#,
        p.x0 + PANEL / 2.0,
        p.y0 + PANEL + 32.0
    );
    let _ = writeln!(
        out,
        r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.25" stroke="none"/>"##,
        band_polygon(p, grid, band)
    );
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
        polyline(p, grid, &band.mean)
    );
    if let Some(c) = tau {
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#d62728" stroke-dasharray="4 3"/>"##,
            p.y0,
            p.y0 + PANEL,
            x = p.x(c)
        );
    }
}

/// Renders the precision and recall reject curves side by side: mean line,
/// 5%–95% band and a dashed marker at the mean tau coverage.
pub fn render_svg(summary: &RunSummary) -> String {
    let width = 2.0 * PANEL + 2.0 * MARGIN + GAP;
    let height = PANEL + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let left = Panel {
        x0: MARGIN,
        y0: MARGIN,
    };
    let right = Panel {
        x0: MARGIN + PANEL + GAP,
        y0: MARGIN,
    };
    let tau = summary.tau_coverage_mean;
    panel_svg(&mut out, &left, "precision reject curve", &summary.grid, &summary.precision, tau);
    panel_svg(&mut out, &right, "recall reject curve", &summary.grid, &summary.recall, tau);
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(path: impl AsRef<Path>, summary: &RunSummary) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_svg(summary)).map_err(|e| Error::io(path, e))
}
