//! Minimal standalone SVG line plots and heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#c0392b", "#2471a3", "#229954", "#7d3c98", "#d68910", "#17a589", "#566573", "#a04000",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Draw unconnected dots instead of a line.
    pub markers: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            markers: false,
        }
    }

    pub fn scatter(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            markers: true,
            ..Self::new(name, points)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// One filled rectangle in data coordinates; `class` indexes the legend.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub cells: Vec<Cell>,
    /// Legend entry per class index.
    pub legend: Vec<String>,
    /// Optional outlines drawn over the cells.
    pub overlays: Vec<Series>,
}

pub enum Figure {
    Line(LinePlot),
    Heat(Heatmap),
}

struct Frame {
    x: [f64; 2],
    y: [f64; 2],
}

impl Frame {
    fn fit<'a>(pts: impl Iterator<Item = &'a (f64, f64)>) -> Self {
        let (mut x, mut y) = ([f64::INFINITY, f64::NEG_INFINITY], [f64::INFINITY, f64::NEG_INFINITY]);
        for &(a, b) in pts.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            x = [x[0].min(a), x[1].max(a)];
            y = [y[0].min(b), y[1].max(b)];
        }
        let widen = |r: [f64; 2]| {
            if !r[0].is_finite() {
                [0.0, 1.0]
            } else if r[0] == r[1] {
                [r[0] - 0.5, r[1] + 0.5]
            } else {
                r
            }
        };
        Self {
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x[0]) / (self.x[1] - self.x[0]) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y[0]) / (self.y[1] - self.y[0]) * (H - TOP - BOTTOM)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    out.push_str("<style>\n");
    for (i, c) in PALETTE.iter().enumerate() {
        let _ = writeln!(out, ".series-{i} {{ fill: none; stroke: {c}; stroke-width: 1.5; }}");
    }
    out.push_str(".axis { stroke: #000; stroke-width: 1; }\n</style>\n");
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        esc(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (LEFT, W - RIGHT);
    let (y0, y1) = (H - BOTTOM, TOP);
    let _ = writeln!(out, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(out, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    for k in 0..=4 {
        let v = f.x[0] + (f.x[1] - f.x[0]) * k as f64 / 4.0;
        let px = f.px(v);
        let _ = writeln!(
            out,
            r#"<line class="axis" x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick(v)
        );
        let v = f.y[0] + (f.y[1] - f.y[0]) * k as f64 / 4.0;
        let py = f.py(v);
        let _ = writeln!(
            out,
            r#"<line class="axis" x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 15.0,
        esc(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        esc(y_label)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn polyline(out: &mut String, f: &Frame, s: &Series, class: usize) {
    if s.markers {
        let c = PALETTE[class % PALETTE.len()];
        for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{c}"/>"#,
                f.px(x),
                f.py(y)
            );
        }
        return;
    }
    let pts: Vec<String> = s
        .points
        .iter()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline class="series-{}" points="{}"/>"#,
        class % PALETTE.len(),
        pts.join(" ")
    );
}

fn legend(out: &mut String, names: &[String], swatch: impl Fn(&mut String, usize, f64, f64)) {
    let x = W - RIGHT + 15.0;
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        swatch(out, i, x, y);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, x + 24.0, y + 4.0, esc(name));
    }
}

/// Render a figure to an SVG document.
pub fn render(fig: &Figure) -> String {
    let mut out = String::new();
    match fig {
        Figure::Line(p) => {
            header(&mut out, &p.title);
            let f = Frame::fit(p.series.iter().flat_map(|s| s.points.iter()));
            axes(&mut out, &f, &p.x_label, &p.y_label);
            for (i, s) in p.series.iter().enumerate() {
                polyline(&mut out, &f, s, i);
            }
            let names: Vec<String> = p.series.iter().map(|s| s.name.clone()).collect();
            legend(&mut out, &names, |out, i, x, y| {
                let _ = writeln!(
                    out,
                    r#"<line class="series-{}" x1="{x}" y1="{y}" x2="{}" y2="{y}"/>"#,
                    i % PALETTE.len(),
                    x + 18.0
                );
            });
        }
        Figure::Heat(m) => {
            header(&mut out, &m.title);
            let corners: Vec<(f64, f64)> = m
                .cells
                .iter()
                .flat_map(|c| [(c.x[0], c.y[0]), (c.x[1], c.y[1])])
                .collect();
            let f = Frame::fit(corners.iter());
            for c in &m.cells {
                let (x0, x1) = (f.px(c.x[0]), f.px(c.x[1]));
                let (y0, y1) = (f.py(c.y[1]), f.py(c.y[0]));
                let _ = writeln!(
                    out,
                    r#"<rect class="cell" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                    x1 - x0,
                    y1 - y0,
                    PALETTE[c.class % PALETTE.len()]
                );
            }
            for (i, s) in m.overlays.iter().enumerate() {
                polyline(&mut out, &f, s, i + 6);
            }
            axes(&mut out, &f, &m.x_label, &m.y_label);
            legend(&mut out, &m.legend, |out, i, x, y| {
                let _ = writeln!(
                    out,
                    r#"<rect x="{x}" y="{}" width="18" height="10" fill="{}"/>"#,
                    y - 5.0,
                    PALETTE[i % PALETTE.len()]
                );
            });
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Write `fig` to `path`.
pub fn emit_svg(fig: &Figure, path: &Path) -> Result<()> {
    std::fs::write(path, render(fig))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot(series: Vec<Series>) -> Figure {
        Figure::Line(LinePlot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series,
        })
    }

    #[test]
    fn empty_plot_has_axes_only() {
        let s = render(&plot(vec![]));
        assert!(s.contains("class=\"axis\""));
        assert!(!s.contains("<path"));
        assert!(!s.contains("<polyline"));
    }

    #[test]
    fn two_series_two_classes() {
        let s = render(&plot(vec![
            Series::new("a", vec![(0.0, 0.0), (1.0, 1.0)]),
            Series::new("b", vec![(0.0, 1.0), (1.0, 0.0)]),
        ]));
        assert_eq!(s.matches("<polyline class=\"series-0\"").count(), 1);
        assert_eq!(s.matches("<polyline class=\"series-1\"").count(), 1);
    }

    #[test]
    fn heatmap_cells() {
        let cells = (0..100)
            .flat_map(|i| {
                (0..100).map(move |j| Cell {
                    x: [i as f64, i as f64 + 1.0],
                    y: [j as f64, j as f64 + 1.0],
                    class: (i + j) % 3,
                })
            })
            .collect();
        let s = render(&Figure::Heat(Heatmap {
            title: "m".into(),
            x_label: "K".into(),
            y_label: "D".into(),
            cells,
            legend: vec!["a".into(), "b".into(), "c".into()],
            overlays: vec![],
        }));
        assert_eq!(s.matches("class=\"cell\"").count(), 10_000);
    }
}
