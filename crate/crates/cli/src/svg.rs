//! Self-contained SVG emission: polyline charts for bound curves and layered
//! grid maps for region masks and sweep verdicts.
//!
//! Everything is rendered with fixed margins and linear axes into a string —
//! no plotting dependency, no external resources. Output is a pure function
//! of the input data, so re-running a command rewrites byte-identical files.

use std::fmt::Write as _;

use crate::fmt::sig;

const W: f64 = 840.0;
const H: f64 = 560.0;
const ML: f64 = 72.0;
const MR: f64 = 180.0;
const MT: f64 = 46.0;
const MB: f64 = 58.0;

const PALETTE: [&str; 6] = [
    "#3366aa", "#cc4444", "#339955", "#886699", "#bb8833", "#557788",
];

/// A named curve; `None` samples split it into disconnected segments (used
/// when a bound stops existing mid-sweep).
pub struct Series {
    pub name: String,
    pub color: &'static str,
    pub segments: Vec<Vec<(f64, f64)>>,
}

impl Series {
    pub fn from_points(
        name: &str,
        color: &'static str,
        points: impl IntoIterator<Item = (f64, Option<f64>)>,
    ) -> Self {
        let mut segments = Vec::new();
        let mut current: Vec<(f64, f64)> = Vec::new();
        for (x, y) in points {
            match y {
                Some(y) if y.is_finite() => current.push((x, y)),
                _ => {
                    if !current.is_empty() {
                        segments.push(std::mem::take(&mut current));
                    }
                }
            }
        }
        if !current.is_empty() {
            segments.push(current);
        }
        Series {
            name: String::from(name),
            color,
            segments,
        }
    }
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl Chart {
    pub fn render(&self) -> String {
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            for seg in &s.segments {
                for &(x, y) in seg {
                    x_min = x_min.min(x);
                    x_max = x_max.max(x);
                    y_min = y_min.min(y);
                    y_max = y_max.max(y);
                }
            }
        }
        if !x_min.is_finite() {
            (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
        }
        if x_max - x_min < 1e-12 {
            x_min -= 0.5;
            x_max += 0.5;
        }
        if y_max - y_min < 1e-12 {
            y_min -= 0.5;
            y_max += 0.5;
        }
        let pad = 0.04 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;

        let pw = W - ML - MR;
        let ph = H - MT - MB;
        let px = |x: f64| ML + (x - x_min) / (x_max - x_min) * pw;
        let py = |y: f64| MT + (1.0 - (y - y_min) / (y_max - y_min)) * ph;

        let mut out = header(&self.title);
        axes_frame(&mut out);
        for i in 0..=5 {
            let xt = x_min + (x_max - x_min) * i as f64 / 5.0;
            let yt = y_min + (y_max - y_min) * i as f64 / 5.0;
            tick_x(&mut out, px(xt), &sig(xt, 3));
            tick_y(&mut out, py(yt), &sig(yt, 3));
        }
        labels(&mut out, &self.x_label, &self.y_label);

        for s in &self.series {
            for seg in &s.segments {
                if seg.len() == 1 {
                    let (x, y) = seg[0];
                    let _ = writeln!(
                        out,
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.2\" fill=\"{}\"/>",
                        px(x),
                        py(y),
                        s.color
                    );
                    continue;
                }
                let pts: Vec<String> = seg
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                    .collect();
                let _ = writeln!(
                    out,
                    "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>",
                    s.color,
                    pts.join(" ")
                );
            }
        }

        let entries: Vec<(&str, &str)> = self
            .series
            .iter()
            .map(|s| (s.name.as_str(), s.color))
            .collect();
        legend(&mut out, &entries);
        out.push_str("</svg>\n");
        out
    }
}

/// One category of cells drawn in one color; spans are (row, first column,
/// last column) in grid indices, rows indexed along the y axis.
pub struct Layer {
    pub label: String,
    pub color: &'static str,
    pub opacity: f64,
    pub spans: Vec<(usize, usize, usize)>,
}

/// A cell map over two value grids (x and y axis values at cell centers).
pub struct GridMap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub layers: Vec<Layer>,
}

impl GridMap {
    pub fn render(&self) -> String {
        let nx = self.x_values.len().max(1);
        let ny = self.y_values.len().max(1);
        let pw = W - ML - MR;
        let ph = H - MT - MB;
        let cw = pw / nx as f64;
        let ch = ph / ny as f64;

        let mut out = header(&self.title);
        axes_frame(&mut out);
        for layer in &self.layers {
            if layer.spans.is_empty() {
                continue;
            }
            let _ = writeln!(
                out,
                "<g fill=\"{}\" fill-opacity=\"{:.2}\">",
                layer.color, layer.opacity
            );
            for &(iy, ix0, ix1) in &layer.spans {
                let x = ML + ix0 as f64 * cw;
                let y = MT + (ny - 1 - iy) as f64 * ch;
                let w = (ix1 - ix0 + 1) as f64 * cw;
                let _ = writeln!(
                    out,
                    "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{ch:.2}\"/>"
                );
            }
            out.push_str("</g>\n");
        }

        let step = (nx / 6).max(1);
        for i in (0..nx).step_by(step) {
            tick_x(&mut out, ML + (i as f64 + 0.5) * cw, &sig(self.x_values[i], 3));
        }
        let step = (ny / 6).max(1);
        for j in (0..ny).step_by(step) {
            tick_y(
                &mut out,
                MT + (ny - 1 - j) as f64 * ch + 0.5 * ch,
                &sig(self.y_values[j], 3),
            );
        }
        labels(&mut out, &self.x_label, &self.y_label);

        let entries: Vec<(&str, &str)> = self
            .layers
            .iter()
            .map(|l| (l.label.as_str(), l.color))
            .collect();
        legend(&mut out, &entries);
        out.push_str("</svg>\n");
        out
    }
}

/// Stable color for series index `i`.
pub fn palette(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn header(title: &str) -> String {
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        ML + (W - ML - MR) / 2.0,
        escape(title)
    );
    out
}

fn axes_frame(out: &mut String) {
    let _ = writeln!(
        out,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333333\"/>",
        W - ML - MR,
        H - MT - MB
    );
}

fn tick_x(out: &mut String, x: f64, label: &str) {
    let y0 = H - MB;
    let _ = writeln!(
        out,
        "<line x1=\"{x:.2}\" y1=\"{y0:.1}\" x2=\"{x:.2}\" y2=\"{:.1}\" stroke=\"#333333\"/>",
        y0 + 5.0
    );
    let _ = writeln!(
        out,
        "<text x=\"{x:.2}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{}</text>",
        y0 + 19.0,
        escape(label)
    );
}

fn tick_y(out: &mut String, y: f64, label: &str) {
    let _ = writeln!(
        out,
        "<line x1=\"{:.1}\" y1=\"{y:.2}\" x2=\"{ML}\" y2=\"{y:.2}\" stroke=\"#333333\"/>",
        ML - 5.0
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{}</text>",
        ML - 9.0,
        y + 4.0,
        escape(label)
    );
}

fn labels(out: &mut String, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        ML + (W - ML - MR) / 2.0,
        H - 14.0,
        escape(x_label)
    );
    let cy = MT + (H - MT - MB) / 2.0;
    let _ = writeln!(
        out,
        "<text x=\"20\" y=\"{cy:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {cy:.1})\">{}</text>",
        escape(y_label)
    );
}

fn legend(out: &mut String, entries: &[(&str, &str)]) {
    let x = W - MR + 16.0;
    for (i, (name, color)) in entries.iter().enumerate() {
        let y = MT + 14.0 + 22.0 * i as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"18\" height=\"6\" fill=\"{color}\"/>",
            y - 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"12\">{}</text>",
            x + 24.0,
            escape(name)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
