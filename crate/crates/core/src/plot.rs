//! Minimal SVG 1.1 line charts, no external plotting machinery.
//!
//! Polyline-based: axes, ticks, legend, optional equal-axes mode with a
//! reference circle for Bloch-plane views. Styling is utilitarian and
//! explicitly not a stability contract; the numbers in the chart are.

use std::fmt::Write as _;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 38.0;
const MARGIN_BOTTOM: f64 = 48.0;

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points }
    }
}

#[derive(Clone, Debug)]
pub struct ChartOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
    /// Force identical data-to-pixel scale on both axes.
    pub equal_axes: bool,
    /// Radius of a dashed reference circle around the origin.
    pub reference_circle: Option<f64>,
}

impl Default for ChartOptions {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            width: 800,
            height: 520,
            equal_axes: false,
            reference_circle: None,
        }
    }
}

struct Bounds {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

fn data_bounds(series: &[Series], opts: &ChartOptions) -> Bounds {
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if let Some(r) = opts.reference_circle {
        x0 = x0.min(-r);
        x1 = x1.max(r);
        y0 = y0.min(-r);
        y1 = y1.max(r);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    // Pad and de-degenerate.
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = *hi - *lo;
        if span <= 1e-12 {
            *lo -= 0.5;
            *hi += 0.5;
        } else {
            *lo -= 0.05 * span;
            *hi += 0.05 * span;
        }
    };
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    if opts.equal_axes {
        let plot_w = opts.width as f64 - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = opts.height as f64 - MARGIN_TOP - MARGIN_BOTTOM;
        // Widen the narrower span so units per pixel match.
        let x_scale = (x1 - x0) / plot_w;
        let y_scale = (y1 - y0) / plot_h;
        let scale = x_scale.max(y_scale);
        let (xc, yc) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        x0 = xc - scale * plot_w / 2.0;
        x1 = xc + scale * plot_w / 2.0;
        y0 = yc - scale * plot_h / 2.0;
        y1 = yc + scale * plot_h / 2.0;
    }
    Bounds { x0, x1, y0, y1 }
}

/// Tick positions with a 1-2-5 step covering [lo, hi].
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.abs().log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        mag
    } else if norm < 3.5 {
        2.0 * mag
    } else if norm < 7.5 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let first = (lo / step).ceil();
    let last = (hi / step).floor();
    let mut out = Vec::new();
    let mut k = first;
    while k <= last {
        let v = k * step;
        // Snap near-zero debris from the multiplication.
        out.push(if v.abs() < 1e-12 * span { 0.0 } else { v });
        k += 1.0;
    }
    out
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:e}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render a static line chart.
pub fn line_chart(series: &[Series], opts: &ChartOptions) -> String {
    let w = opts.width as f64;
    let h = opts.height as f64;
    let b = data_bounds(series, opts);
    let plot_w = w - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = h - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - b.x0) / (b.x1 - b.x0) * plot_w;
    let py = |y: f64| MARGIN_TOP + (b.y1 - y) / (b.y1 - b.y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        opts.width, opts.height, opts.width, opts.height
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");

    // Grid and ticks.
    for x in ticks(b.x0, b.x1, 6) {
        let xp = px(x);
        let _ = writeln!(
            svg,
            "<line x1=\"{xp:.2}\" y1=\"{:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>",
            MARGIN_TOP,
            h - MARGIN_BOTTOM
        );
        let _ = writeln!(
            svg,
            "<text x=\"{xp:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\" fill=\"#333333\">{}</text>",
            h - MARGIN_BOTTOM + 16.0,
            tick_label(x)
        );
    }
    for y in ticks(b.y0, b.y1, 6) {
        let yp = py(y);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{:.2}\" y2=\"{yp:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>",
            MARGIN_LEFT,
            w - MARGIN_RIGHT
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\" fill=\"#333333\">{}</text>",
            MARGIN_LEFT - 6.0,
            yp + 4.0,
            tick_label(y)
        );
    }

    // Frame.
    let _ = writeln!(
        svg,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{plot_w:.2}\" height=\"{plot_h:.2}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>",
        MARGIN_LEFT, MARGIN_TOP
    );

    if let Some(r) = opts.reference_circle {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"none\" \
             stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>",
            px(0.0),
            py(0.0),
            r / (b.x1 - b.x0) * plot_w
        );
    }

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for &(x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            points.trim_end()
        );
    }

    // Legend.
    let legend_x = w - MARGIN_RIGHT - 150.0;
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>",
            legend_x,
            legend_x + 22.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"#111111\">{}</text>",
            legend_x + 28.0,
            y + 4.0,
            xml_escape(&s.label)
        );
    }

    if !opts.title.is_empty() {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" \
             text-anchor=\"middle\" fill=\"#111111\">{}</text>",
            w / 2.0,
            xml_escape(&opts.title)
        );
    }
    if !opts.x_label.is_empty() {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\" fill=\"#111111\">{}</text>",
            MARGIN_LEFT + plot_w / 2.0,
            h - 12.0,
            xml_escape(&opts.x_label)
        );
    }
    if !opts.y_label.is_empty() {
        let _ = writeln!(
            svg,
            "<text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\" fill=\"#111111\">{}</text>",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            xml_escape(&opts.y_label)
        );
    }

    svg.push_str("</svg>\n");
    svg
}
