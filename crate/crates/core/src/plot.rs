//! Minimal deterministic SVG emitters. No imaging dependencies; charts are
//! plain markup with fixed-precision coordinates so identical inputs yield
//! byte-identical files.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn header(out: &mut String) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
}

/// Three-stop color ramp from dark violet through teal to yellow, `t` in [0, 1].
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let stops = [
        (0.267, 0.005, 0.329),
        (0.128, 0.567, 0.551),
        (0.993, 0.906, 0.144),
    ];
    let (a, b, f) = if t < 0.5 {
        (stops[0], stops[1], t * 2.0)
    } else {
        (stops[1], stops[2], (t - 0.5) * 2.0)
    };
    let mix = |x: f64, y: f64| ((x + (y - x) * f) * 255.0).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

/// Orthographic scatter of weighted sphere points, viewed along +z
/// (near hemisphere only), colored by weight relative to the maximum.
pub fn sphere_scatter(points: &[([f64; 3], f64)], title: &str) -> String {
    let mut out = String::new();
    header(&mut out);
    let cx = W / 2.0;
    let cy = H / 2.0;
    let radius = (H / 2.0) - 40.0;
    let _ = writeln!(
        out,
        "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{radius:.2}\" fill=\"none\" stroke=\"#888\"/>"
    );
    let max_w = points.iter().map(|(_, w)| *w).fold(0.0f64, f64::max);
    for (p, w) in points {
        if p[2] < 0.0 {
            continue;
        }
        let x = cx + radius * p[0];
        let y = cy - radius * p[1];
        let t = if max_w > 0.0 { w / max_w } else { 0.0 };
        let _ = writeln!(
            out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{}\"/>",
            ramp(t)
        );
    }
    let _ = write!(
        out,
        "<text x=\"{cx:.2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n</svg>\n"
    );
    out
}

fn axis_frame(out: &mut String, x_label: &str, y_label: &str, title: &str) {
    let _ = write!(
        out,
        "<line x1=\"{m:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{m:.2}\" y1=\"{t:.2}\" x2=\"{m:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n\
         <text x=\"{cx:.2}\" y=\"{lbly:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{x_label}</text>\n\
         <text x=\"16\" y=\"{cy:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {cy:.2})\">{y_label}</text>\n\
         <text x=\"{cx:.2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n",
        m = MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        b = H - MARGIN,
        cx = W / 2.0,
        cy = H / 2.0,
        lbly = H - 20.0,
    );
}

fn scale_to_plot(lo: f64, hi: f64, v: f64, pixel_lo: f64, pixel_hi: f64) -> f64 {
    let span = if hi > lo { hi - lo } else { 1.0 };
    pixel_lo + (v - lo) / span * (pixel_hi - pixel_lo)
}

/// Polyline chart of `(x, y)` pairs with a horizontal reference at y = 0.
pub fn line_chart(series: &[(f64, f64)], x_label: &str, y_label: &str, title: &str) -> String {
    let mut out = String::new();
    header(&mut out);
    axis_frame(&mut out, x_label, y_label, title);
    if series.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (0.0f64, 0.0f64);
    for (x, y) in series {
        x_lo = x_lo.min(*x);
        x_hi = x_hi.max(*x);
        y_lo = y_lo.min(*y);
        y_hi = y_hi.max(*y);
    }
    let px = |x: f64| scale_to_plot(x_lo, x_hi, x, MARGIN, W - MARGIN);
    let py = |y: f64| scale_to_plot(y_lo, y_hi, y, H - MARGIN, MARGIN);
    let zero_y = py(0.0);
    let _ = writeln!(
        out,
        "<line x1=\"{:.2}\" y1=\"{zero_y:.2}\" x2=\"{:.2}\" y2=\"{zero_y:.2}\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>",
        MARGIN,
        W - MARGIN
    );
    let mut path = String::new();
    for (i, (x, y)) in series.iter().enumerate() {
        let _ = write!(
            path,
            "{}{:.2},{:.2}",
            if i == 0 { "" } else { " " },
            px(*x),
            py(*y)
        );
    }
    let _ = writeln!(
        out,
        "<polyline points=\"{path}\" fill=\"none\" stroke=\"#1f6f8b\" stroke-width=\"2\"/>"
    );
    for (x, y) in series {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1f6f8b\"/>",
            px(*x),
            py(*y)
        );
    }
    let _ = write!(
        out,
        "<text x=\"{m:.2}\" y=\"{b:.2}\" font-family=\"sans-serif\" font-size=\"10\">{x_lo:.1}</text>\n\
         <text x=\"{r:.2}\" y=\"{b:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{x_hi:.1}</text>\n\
         <text x=\"{m2:.2}\" y=\"{t:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{y_hi:.2}</text>\n",
        m = MARGIN,
        r = W - MARGIN,
        b = H - MARGIN + 14.0,
        m2 = MARGIN - 4.0,
        t = MARGIN + 4.0,
    );
    out.push_str("</svg>\n");
    out
}

/// Bar chart over half-open bins `(lo, hi, count)`.
pub fn histogram(bins: &[(f64, f64, usize)], x_label: &str, title: &str) -> String {
    let mut out = String::new();
    header(&mut out);
    axis_frame(&mut out, x_label, "count", title);
    if bins.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let x_lo = bins[0].0;
    let x_hi = bins[bins.len() - 1].1;
    let max_count = bins.iter().map(|b| b.2).max().unwrap_or(1).max(1) as f64;
    let px = |x: f64| scale_to_plot(x_lo, x_hi, x, MARGIN, W - MARGIN);
    let py = |c: f64| scale_to_plot(0.0, max_count, c, H - MARGIN, MARGIN);
    for (lo, hi, count) in bins {
        let x = px(*lo);
        let width = (px(*hi) - x).max(0.5);
        let y = py(*count as f64);
        let height = (H - MARGIN) - y;
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{width:.2}\" height=\"{height:.2}\" fill=\"#4c9f70\" stroke=\"white\" stroke-width=\"0.5\"/>"
        );
    }
    let _ = write!(
        out,
        "<text x=\"{m:.2}\" y=\"{b:.2}\" font-family=\"sans-serif\" font-size=\"10\">{x_lo:.2}</text>\n\
         <text x=\"{r:.2}\" y=\"{b:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{x_hi:.2}</text>\n\
         <text x=\"{m2:.2}\" y=\"{t:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{max_count:.0}</text>\n",
        m = MARGIN,
        r = W - MARGIN,
        b = H - MARGIN + 14.0,
        m2 = MARGIN - 4.0,
        t = MARGIN + 4.0,
    );
    out.push_str("</svg>\n");
    out
}
