//! Minimal static SVG rendering: one polyline per curve, axes, tick labels.

use kernsel::Curve;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

/// Renders the curves as an overlay plot. Estimates are drawn as thin
/// dashed green polylines, the optional truth as a bold red polyline on
/// top. Non-finite points are skipped.
pub fn render(truth: Option<&Curve>, estimates: &[Curve]) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for curve in estimates.iter().chain(truth) {
        xs.extend(curve.grid().points().iter().copied());
        ys.extend(curve.values().iter().copied().filter(|v| v.is_finite()));
    }
    let (x_lo, x_hi) = span(&xs);
    let (y_lo, y_hi) = span(&ys);

    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    // axes
    out.push_str(&format!(
        "  <line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    ));
    out.push_str(&format!(
        "  <line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let x = x_lo + t * (x_hi - x_lo);
        let y = y_lo + t * (y_hi - y_lo);
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            sx(x),
            HEIGHT - MARGIN + 18.0,
            label(x)
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            MARGIN - 6.0,
            sy(y) + 4.0,
            label(y)
        ));
    }
    for curve in estimates {
        out.push_str(&polyline(curve, &sx, &sy, "stroke=\"#2a9d4a\" stroke-width=\"1\" stroke-dasharray=\"4,3\""));
    }
    if let Some(curve) = truth {
        out.push_str(&polyline(curve, &sx, &sy, "stroke=\"red\" stroke-width=\"2.5\""));
    }
    out.push_str("</svg>\n");
    out
}

fn polyline(curve: &Curve, sx: &dyn Fn(f64) -> f64, sy: &dyn Fn(f64) -> f64, style: &str) -> String {
    let points: Vec<String> = curve
        .grid()
        .points()
        .iter()
        .zip(curve.values())
        .filter(|(_, v)| v.is_finite())
        .map(|(&x, &v)| format!("{:.2},{:.2}", sx(x), sy(v)))
        .collect();
    format!("  <polyline fill=\"none\" {} points=\"{}\"/>\n", style, points.join(" "))
}

fn span(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn label(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 10_000.0) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}
