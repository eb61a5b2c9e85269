use std::fmt::Write as _;
use std::path::Path;

use stepcast_core::{Error, Result};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const TICKS: usize = 5;

/// Line chart of observed and forecast water level against day index.
pub fn render_svg(observed: &[f64], forecast: &[f64], title: &str) -> Result<String> {
    if observed.is_empty() || forecast.is_empty() {
        return Err(Error::Validation("cannot plot an empty series".into()));
    }
    if observed.len() != forecast.len() {
        return Err(Error::Validation(format!(
            "observed has {} points but forecast has {}",
            observed.len(),
            forecast.len()
        )));
    }
    if observed.iter().chain(forecast).any(|v| !v.is_finite()) {
        return Err(Error::Validation("cannot plot non-finite values".into()));
    }

    let n = observed.len();
    let (mut lo, mut hi) = observed
        .iter()
        .chain(forecast)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |i: usize| LEFT + if n > 1 { plot_w * i as f64 / (n - 1) as f64 } else { plot_w / 2.0 };
    let y_of = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // Axes, ticks and labels.
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT} {TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    for i in 0..=TICKS {
        let v = lo + (hi - lo) * i as f64 / TICKS as f64;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
        let day = ((n - 1) as f64 * i as f64 / TICKS as f64).round() as usize;
        let x = x_of(day);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            day + 1
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Time (days)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">Water level (m)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (values, colour, dash) in [(observed, "#1f77b4", ""), (forecast, "#d62728", r#" stroke-dasharray="4 2""#)] {
        let mut points = String::with_capacity(values.len() * 16);
        for (i, &v) in values.iter().enumerate() {
            if i > 0 {
                points.push(' ');
            }
            let _ = write!(points, "{:.2},{:.2}", x_of(i), y_of(v));
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{points}" fill="none" stroke="{colour}" stroke-width="1.2"{dash}/>"#
        );
    }

    // Legend.
    let lx = LEFT + plot_w - 150.0;
    let ly = TOP + 10.0;
    let _ = writeln!(
        s,
        r##"<g><rect x="{lx}" y="{ly}" width="140" height="44" fill="white" stroke="#999"/><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1f77b4" stroke-width="2"/><text x="{}" y="{}">Observed</text><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#d62728" stroke-width="2" stroke-dasharray="4 2"/><text x="{}" y="{}">Forecast</text></g>"##,
        lx + 10.0,
        ly + 14.0,
        lx + 40.0,
        ly + 14.0,
        lx + 48.0,
        ly + 18.0,
        lx + 10.0,
        ly + 32.0,
        lx + 40.0,
        ly + 32.0,
        lx + 48.0,
        ly + 36.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes [`render_svg`] output to `path`.
pub fn emit_plot(observed: &[f64], forecast: &[f64], path: &Path) -> Result<()> {
    let title = path.file_stem().and_then(|s| s.to_str()).unwrap_or("forecast");
    let svg = render_svg(observed, forecast, title)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
