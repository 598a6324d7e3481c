//! Static SVG line charts of CSV columns against `t`.

use std::fmt::Write as _;

use crate::error::HarnessError;
use crate::output::Table;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

/// Renders `columns` against the `t` column; with `log_y` the value axis is
/// base-10 logarithmic and every plotted value must be positive.
pub fn plot_svg(table: &Table, columns: &[String], log_y: bool) -> Result<String, HarnessError> {
    if columns.is_empty() {
        return Err(HarnessError::Usage("no columns to plot".into()));
    }
    let ts = table.column("t")?;
    let mut series = Vec::with_capacity(columns.len());
    for name in columns {
        let values = table.column(name)?;
        let mut mapped = Vec::with_capacity(values.len());
        for (row, &v) in values.iter().enumerate() {
            if log_y && !(v > 0.0) {
                return Err(HarnessError::NonPositive {
                    column: name.clone(),
                    row: row + 1,
                    value: v,
                });
            }
            if !v.is_finite() {
                return Err(HarnessError::Usage(format!(
                    "column '{name}' row {}: value {v} is not finite",
                    row + 1
                )));
            }
            mapped.push(if log_y { v.log10() } else { v });
        }
        series.push(mapped);
    }

    let (t0, t1) = padded(
        ts.iter().copied().fold(f64::INFINITY, f64::min),
        ts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let all = series.iter().flatten().copied();
    let (y0, y1) = padded(
        all.clone().fold(f64::INFINITY, f64::min),
        all.fold(f64::NEG_INFINITY, f64::max),
    );
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + (t - t0) / (t1 - t0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let t = t0 + f * (t1 - t0);
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            format!("{t:.3}")
        );
        let y = y0 + f * (y1 - y0);
        let label = if log_y { format!("1e{y:.2}") } else { format!("{y:.3e}") };
        let py = sy(y);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    if log_y {
        let _ = writeln!(
            s,
            r#"<text x="15" y="{:.2}" transform="rotate(-90 15 {:.2})" text-anchor="middle">log10 scale</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0
        );
    }
    for (i, (name, ys)) in columns.iter().zip(&series).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = ts
            .iter()
            .zip(ys)
            .map(|(t, y)| format!("{:.2},{:.2}", sx(*t), sy(*y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 15.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
