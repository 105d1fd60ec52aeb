//! Forecast diagram emission: the actual test window and named forecast
//! sequences as a long-form CSV (`index,series,value`) and a self-contained
//! SVG line chart with a legend. Both renderings are deterministic.

use crate::error::{Error, Result};
use std::path::{Path, PathBuf};

use super::report::write_atomic;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 40.0;

const PALETTE: [&str; 8] = [
    "#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn validate(actual: &[f64], forecasts: &[(String, Vec<f64>)]) -> Result<()> {
    if actual.is_empty() {
        return Err(Error::Size("forecast diagram: empty actual window".into()));
    }
    let mut names = vec!["actual"];
    for (name, values) in forecasts {
        if values.len() != actual.len() {
            return Err(Error::Size(format!(
                "forecast diagram: series '{name}' has {} values, actual has {}",
                values.len(),
                actual.len()
            )));
        }
        if name.is_empty() || name.contains([',', '"', '\n', '\r']) {
            return Err(Error::Config(format!(
                "forecast diagram: series name '{name}' is empty or not CSV-safe"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "forecast diagram: series '{name}' contains a non-finite value"
            )));
        }
        names.push(name);
    }
    if actual.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("forecast diagram: actual contains a non-finite value".into()));
    }
    let mut sorted = names.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != names.len() {
        return Err(Error::Config("forecast diagram: series names must be unique".into()));
    }
    Ok(())
}

/// Long-form CSV: header `index,series,value`, then one row per observation
/// of every series (actual first), indices starting at 1.
pub fn render_diagram_csv(actual: &[f64], forecasts: &[(String, Vec<f64>)]) -> Result<String> {
    validate(actual, forecasts)?;
    let mut out = String::from("index,series,value\n");
    let push_series = |name: &str, values: &[f64], out: &mut String| {
        for (i, v) in values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, name, v));
        }
    };
    push_series("actual", actual, &mut out);
    for (name, values) in forecasts {
        push_series(name, values, &mut out);
    }
    Ok(out)
}

fn polyline_points(values: &[f64], lo: f64, hi: f64) -> String {
    let n = values.len();
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = if n == 1 { LEFT + plot_w / 2.0 } else { LEFT + plot_w * i as f64 / (n - 1) as f64 };
            let y = TOP + plot_h * (1.0 - (v - lo) / (hi - lo));
            format!("{x:.2},{y:.2}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Self-contained SVG line chart: one polyline per series (actual first) and
/// a legend naming each.
pub fn render_diagram_svg(actual: &[f64], forecasts: &[(String, Vec<f64>)]) -> Result<String> {
    validate(actual, forecasts)?;
    let mut series: Vec<(&str, &[f64])> = vec![("actual", actual)];
    for (name, values) in forecasts {
        series.push((name, values));
    }
    let all = series.iter().flat_map(|(_, v)| v.iter().copied());
    let lo_raw = all.clone().fold(f64::INFINITY, f64::min);
    let hi_raw = all.fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi_raw > lo_raw { 0.05 * (hi_raw - lo_raw) } else { lo_raw.abs().max(1.0) * 0.05 };
    let (lo, hi) = (lo_raw - pad, hi_raw + pad);

    let plot_right = WIDTH - RIGHT;
    let plot_bottom = HEIGHT - BOTTOM;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n\
<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{plot_bottom}\" stroke=\"#999999\"/>\n\
<line x1=\"{LEFT}\" y1=\"{plot_bottom}\" x2=\"{plot_right}\" y2=\"{plot_bottom}\" stroke=\"#999999\"/>\n"
    );
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{:.3}</text>\n",
        LEFT - 6.0,
        plot_bottom,
        lo
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{:.3}</text>\n",
        LEFT - 6.0,
        TOP + 10.0,
        hi
    ));
    svg.push_str(&format!(
        "<text x=\"{LEFT}\" y=\"{:.2}\" text-anchor=\"middle\">1</text>\n",
        plot_bottom + 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"{plot_right}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        plot_bottom + 16.0,
        actual.len()
    ));
    for (idx, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            polyline_points(values, lo, hi)
        ));
        let ly = TOP + 14.0 + 20.0 * idx as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            plot_right + 10.0,
            plot_right + 34.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            plot_right + 40.0,
            ly + 4.0,
            escape_xml(name)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes both diagram artifacts next to each other: `<base>.csv` and
/// `<base>.svg`, atomically. Returns the two paths.
pub fn emit_forecast_diagram(
    actual: &[f64],
    forecasts: &[(String, Vec<f64>)],
    base: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let csv = render_diagram_csv(actual, forecasts)?;
    let svg = render_diagram_svg(actual, forecasts)?;
    let csv_path = base.with_extension("csv");
    let svg_path = base.with_extension("svg");
    write_atomic(&csv_path, csv.as_bytes())?;
    write_atomic(&svg_path, svg.as_bytes())?;
    Ok((csv_path, svg_path))
}
