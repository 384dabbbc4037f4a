//! Deterministic artifact emission: CSV with 17 significant digits, JSON
//! with sorted keys, self-contained SVG ratio plots. Files are written via a
//! temp file plus rename so partial artifacts never appear.

use anyhow::Context;
use expoly::report::RatioReport;
use std::io::Write;
use std::path::Path;

/// Full round-trip precision: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().unwrap_or_default().to_string_lossy()
        )),
        None => std::path::PathBuf::from(format!(
            ".{}.tmp",
            path.file_name().unwrap_or_default().to_string_lossy()
        )),
    };
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("cannot create {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move artifact into place at {}", path.display()))?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> anyhow::Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

/// JSON with sorted keys: serializing through `serde_json::Value` uses a
/// BTreeMap underneath, which both sorts and makes runs byte-identical.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let v = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Minimal self-contained log-log polyline plot of a ratio report.
pub fn ratio_svg(report: &RatioReport) -> String {
    let (w, h) = (560.0, 360.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 30.0, 50.0);
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.0 > 0.0 && r.1 > 0.0)
        .map(|r| (r.0.ln(), r.1.ln()))
        .collect();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() || x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 = x0 + 1.0;
    }
    if !y0.is_finite() || y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"18\" font-family=\"monospace\" font-size=\"13\">{} slope={:.4} verdict={:?}</text>\n",
        ml,
        report.inequality_id,
        report.slope,
        report.verdict
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">n</text>\n",
        (ml + w - mr) / 2.0,
        h - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 16 {})\">ratio</text>\n",
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0
    ));
    // tick labels at the data points
    for (n, ratio) in &report.rows {
        if *n <= 0.0 || *ratio <= 0.0 {
            continue;
        }
        let px = sx(n.ln());
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>\n",
            h - mb,
            h - mb + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">{n}</text>\n",
            h - mb + 17.0
        ));
    }
    for frac in [0.0_f64, 0.5, 1.0] {
        let y = y0 + frac * (y1 - y0);
        let py = sy(y);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{ml}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            ml - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{py:.2}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{:.3e}</text>\n",
            ml - 8.0,
            y.exp()
        ));
    }
    let path: Vec<String> = pts
        .iter()
        .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
        path.join(" ")
    ));
    for (x, y) in &pts {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1f77b4\"/>\n",
            sx(*x),
            sy(*y)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
