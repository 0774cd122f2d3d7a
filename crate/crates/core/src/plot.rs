//! Plot data (CSV) and optional SVG renderings.
//!
//! CSV files carry the exact panel and series values; the SVG renderers are
//! pure functions of the same data.

use std::fmt::Write as _;
use std::io::Write;

use crate::counterfactual::ScenarioFrame;
use crate::error::{Error, Result};
use crate::fmt::fmt_float;
use crate::panel::Panel;
use crate::quarter::Quarter;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Proportion,
    Stance,
}

fn csv_err(e: csv::Error) -> Error {
    Error::parse("plot csv", e)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// One row per quarter, one column per group.
pub fn write_wide_csv<W: Write>(panel: &Panel, quantity: Quantity, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["quarter".to_string()];
    header.extend(panel.groups().iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (t, q) in panel.quarters().iter().enumerate() {
        let mut row = vec![q.to_string()];
        for g in 0..panel.groups().len() {
            row.push(opt(match quantity {
                Quantity::Proportion => panel.proportion(t, g),
                Quantity::Stance => panel.mean_stance(t, g),
            }));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::parse("plot csv", e))?;
    Ok(())
}

/// Long-format grid behind the actual / proportion-only / stance-only
/// figure: `row,quantity,quarter,group,value`. The `overall` quantity has an
/// empty group.
pub fn write_grid_csv<W: Write>(
    panel: &Panel,
    rows: &[(&str, &[ScenarioFrame])],
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row", "quantity", "quarter", "group", "value"])
        .map_err(csv_err)?;
    for (name, frames) in rows {
        for frame in frames.iter() {
            let q = frame.quarter.to_string();
            for (g, group) in panel.groups().iter().enumerate() {
                let entry = frame.entries.as_ref().and_then(|e| e[g]);
                w.write_record([*name, "proportion", &q, group, &opt(entry.map(|e| e.0))])
                    .map_err(csv_err)?;
                w.write_record([*name, "stance", &q, group, &opt(entry.map(|e| e.1))])
                    .map_err(csv_err)?;
            }
            w.write_record([*name, "overall", &q, "", &opt(frame.value())])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::parse("plot csv", e))?;
    Ok(())
}

/// Several named series on a shared quarter axis: `quarter,<name>...`.
pub fn write_multi_series_csv<W: Write>(series: &[(&str, &TimeSeries)], writer: W) -> Result<()> {
    let quarters = union_quarters(series);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["quarter"];
    header.extend(series.iter().map(|(n, _)| *n));
    w.write_record(&header).map_err(csv_err)?;
    for q in &quarters {
        let mut row = vec![q.to_string()];
        row.extend(series.iter().map(|(_, s)| opt(s.get(*q))));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::parse("plot csv", e))?;
    Ok(())
}

fn union_quarters(series: &[(&str, &TimeSeries)]) -> Vec<Quarter> {
    let mut qs: Vec<Quarter> = series.iter().flat_map(|(_, s)| s.quarters().iter().copied()).collect();
    qs.sort();
    qs.dedup();
    qs
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn x_at(i: usize, n: usize) -> f64 {
    let span = WIDTH - 2.0 * MARGIN;
    if n <= 1 {
        MARGIN + span / 2.0
    } else {
        MARGIN + span * i as f64 / (n - 1) as f64
    }
}

/// Stance ordinate: −1 at the bottom of the plot area, +1 at the top.
fn y_stance(v: f64) -> f64 {
    MARGIN + (1.0 - (v + 1.0) / 2.0) * (HEIGHT - 2.0 * MARGIN)
}

fn svg_open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of stance series on a [−1, 1] axis. Gaps break the line into
/// separate polylines; nothing is interpolated.
pub fn render_line_svg(title: &str, series: &[(&str, &TimeSeries)]) -> String {
    let quarters = union_quarters(series);
    let n = quarters.len();
    let mut out = String::new();
    svg_open(&mut out, title);
    let _ = writeln!(
        out,
        r##"<line x1="{MARGIN}" y1="{y}" x2="{x2}" y2="{y}" stroke="#cccccc"/>"##,
        y = y_stance(0.0),
        x2 = WIDTH - MARGIN
    );
    for (k, (name, s)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(out, r#"<g class="series" data-name="{}">"#, escape(name));
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, out: &mut String| {
            if !run.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
                    run.join(" ")
                );
                run.clear();
            }
        };
        for (i, q) in quarters.iter().enumerate() {
            match s.get(*q) {
                Some(v) => run.push(format!("{:.3},{:.3}", x_at(i, n), y_stance(v))),
                None => flush(&mut run, &mut out),
            }
        }
        flush(&mut run, &mut out);
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

/// Stacked bars of group proportions, one bar per non-empty quarter.
pub fn render_stacked_svg(title: &str, panel: &Panel) -> String {
    let n = panel.quarters().len();
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let bar_w = (WIDTH - 2.0 * MARGIN) / n.max(1) as f64 * 0.8;
    let mut out = String::new();
    svg_open(&mut out, title);
    for (t, q) in panel.quarters().iter().enumerate() {
        if panel.quarter_is_empty(t) {
            continue;
        }
        let x = MARGIN + (WIDTH - 2.0 * MARGIN) * t as f64 / n as f64;
        let _ = writeln!(out, r#"<g class="bar" data-quarter="{q}">"#);
        let mut top = MARGIN + plot_h;
        for (g, group) in panel.groups().iter().enumerate() {
            let p = panel.proportion(t, g).unwrap_or(0.0);
            if p <= 0.0 {
                continue;
            }
            let h = p * plot_h;
            top -= h;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.3}" y="{top:.6}" width="{bar_w:.3}" height="{h:.6}" fill="{}" data-group="{}"/>"#,
                PALETTE[g % PALETTE.len()],
                escape(group)
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}
