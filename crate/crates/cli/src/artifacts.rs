//! Files written by experiment runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gcrl::optim::IterationRecord;
use gcrl::{Error, Result};

const PALETTE: [&str; 10] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::format(path, e.to_string())
}

/// Per-iteration diagnostics, one row per outer iteration.
pub fn write_diagnostics(path: &Path, records: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    if records.is_empty() {
        w.write_record([
            "iteration",
            "objective",
            "graph_loss",
            "y_minus_xtilde_fro",
            "y_minus_xtilde_inf",
            "u_minus_d_fro",
            "v_minus_z_fro",
            "sylvester_residual",
            "gd_steps",
            "gd_stalled",
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    for r in records {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Frame index, predicted cluster and (when known) true label.
pub fn write_label_strip(path: &Path, predicted: &[usize], truth: Option<&[i64]>) -> Result<()> {
    let mut out = String::from("frame,predicted,truth\n");
    for (i, p) in predicted.iter().enumerate() {
        match truth {
            Some(t) => writeln!(out, "{i},{p},{}", t[i]).unwrap(),
            None => writeln!(out, "{i},{p},").unwrap(),
        }
    }
    write_text(path, &out)
}

/// Maximal runs of equal values as `(start, end, value)`, end exclusive.
fn runs(labels: &[i64]) -> Vec<(usize, usize, i64)> {
    let mut out: Vec<(usize, usize, i64)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match out.last_mut() {
            Some(last) if last.2 == l => last.1 = i + 1,
            _ => out.push((i, i + 1, l)),
        }
    }
    out
}

fn color(label: i64, order: &[i64]) -> &'static str {
    let idx = order.iter().position(|&l| l == label).unwrap_or(order.len());
    PALETTE[idx % PALETTE.len()]
}

/// Horizontal color strips, one per labeled row, over a shared frame axis.
/// Rows that share a label value share a color.
pub fn segment_strip_svg(rows: &[(&str, Vec<i64>)]) -> String {
    const WIDTH: f64 = 800.0;
    const ROW: f64 = 28.0;
    const GAP: f64 = 10.0;
    const LEFT: f64 = 90.0;
    let frames = rows.iter().map(|(_, l)| l.len()).max().unwrap_or(0).max(1);
    let mut order: Vec<i64> = rows.iter().flat_map(|(_, l)| l.iter().copied()).collect();
    order.sort_unstable();
    order.dedup();

    let height = rows.len() as f64 * (ROW + GAP) + GAP + 16.0;
    let scale = WIDTH / frames as f64;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="12">"#,
        LEFT + WIDTH + GAP
    )
    .unwrap();
    for (r, (name, labels)) in rows.iter().enumerate() {
        let y = GAP + r as f64 * (ROW + GAP);
        writeln!(svg, r#"  <text x="4" y="{}">{name}</text>"#, y + ROW * 0.65).unwrap();
        for (start, end, l) in runs(labels) {
            writeln!(
                svg,
                r#"  <rect x="{:.3}" y="{y}" width="{:.3}" height="{ROW}" fill="{}"><title>frames {start}-{}: {l}</title></rect>"#,
                LEFT + start as f64 * scale,
                (end - start) as f64 * scale,
                color(l, &order),
                end - 1
            )
            .unwrap();
        }
    }
    let axis_y = height - 4.0;
    writeln!(svg, r#"  <text x="{LEFT}" y="{axis_y}">0</text>"#).unwrap();
    writeln!(svg, r#"  <text x="{}" y="{axis_y}" text-anchor="end">{frames}</text>"#, LEFT + WIDTH).unwrap();
    svg.push_str("</svg>\n");
    svg
}

/// `mean ± std` in the style of results tables.
pub fn plus_minus(mean: f64, std: f64) -> String {
    format!("{mean:.4} \u{b1} {std:.4}")
}
