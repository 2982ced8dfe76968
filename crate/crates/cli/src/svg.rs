//! Deterministic SVG scatter plots.

use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::{bail, Result};
use ndarray::Array2;

pub const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];
const UNLABELLED: &str = "#4c72b0";
const PLOT_PX: f64 = 800.0;
const LEGEND_PX: f64 = 160.0;
const MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub color_by_label: bool,
    pub point_size: f64,
}

/// Renders one circle per row of a 2-D embedding. Labels pick colors from
/// [`PALETTE`] in ascending label order, cycling after 12, and add a legend.
pub fn scatter(points: &Array2<f64>, labels: Option<&[i64]>, style: Style) -> Result<String> {
    if points.ncols() != 2 {
        bail!("plotting needs a 2-D embedding, got {} dimensions", points.ncols());
    }
    if !(style.point_size > 0.0 && style.point_size.is_finite()) {
        bail!("point size must be positive");
    }
    let labels = labels.filter(|_| style.color_by_label);
    let colors: BTreeMap<i64, &str> = labels
        .map(|l| {
            let mut distinct: Vec<i64> = l.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            distinct.into_iter().enumerate().map(|(i, v)| (v, PALETTE[i % PALETTE.len()])).collect()
        })
        .unwrap_or_default();

    let (x0, x1, y0, y1) = bounds(points);
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let (w, h) = (pad(x1 - x0, span), pad(y1 - y0, span));
    let (vx, vy) = (x0 - MARGIN * w / (1.0 + 2.0 * MARGIN), -y1 - MARGIN * h / (1.0 + 2.0 * MARGIN));
    let radius = style.point_size * w.max(h) / PLOT_PX;
    let legend = if colors.is_empty() { 0.0 } else { LEGEND_PX };

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{PLOT_PX}">"#,
        PLOT_PX + legend
    )?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        out,
        r#"<svg x="0" y="0" width="{PLOT_PX}" height="{PLOT_PX}" viewBox="{} {} {} {}">"#,
        num(vx),
        num(vy),
        num(w),
        num(h)
    )?;
    for (i, row) in points.rows().into_iter().enumerate() {
        let fill = labels.map_or(UNLABELLED, |l| colors[&l[i]]);
        writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}" fill-opacity="0.8"/>"#,
            num(row[0]),
            num(-row[1]),
            num(radius)
        )?;
    }
    writeln!(out, "</svg>")?;
    if !colors.is_empty() {
        writeln!(out, r#"<g class="legend" font-family="sans-serif" font-size="14">"#)?;
        for (i, (label, fill)) in colors.iter().enumerate() {
            let top = 20.0 + 22.0 * i as f64;
            writeln!(out, r#"<rect x="{}" y="{top}" width="14" height="14" fill="{fill}"/>"#, PLOT_PX + 16.0)?;
            writeln!(out, r#"<text x="{}" y="{}">{label}</text>"#, PLOT_PX + 38.0, top + 12.0)?;
        }
        writeln!(out, "</g>")?;
    }
    writeln!(out, "</svg>")?;
    Ok(out)
}

fn bounds(points: &Array2<f64>) -> (f64, f64, f64, f64) {
    if points.nrows() == 0 {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let fold = |col: usize| {
        points
            .column(col)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    };
    let ((x0, x1), (y0, y1)) = (fold(0), fold(1));
    (x0, x1, y0, y1)
}

/// Extent plus a 5% margin on each side; a degenerate axis borrows the other's span.
fn pad(extent: f64, span: f64) -> f64 {
    let extent = if extent > 0.0 { extent } else { span };
    extent * (1.0 + 2.0 * MARGIN)
}

fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}
