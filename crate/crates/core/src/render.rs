//! Deterministic artifact rendering: CSV dumps of point sets and cell
//! covers, and SVG window figures (interval bars in one dimension, cell
//! rasters in two).

use std::fmt::Write as _;

use crate::pointset::{PatchPointSet, ReturnModule};
use crate::scalar::Scalar;
use crate::window::{CellGrid, WindowApprox};

/// Fixed per-letter colors, cycled when a substitution has more letters.
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn coeff_field(coeffs: &[num_bigint::BigInt]) -> String {
    coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

/// `letter,position,coeffs` rows for the generated control points.
pub fn points_csv(patch: &PatchPointSet, letters: &[char]) -> String {
    let mut out = String::from("letter,position,coeffs\n");
    for t in patch.tiles() {
        let _ = writeln!(out, "{},{},{}", letters[t.letter], t.key, coeff_field(t.pos.integer_coeffs()));
    }
    out
}

/// `position,coeffs` rows for the return vectors.
pub fn xi_csv(xi: &ReturnModule) -> String {
    let mut out = String::from("position,coeffs\n");
    for (p, k) in xi.points().iter().zip(xi.keys()) {
        let _ = writeln!(out, "{},{}", k, coeff_field(p.integer_coeffs()));
    }
    out
}

/// `letter,depth,cell...` rows for the window covers.
pub fn cells_csv<T: Scalar>(wa: &WindowApprox<T>, letters: &[char]) -> String {
    let mut out = String::from("letter,depth,cell\n");
    for (l, grid) in wa.covers.iter().enumerate() {
        for cell in grid.occupied_cells() {
            let coords = cell.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
            let _ = writeln!(out, "{},{},{}", letters[l], wa.depth, coords);
        }
    }
    out
}

/// SVG rendering of the window covers.
pub fn windows_svg<T: Scalar>(wa: &WindowApprox<T>, letters: &[char]) -> String {
    match wa.dim {
        1 => svg_1d(wa, letters),
        _ => svg_2d(wa, letters),
    }
}

fn global_bbox(covers: &[CellGrid]) -> Option<(Vec<i64>, Vec<i64>)> {
    let mut acc: Option<(Vec<i64>, Vec<i64>)> = None;
    for g in covers {
        if let Some((lo, hi)) = g.occupied_bbox() {
            acc = Some(match acc {
                None => (lo, hi),
                Some((mut alo, mut ahi)) => {
                    for d in 0..lo.len() {
                        alo[d] = alo[d].min(lo[d]);
                        ahi[d] = ahi[d].max(hi[d]);
                    }
                    (alo, ahi)
                }
            });
        }
    }
    acc
}

/// Merges sorted cells into runs along the last axis: (start_cell, length).
fn runs(grid: &CellGrid) -> Vec<(Vec<i64>, i64)> {
    let mut out: Vec<(Vec<i64>, i64)> = vec![];
    for cell in grid.occupied_cells() {
        match out.last_mut() {
            Some((start, len))
                if start[..start.len() - 1] == cell[..cell.len() - 1]
                    && start[start.len() - 1] + *len == cell[cell.len() - 1] =>
            {
                *len += 1;
            }
            _ => out.push((cell, 1)),
        }
    }
    out
}

fn svg_1d<T: Scalar>(wa: &WindowApprox<T>, letters: &[char]) -> String {
    let width = 800.0;
    let bar = 28.0;
    let gap = 14.0;
    let margin = 40.0;
    let k = wa.covers.len();
    let height = margin * 2.0 + k as f64 * (bar + gap);
    let Some((lo, hi)) = global_bbox(&wa.covers) else {
        return empty_svg();
    };
    let h = wa.covers[0].cell_width();
    let x0 = lo[0] as f64 * h;
    let x1 = (hi[0] + 1) as f64 * h;
    let scale = (width - 2.0 * margin) / (x1 - x0);
    let mut svg = svg_header(width, height);
    for (l, grid) in wa.covers.iter().enumerate() {
        let color = PALETTE[l % PALETTE.len()];
        let y = margin + l as f64 * (bar + gap);
        for (start, len) in runs(grid) {
            let x = margin + (start[0] as f64 * h - x0) * scale;
            let w = len as f64 * h * scale;
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{bar}" fill="{color}" fill-opacity="0.85"/>"#
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="14">{} [{:.6}, {:.6}]</text>"#,
            margin,
            y - 3.0,
            letters[l],
            grid.occupied_bbox().map_or(0.0, |(a, _)| a[0] as f64 * h),
            grid.occupied_bbox().map_or(0.0, |(_, b)| (b[0] + 1) as f64 * h),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn svg_2d<T: Scalar>(wa: &WindowApprox<T>, letters: &[char]) -> String {
    let Some((lo, hi)) = global_bbox(&wa.covers) else {
        return empty_svg();
    };
    let h = wa.covers[0].cell_width();
    let margin = 30.0;
    let span_x = (hi[0] - lo[0] + 1) as f64;
    let span_y = (hi[1] - lo[1] + 1) as f64;
    let scale = (800.0 - 2.0 * margin) / span_x;
    let width = 800.0;
    let height = span_y * scale + 2.0 * margin + 20.0 * wa.covers.len() as f64;
    let mut svg = svg_header(width, height);
    for (l, grid) in wa.covers.iter().enumerate() {
        let color = PALETTE[l % PALETTE.len()];
        // runs along the second axis are vertical strips; draw rows instead
        for (start, len) in runs(grid) {
            let x = margin + (start[0] - lo[0]) as f64 * scale;
            let y = margin + (start[1] - lo[1]) as f64 * scale;
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{hh:.3}" fill="{color}" fill-opacity="0.55"/>"#,
                w = scale.max(0.4),
                hh = (len as f64 * scale).max(0.4),
            );
        }
        let ly = margin + span_y * scale + 16.0 * (l + 1) as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{margin}" y="{:.3}" width="12" height="12" fill="{color}"/><text x="{:.3}" y="{:.3}" font-family="monospace" font-size="13">{} ({} cells, h = {h:.6})</text>"#,
            ly - 10.0,
            margin + 18.0,
            ly,
            letters[l],
            grid.occupied_count(),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn svg_header(width: f64, height: f64) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">
<rect width="100%" height="100%" fill="white"/>
"#
    )
}

fn empty_svg() -> String {
    let mut s = svg_header(200.0, 60.0);
    s.push_str("<text x=\"20\" y=\"35\" font-family=\"monospace\">empty cover</text>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run_pipeline, PipelineParams, Stage};
    use crate::substitution::parse_spec;

    #[test]
    fn csv_and_svg_are_deterministic() {
        let spec = parse_spec(r#"{"format":1,"letters":["a","b"],"rules":{"a":"ab","b":"a"}}"#).unwrap();
        let mut params = PipelineParams::default();
        params.radius = 30.0;
        let run = run_pipeline::<f64>(&spec, &params, Stage::Full).unwrap();
        let patch = run.artifacts.patch.as_ref().unwrap();
        let xi = run.artifacts.xi.as_ref().unwrap();
        let wa = run.artifacts.windows_iter.as_ref().unwrap();
        let letters = ['a', 'b'];

        let c1 = points_csv(patch, &letters);
        let c2 = points_csv(patch, &letters);
        assert_eq!(c1, c2);
        assert!(c1.starts_with("letter,position,coeffs\n"));
        assert!(c1.lines().count() > 10);

        let x1 = xi_csv(xi);
        assert!(x1.lines().any(|l| l.starts_with("0,")));

        let s1 = windows_svg(wa, &letters);
        let s2 = windows_svg(wa, &letters);
        assert_eq!(s1, s2);
        assert!(s1.starts_with("<svg"));
        assert!(s1.contains("rect"));

        let cells = cells_csv(wa, &letters);
        assert_eq!(cells.lines().count() - 1, wa.covers.iter().map(|g| g.occupied_count()).sum::<usize>());
    }

    #[test]
    fn planar_svg_renders() {
        let spec =
            parse_spec(r#"{"format":1,"letters":["a","b","c"],"rules":{"a":"ab","b":"ac","c":"a"}}"#).unwrap();
        let mut params = PipelineParams::default();
        params.radius = 30.0;
        params.depth = Some(6);
        let run = run_pipeline::<f64>(&spec, &params, Stage::Full).unwrap();
        let wa = run.artifacts.windows_iter.as_ref().unwrap();
        let svg = windows_svg(wa, &['a', 'b', 'c']);
        assert!(svg.contains("#2ca02c"));
    }
}
