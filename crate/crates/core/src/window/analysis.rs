//! Window analysis: interior overlap, boundary-decay regularity evidence,
//! and the two model-set inclusion checks.

use num_bigint::BigInt;

use super::grid::CellGrid;
use super::{DualIfs, WindowApprox};
use crate::cps::{enumerate_module_box, CpsContext, CpsError};
use crate::pointset::PatchPointSet;
use crate::scalar::Scalar;

/// Interior overlap between letter windows. Each pairwise intersection is
/// eroded by one cell layer so touching closures do not count.
#[derive(Clone, Debug)]
pub struct OverlapReport<T> {
    /// `(i, j, eroded cell count, eroded volume)` for `i < j`.
    pub pairs: Vec<(usize, usize, usize, T)>,
    pub disjoint_interiors: bool,
    pub depth: u32,
}

pub fn overlap_report<T: Scalar>(wa: &WindowApprox<T>) -> OverlapReport<T> {
    let mut pairs = vec![];
    let mut disjoint = true;
    for i in 0..wa.kappa() {
        for j in (i + 1)..wa.kappa() {
            let inter = pad_to_common(&wa.covers[i]).intersect(&pad_to_common(&wa.covers[j]));
            let eroded = inter.erode(1);
            let cells = eroded.occupied_count();
            if cells > 0 {
                disjoint = false;
            }
            pairs.push((i, j, cells, T::from_f64_lossy(eroded.measure())));
        }
    }
    OverlapReport { pairs, disjoint_interiors: disjoint, depth: wa.depth }
}

/// Re-boxes a grid so intersections of differently-boxed covers line up.
fn pad_to_common(g: &CellGrid) -> CellGrid {
    match g.occupied_bbox() {
        None => g.clone(),
        Some((lo, hi)) => {
            let dim = g.dim();
            let lo2: Vec<i64> = lo.iter().map(|&l| l - 1).collect();
            let shape: Vec<usize> = (0..dim).map(|d| (hi[d] - lo[d] + 3) as usize).collect();
            let mut out = CellGrid::new(g.depth(), dim, lo2, shape);
            for cell in g.occupied_cells() {
                out.set(&cell);
            }
            out
        }
    }
}

/// Boundary-volume decay across depths plus the measure eigen-relation
/// residual at the deepest cover.
#[derive(Clone, Debug)]
pub struct RegularityReport<T> {
    /// `(depth, total boundary-cell volume)`, ascending depth.
    pub boundary_series: Vec<(u32, T)>,
    pub strictly_decreasing: bool,
    /// Fitted slope of `log2(boundary volume)` against depth.
    pub decay_exponent: f64,
    /// `|w - |det D| S w| / |w|` for the measure vector of the deepest cover.
    pub eigen_residual: T,
}

pub fn regularity_report<T: Scalar>(
    covers_by_depth: &[WindowApprox<T>],
    ifs: &DualIfs<T>,
    det_d_abs: T,
) -> RegularityReport<T> {
    assert!(!covers_by_depth.is_empty());
    let mut series: Vec<(u32, T)> = covers_by_depth
        .iter()
        .map(|wa| {
            let h = 0.5f64.powi(wa.depth as i32);
            let vol: f64 = wa
                .boundary_cells
                .iter()
                .map(|&c| c as f64 * h.powi(wa.dim as i32))
                .sum();
            (wa.depth, T::from_f64_lossy(vol))
        })
        .collect();
    series.sort_by_key(|&(d, _)| d);
    let strictly_decreasing = series.windows(2).all(|w| w[1].1 < w[0].1);
    let decay_exponent = fit_log_slope(&series);

    let deepest = covers_by_depth
        .iter()
        .max_by_key(|wa| wa.depth)
        .expect("nonempty");
    let w: Vec<T> = deepest.measures.clone();
    let k = w.len();
    let mut img = vec![T::zero(); k];
    for i in 0..k {
        for j in 0..k {
            img[i] += T::from_f64_lossy(ifs.s_star()[i][j] as f64) * w[j];
        }
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for i in 0..k {
        let d = w[i] - det_d_abs * img[i];
        num += d * d;
        den += w[i] * w[i];
    }
    let eigen_residual = (num.sqrt()) / (den.sqrt());

    RegularityReport { boundary_series: series, strictly_decreasing, decay_exponent, eigen_residual }
}

fn fit_log_slope<T: Scalar>(series: &[(u32, T)]) -> f64 {
    if series.len() < 2 {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, v)| v.to_f64_lossy() > 0.0)
        .map(|(d, v)| (*d as f64, v.to_f64_lossy().log2()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Finite-window model-set check.
///
/// Direction one: every control point's star image lies in its letter's
/// cover. Direction two: every module point within the physical window
/// whose star image lies in the margin-eroded cover of a letter is a
/// control point of that letter.
#[derive(Clone, Debug)]
pub struct InclusionReport {
    pub dir1_checked: usize,
    pub dir1_exceptions: usize,
    pub dir2_checked: usize,
    pub dir2_exceptions: usize,
    pub margin: u32,
    pub radius: f64,
    pub depth: u32,
}

pub fn verify_model_set<T: Scalar>(
    patch: &PatchPointSet,
    wa: &WindowApprox<T>,
    cps: &CpsContext<T>,
    module_basis: &[Vec<BigInt>],
    margin: u32,
    radius: f64,
) -> Result<InclusionReport, CpsError> {
    let membership = patch.membership();
    assert!(patch.radius() >= radius, "patch must cover the verification window");

    let mut dir1_checked = 0;
    let mut dir1_exceptions = 0;
    for t in patch.tiles() {
        if t.key.abs() > radius {
            continue;
        }
        dir1_checked += 1;
        let star: Vec<f64> = cps.star(&t.pos).iter().map(|s| s.to_f64_lossy()).collect();
        if !wa.covers[t.letter].contains_point(&star) {
            dir1_exceptions += 1;
        }
    }

    // Internal-space reach of the covers bounds the enumeration ball.
    let h = 0.5f64.powi(wa.depth as i32);
    let mut r_internal = 0.0f64;
    for g in &wa.covers {
        if let Some((lo, hi)) = g.occupied_bbox() {
            let mut corner = 0.0;
            for d in 0..wa.dim {
                let m = (lo[d].abs().max(hi[d].abs() + 1)) as f64 * h;
                corner += m * m;
            }
            r_internal = r_internal.max(corner.sqrt());
        }
    }
    let eroded: Vec<CellGrid> = wa.covers.iter().map(|g| g.erode(margin)).collect();

    let points = enumerate_module_box(
        cps,
        module_basis,
        T::from_f64_lossy(radius),
        T::from_f64_lossy(r_internal + 2.0 * h),
    )?;
    let mut dir2_checked = 0;
    let mut dir2_exceptions = 0;
    for x in &points {
        let star: Vec<f64> = cps.star(x).iter().map(|s| s.to_f64_lossy()).collect();
        for (letter, grid) in eroded.iter().enumerate() {
            if grid.contains_point(&star) {
                dir2_checked += 1;
                if membership.get(x.integer_coeffs()) != Some(&letter) {
                    dir2_exceptions += 1;
                }
            }
        }
    }

    Ok(InclusionReport {
        dir1_checked,
        dir1_exceptions,
        dir2_checked,
        dir2_exceptions,
        margin,
        radius,
        depth: wa.depth,
    })
}
