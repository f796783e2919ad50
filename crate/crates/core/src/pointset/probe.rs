//! Finite-radius Delone/Meyer/FLC evidence. None of these are proofs; they
//! report minimum gaps and local-configuration counts on the generated
//! window, at two radii so stabilization is visible.

use std::collections::HashSet;

use num_bigint::BigInt;

use super::{PatchPointSet, ReturnModule};

#[derive(Clone, Debug)]
pub struct MeyerFlcReport {
    /// Smallest gap between consecutive control points (all letters).
    pub support_min_gap: f64,
    /// Smallest positive distance within (Xi - Xi), at half and full radius.
    pub xi_diff_min_gap_half: f64,
    pub xi_diff_min_gap: f64,
    /// Number of distinct local configurations of the given radius.
    pub config_radius: f64,
    pub config_count_half: usize,
    pub config_count: usize,
    pub radius: f64,
}

pub fn meyer_flc_probe(patch: &PatchPointSet, xi: &ReturnModule, config_radius: f64) -> MeyerFlcReport {
    let support_min_gap = patch
        .tiles()
        .windows(2)
        .map(|t| t[1].key - t[0].key)
        .fold(f64::INFINITY, f64::min);

    let r = xi.radius();
    let xi_diff_min_gap_half = xi_difference_min_gap(xi, r / 2.0);
    let xi_diff_min_gap = xi_difference_min_gap(xi, r);

    let half_window = patch.radius() / 2.0;
    let config_count_half = count_configs(patch, config_radius, half_window);
    let config_count = count_configs(patch, config_radius, patch.radius());

    MeyerFlcReport {
        support_min_gap,
        xi_diff_min_gap_half,
        xi_diff_min_gap,
        config_radius,
        config_count_half,
        config_count,
        radius: patch.radius(),
    }
}

/// Minimum positive gap of the set (Xi - Xi) restricted to `[-window, window]`.
fn xi_difference_min_gap(xi: &ReturnModule, window: f64) -> f64 {
    let points = xi.points();
    let keys = xi.keys();
    let mut values: Vec<f64> = Vec::new();
    let mut seen: HashSet<Vec<BigInt>> = HashSet::new();
    for i in 0..points.len() {
        for j in i..points.len() {
            if keys[j] - keys[i] > window {
                break;
            }
            let d = points[j].sub(&points[i]);
            if seen.insert(d.integer_coeffs().to_vec()) {
                values.push(keys[j] - keys[i]);
            }
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut min_gap = f64::INFINITY;
    for w in values.windows(2) {
        let gap = w[1] - w[0];
        if gap > 1e-12 {
            min_gap = min_gap.min(gap);
        }
    }
    min_gap
}

/// Distinct local configurations of radius `config_radius`, centered at
/// control points within `window`.
fn count_configs(patch: &PatchPointSet, config_radius: f64, window: f64) -> usize {
    let tiles = patch.tiles();
    let inner = window - config_radius;
    let mut configs: HashSet<Vec<(usize, Vec<BigInt>)>> = HashSet::new();
    for (i, t) in tiles.iter().enumerate() {
        if t.key.abs() > inner {
            continue;
        }
        let mut config = vec![];
        // scan left
        let mut j = i;
        while j > 0 && tiles[j - 1].key >= t.key - config_radius {
            j -= 1;
        }
        while j < tiles.len() && tiles[j].key <= t.key + config_radius {
            let offset = tiles[j].pos.sub(&t.pos);
            config.push((tiles[j].letter, offset.integer_coeffs().to_vec()));
            j += 1;
        }
        configs.insert(config);
    }
    configs.len()
}
