//! The return module: same-letter control point differences and the
//! integer lattice they generate.

use std::collections::HashSet;

use num_bigint::BigInt;

use super::hnf::{column_hnf, hnf_determinant};
use super::{PatchPointSet, PointsetError};
use crate::algebra::AlgebraicElement;

/// All same-letter differences with `|value| <= radius`, exact and
/// deduplicated. Always contains 0 and is symmetric about it.
#[derive(Clone, Debug)]
pub struct ReturnModule {
    points: Vec<AlgebraicElement>,
    keys: Vec<f64>,
    set: HashSet<Vec<BigInt>>,
    radius: f64,
    beta: f64,
}

impl ReturnModule {
    /// Sorted by numeric value.
    pub fn points(&self) -> &[AlgebraicElement] {
        &self.points
    }

    /// Numeric values, aligned with [`Self::points`].
    pub fn keys(&self) -> &[f64] {
        &self.keys
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact membership test on the generated window.
    pub fn contains(&self, x: &AlgebraicElement) -> bool {
        x.is_integral() && self.set.contains(x.integer_coeffs())
    }
}

/// Collects `Xi = union_i (C_i - C_i)` restricted to `[-radius, radius]`
/// from the generated patch, by a sliding window over each letter class.
pub fn compute_xi(patch: &PatchPointSet, radius: f64) -> ReturnModule {
    let mut set: HashSet<Vec<BigInt>> = HashSet::new();
    let mut entries: Vec<(f64, AlgebraicElement)> = Vec::new();
    let tiles = patch.tiles();
    let slack = 1e-9 * (1.0 + radius);
    for letter in 0..patch.kappa() {
        let idx = patch.letter_indices(letter);
        for (a, &ia) in idx.iter().enumerate() {
            let base = &tiles[ia];
            for &ib in idx[a..].iter() {
                let other = &tiles[ib];
                if other.key - base.key > radius + slack {
                    break;
                }
                let diff = other.pos.sub(&base.pos);
                let value = diff.eval_real(patch.beta());
                if value.abs() <= radius {
                    if set.insert(diff.integer_coeffs().to_vec()) {
                        entries.push((value, diff.clone()));
                    }
                    let neg = diff.neg();
                    if set.insert(neg.integer_coeffs().to_vec()) {
                        entries.push((-value, neg));
                    }
                }
            }
        }
    }
    entries.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let keys = entries.iter().map(|(k, _)| *k).collect();
    let points = entries.into_iter().map(|(_, p)| p).collect();
    ReturnModule { points, keys, set, radius, beta: patch.beta() }
}

/// The integer lattice generated by the return vectors, as a column
/// Hermite basis inside `Z[beta] = Z^n`, plus its index.
#[derive(Clone, Debug)]
pub struct ModuleAnalysis {
    pub hnf_basis: Vec<Vec<BigInt>>,
    pub index_in_ambient: BigInt,
}

pub fn module_analysis(xi: &ReturnModule, n: usize) -> Result<ModuleAnalysis, PointsetError> {
    let vectors: Vec<Vec<BigInt>> = xi
        .points()
        .iter()
        .filter(|p| p.is_integral())
        .map(|p| p.integer_coeffs().to_vec())
        .collect();
    let hnf = column_hnf(n, &vectors).ok_or_else(|| {
        let rank = rank_of(n, &vectors);
        PointsetError::RankDeficient { rank, needed: n }
    })?;
    let index = hnf_determinant(&hnf);
    Ok(ModuleAnalysis { hnf_basis: hnf, index_in_ambient: index })
}

fn rank_of(n: usize, vectors: &[Vec<BigInt>]) -> usize {
    // Rational row reduction is enough for an error message.
    use num_rational::BigRational;
    use num_traits::Zero;
    let mut rows: Vec<Vec<BigRational>> = vectors
        .iter()
        .map(|v| v.iter().map(|c| BigRational::from_integer(c.clone())).collect())
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &pivot;
                for c in col..n {
                    let delta = &f * &rows[rank][c];
                    rows[r][c] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}
