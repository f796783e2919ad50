//! Window computation in the internal space: the dual iterated function
//! system, attractor box covers by two independent routes, overlap and
//! regularity analysis, and the model-set inclusion checks.

mod analysis;
mod attractor;
mod grid;

pub use analysis::{
    overlap_report, regularity_report, verify_model_set, InclusionReport, OverlapReport,
    RegularityReport,
};
pub use attractor::{apply_once, attractor_by_iteration, attractor_by_projection, attractor_levels, window_agreement};
pub use grid::{hausdorff_cells, CellGrid};

use crate::cps::CpsContext;
use crate::scalar::Scalar;
use crate::substitution::DigitSets;

#[derive(Debug, thiserror::Error)]
pub enum WindowError {
    #[error("dual system is not contractive (operator norm {norm})")]
    NotContractive { norm: f64 },
    #[error("attractor iteration budget exceeded: {what}")]
    BudgetExceeded { what: String },
    #[error("letter {letter} has {have} projected points, need at least {need}")]
    InsufficientPoints { letter: usize, have: usize, need: usize },
    #[error("covers must share one depth, got {a} and {b}")]
    DepthMismatch { a: u32, b: u32 },
}

/// The dual system on the internal space: for each letter pair `(i, j)`,
/// the contractions `u -> D u + Psi(a)` over the digits `a` of `D_ij`.
#[derive(Clone, Debug)]
pub struct DualIfs<T: Scalar> {
    dim: usize,
    d_matrix: Vec<Vec<T>>,
    /// `translations[i][j]` lists the star images of the digit set `D_ij`.
    translations: Vec<Vec<Vec<Vec<T>>>>,
    s_star: Vec<Vec<u64>>,
    contraction: T,
}

impl<T: Scalar> DualIfs<T> {
    pub fn kappa(&self) -> usize {
        self.translations.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn d_matrix(&self) -> &[Vec<T>] {
        &self.d_matrix
    }

    pub fn translations(&self, i: usize, j: usize) -> &[Vec<T>] {
        &self.translations[i][j]
    }

    /// Map-count matrix; coincides with the substitution matrix.
    pub fn s_star(&self) -> &[Vec<u64>] {
        &self.s_star
    }

    pub fn contraction(&self) -> T {
        self.contraction
    }

    pub fn apply(&self, u: &[T], t: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        for (i, row) in self.d_matrix.iter().enumerate() {
            let mut acc = t[i];
            for (j, c) in row.iter().enumerate() {
                acc += *c * u[j];
            }
            out[i] = acc;
        }
        out
    }
}

/// Projects every digit set through the star map. Requires the Pisot family
/// gate: the shared linear part must contract.
pub fn build_dual_ifs<T: Scalar>(
    digits: &DigitSets,
    cps: &CpsContext<T>,
) -> Result<DualIfs<T>, WindowError> {
    let c = cps.contraction();
    if !(c < T::one()) {
        return Err(WindowError::NotContractive { norm: c.to_f64_lossy() });
    }
    let k = digits.kappa();
    let mut translations = vec![vec![Vec::new(); k]; k];
    let mut s_star = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in 0..k {
            let ts: Vec<Vec<T>> = digits.entry(i, j).iter().map(|a| cps.star(a)).collect();
            s_star[i][j] = ts.len() as u64;
            translations[i][j] = ts;
        }
    }
    Ok(DualIfs {
        dim: cps.internal_dim(),
        d_matrix: cps.d_matrix().to_vec(),
        translations,
        s_star,
        contraction: c,
    })
}

/// Per-letter window approximation at one dyadic depth: a box cover, an
/// optional point cloud behind it, and the derived statistics.
#[derive(Clone, Debug)]
pub struct WindowApprox<T: Scalar> {
    pub depth: u32,
    pub dim: usize,
    pub covers: Vec<CellGrid>,
    pub clouds: Vec<Vec<Vec<T>>>,
    pub measures: Vec<T>,
    pub boundary_cells: Vec<usize>,
}

impl<T: Scalar> WindowApprox<T> {
    pub(crate) fn from_covers(depth: u32, dim: usize, covers: Vec<CellGrid>, clouds: Vec<Vec<Vec<T>>>) -> Self {
        let measures = covers.iter().map(|g| T::from_f64_lossy(g.measure())).collect();
        let boundary_cells = covers.iter().map(CellGrid::boundary_count).collect();
        WindowApprox { depth, dim, covers, clouds, measures, boundary_cells }
    }

    pub fn kappa(&self) -> usize {
        self.covers.len()
    }

    pub fn total_measure(&self) -> T {
        self.measures.iter().fold(T::zero(), |a, &m| a + m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{field_from_min_poly, find_roots, IntPolynomial};
    use crate::cps::build_cps;
    use crate::substitution::{build_matrix, derive_digit_sets, derive_lengths, parse_spec};
    use approx::assert_relative_eq;

    #[test]
    fn sqrt2_dual_system_matches_conjugated_equations() {
        let spec = parse_spec(
            r#"{"format":1,"letters":["a","b"],"rules":{"a":"aab","b":"abab"},
                "lengths":{"a":"1","b":"beta - 2"}}"#,
        )
        .unwrap();
        let matrix = build_matrix::<f64>(&spec, 1e-13);
        let p = IntPolynomial::from_i64(&[2, -4, 1]);
        let ctx = field_from_min_poly(p.clone()).unwrap();
        let lengths = derive_lengths(&spec, &matrix, &ctx, matrix.perron_value()).unwrap();
        let digits = derive_digit_sets(&spec, &ctx, &lengths);
        let emb = find_roots::<f64>(&p, 1e-13).unwrap();
        let cps = build_cps(&ctx, &emb, 1e-9).unwrap();
        let ifs = build_dual_ifs(&digits, &cps).unwrap();

        // gamma = 2 - sqrt2, and translations match
        // X_a = gamma X_a + {0,1}  u  gamma X_b + {0, 1-sqrt2}
        // X_b = gamma X_a + {2}    u  gamma X_b + {1, 2-sqrt2}
        assert_relative_eq!(ifs.d_matrix()[0][0], 2.0 - 2.0f64.sqrt(), epsilon = 1e-10);
        let s2 = 2.0f64.sqrt();
        let flat = |ts: &[Vec<f64>]| ts.iter().map(|t| t[0]).collect::<Vec<_>>();
        assert_eq!(ifs.translations(0, 0).len(), 2);
        let t = flat(ifs.translations(0, 0));
        assert_relative_eq!(t[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(t[1], 1.0, epsilon = 1e-10);
        let t = flat(ifs.translations(0, 1));
        assert_relative_eq!(t[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(t[1], 1.0 - s2, epsilon = 1e-10);
        let t = flat(ifs.translations(1, 0));
        assert_relative_eq!(t[0], 2.0, epsilon = 1e-10);
        let t = flat(ifs.translations(1, 1));
        assert_relative_eq!(t[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(t[1], 2.0 - s2, epsilon = 1e-10);
        // map counts match the substitution matrix
        assert_eq!(ifs.s_star(), matrix.counts());
    }

    #[test]
    fn empty_digit_slot_has_no_maps() {
        let spec = parse_spec(r#"{"format":1,"letters":["a","b"],"rules":{"a":"ab","b":"a"}}"#).unwrap();
        let matrix = build_matrix::<f64>(&spec, 1e-13);
        let p = IntPolynomial::from_i64(&[-1, -1, 1]);
        let ctx = field_from_min_poly(p.clone()).unwrap();
        let lengths = derive_lengths(&spec, &matrix, &ctx, matrix.perron_value()).unwrap();
        let digits = derive_digit_sets(&spec, &ctx, &lengths);
        let emb = find_roots::<f64>(&p, 1e-13).unwrap();
        let cps = build_cps(&ctx, &emb, 1e-9).unwrap();
        let ifs = build_dual_ifs(&digits, &cps).unwrap();
        assert!(ifs.translations(1, 1).is_empty());
        assert_eq!(ifs.s_star()[1][1], 0);
    }

    #[test]
    fn non_contractive_rejected() {
        // x^2 - x - 3: conjugate modulus 1.30
        let p = IntPolynomial::from_i64(&[-3, -1, 1]);
        let ctx = field_from_min_poly(p.clone()).unwrap();
        let emb = find_roots::<f64>(&p, 1e-13).unwrap();
        let cps = build_cps(&ctx, &emb, 1e-9).unwrap();
        let spec = parse_spec(r#"{"format":1,"letters":["a","b"],"rules":{"a":"abbb","b":"a"}}"#).unwrap();
        let matrix = build_matrix::<f64>(&spec, 1e-13);
        let lengths = derive_lengths(&spec, &matrix, &ctx, matrix.perron_value()).unwrap();
        let digits = derive_digit_sets(&spec, &ctx, &lengths);
        assert!(matches!(
            build_dual_ifs(&digits, &cps),
            Err(WindowError::NotContractive { .. })
        ));
    }
}
