//! The substitution matrix, its Perron data, primitivity, and the minimal
//! polynomial of the inflation factor.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{SubstitutionError, SubstitutionSpec};
use crate::algebra::IntPolynomial;
use crate::scalar::Scalar;

/// `S(i, j)` counts occurrences of letter `i` in the rule word of letter `j`
/// (equivalently, the size of the digit set `D_ij`).
#[derive(Clone, Debug)]
pub struct SubMatrix<T: Scalar> {
    counts: Vec<Vec<u64>>,
    perron_value: T,
    /// Right Perron eigenvector of S (letter frequencies direction), sum 1.
    perron_right: Vec<T>,
    /// Left Perron eigenvector of S (tile lengths direction), sum 1.
    perron_left: Vec<T>,
}

impl<T: Scalar> SubMatrix<T> {
    pub fn kappa(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i][j]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn perron_value(&self) -> T {
        self.perron_value
    }

    pub fn perron_right(&self) -> &[T] {
        &self.perron_right
    }

    pub fn perron_left(&self) -> &[T] {
        &self.perron_left
    }

    /// Exact integer power of the count matrix.
    pub fn pow(&self, m: u32) -> Vec<Vec<BigInt>> {
        let k = self.kappa();
        let base: Vec<Vec<BigInt>> = self
            .counts
            .iter()
            .map(|row| row.iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        let mut acc: Vec<Vec<BigInt>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        for _ in 0..m {
            acc = big_mat_mul(&acc, &base);
        }
        acc
    }

    pub fn counts_bigint(&self) -> Vec<Vec<BigInt>> {
        self.pow(1)
    }
}

fn big_mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                let p = &a[i][k] * &b[k][j];
                out[i][j] += p;
            }
        }
    }
    out
}

/// Counts letters in rule words and runs power iteration for the Perron
/// value and the two Perron eigenvectors.
pub fn build_matrix<T: Scalar>(spec: &SubstitutionSpec, rel_tol: T) -> SubMatrix<T> {
    let k = spec.kappa();
    let mut counts = vec![vec![0u64; k]; k];
    for j in 0..k {
        for &i in spec.rule(j) {
            counts[i][j] += 1;
        }
    }
    let (value, right) = power_iteration(&counts, rel_tol, false);
    let (_, left) = power_iteration(&counts, rel_tol, true);
    SubMatrix {
        counts,
        perron_value: value,
        perron_right: right,
        perron_left: left,
    }
}

fn power_iteration<T: Scalar>(counts: &[Vec<u64>], rel_tol: T, transpose: bool) -> (T, Vec<T>) {
    let k = counts.len();
    let mut v = vec![T::one() / T::from_f64_lossy(k as f64); k];
    let mut value = T::one();
    for _ in 0..100_000 {
        let mut next = vec![T::zero(); k];
        for i in 0..k {
            for j in 0..k {
                let c = if transpose { counts[j][i] } else { counts[i][j] };
                if c != 0 {
                    next[i] += T::from_f64_lossy(c as f64) * v[j];
                }
            }
        }
        let sum = next.iter().fold(T::zero(), |a, &b| a + b);
        for x in next.iter_mut() {
            *x /= sum;
        }
        let new_value = sum;
        let change = ((new_value - value) / new_value).abs();
        let v_change = next
            .iter()
            .zip(&v)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        v = next;
        value = new_value;
        if change < rel_tol && v_change < rel_tol {
            break;
        }
    }
    (value, v)
}

/// Smallest `l` with `S^l > 0`, searched up to the Wielandt bound
/// `kappa^2 - 2 kappa + 2`.
pub fn check_primitive<T: Scalar>(s: &SubMatrix<T>) -> Result<usize, SubstitutionError> {
    let k = s.kappa();
    let bound = k * k + 2 - 2 * k;
    let mut acc = s.pow(0);
    let base = s.counts_bigint();
    for l in 1..=bound {
        acc = big_mat_mul(&acc, &base);
        if acc.iter().all(|row| row.iter().all(|c| c.is_positive())) {
            return Ok(l);
        }
    }
    Err(SubstitutionError::NotPrimitive { bound })
}

/// Minimal polynomial of the inflation factor: the irreducible factor of
/// the squarefree part of `char(S)` that vanishes at the Perron value.
///
/// An override is honored after verifying it divides `char(S)` and kills
/// the Perron value.
pub fn derive_min_poly<T: Scalar>(
    s: &SubMatrix<T>,
    override_poly: Option<&IntPolynomial>,
    tol: T,
) -> Result<IntPolynomial, SubstitutionError> {
    let char_poly = IntPolynomial::char_poly(&s.counts_bigint());
    let perron = s.perron_value();
    if let Some(p) = override_poly {
        if !p.is_monic() {
            return Err(SubstitutionError::MinPolyOverride {
                reason: format!("{p} is not monic"),
            });
        }
        if char_poly.div_exact(p).is_none() {
            return Err(SubstitutionError::MinPolyOverride {
                reason: format!("{p} does not divide the characteristic polynomial {char_poly}"),
            });
        }
        if !(p.eval_real(perron).abs() < tol * scale_at(p, perron)) {
            return Err(SubstitutionError::MinPolyOverride {
                reason: format!("{p} does not vanish at the Perron value {perron}"),
            });
        }
        return Ok(p.clone());
    }
    let sf = char_poly.squarefree_part();
    let factors = sf.factor()?;
    let mut best: Option<(&IntPolynomial, T)> = None;
    for f in &factors {
        let v = f.eval_real(perron).abs() / scale_at(f, perron);
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((f, v));
        }
    }
    let (min_poly, v) = best.ok_or_else(|| SubstitutionError::NoExactEigenvector {
        reason: "characteristic polynomial has no factors".into(),
    })?;
    if !(v < tol) {
        return Err(SubstitutionError::NoExactEigenvector {
            reason: format!("no irreducible factor of {char_poly} vanishes at the Perron value {perron}"),
        });
    }
    if !min_poly.is_monic() {
        return Err(SubstitutionError::NoExactEigenvector {
            reason: format!("Perron factor {min_poly} is not monic"),
        });
    }
    Ok(min_poly.clone())
}

fn scale_at<T: Scalar>(p: &IntPolynomial, x: T) -> T {
    let mut scale = T::one();
    let mut pw = T::one();
    for c in p.coeffs() {
        scale += T::from_bigint(c).abs() * pw;
        pw *= x.abs();
    }
    scale
}
