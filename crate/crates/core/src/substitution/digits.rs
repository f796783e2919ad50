//! Digit sets: the translation sets that place child tiles inside an
//! inflated tile, their exact tile-equation validation, and M-fold
//! composition.

use std::collections::HashSet;

use num_bigint::BigInt;

use super::{SubstitutionError, SubstitutionSpec};
use crate::algebra::{AlgebraicElement, FieldRef};
use crate::scalar::Scalar;

/// `D[i][j]` lists the offsets at which letter-`i` tiles sit inside the
/// inflated letter-`j` tile. Entries are exact and possibly empty.
#[derive(Clone, Debug)]
pub struct DigitSets {
    table: Vec<Vec<Vec<AlgebraicElement>>>,
}

impl DigitSets {
    pub fn kappa(&self) -> usize {
        self.table.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &[AlgebraicElement] {
        &self.table[i][j]
    }

    pub fn table(&self) -> &[Vec<Vec<AlgebraicElement>>] {
        &self.table
    }

    pub fn total_len(&self) -> usize {
        self.table.iter().flatten().map(|v| v.len()).sum()
    }
}

/// Control points are left endpoints, so digit sets are the prefix sums of
/// child lengths in rule order.
pub fn derive_digit_sets(
    spec: &SubstitutionSpec,
    ctx: &FieldRef,
    lengths: &[AlgebraicElement],
) -> DigitSets {
    let k = spec.kappa();
    let mut table = vec![vec![Vec::new(); k]; k];
    for j in 0..k {
        let mut offset = AlgebraicElement::zero(ctx);
        for &i in spec.rule(j) {
            table[i][j].push(offset.clone());
            offset = offset.add(&lengths[i]);
        }
    }
    DigitSets { table }
}

/// Exact tile-equation check: for every letter `j` the translated child
/// intervals must chain from 0 to `beta * l_j` with no gaps or overlaps.
pub fn validate_tile_equation<T: Scalar>(
    spec: &SubstitutionSpec,
    digits: &DigitSets,
    lengths: &[AlgebraicElement],
    ctx: &FieldRef,
    beta_value: T,
) -> Result<(), SubstitutionError> {
    let k = spec.kappa();
    for j in 0..k {
        // (left endpoint, right endpoint) per child, sorted numerically;
        // the chain itself is checked with exact equality.
        let mut pieces: Vec<(AlgebraicElement, AlgebraicElement, f64)> = Vec::new();
        for i in 0..k {
            for a in digits.entry(i, j) {
                let right = a.add(&lengths[i]);
                let key = a.eval_real(beta_value).to_f64_lossy();
                pieces.push((a.clone(), right, key));
            }
        }
        pieces.sort_by(|x, y| x.2.partial_cmp(&y.2).unwrap());
        let letter = spec.letter(j);
        let zero = AlgebraicElement::zero(ctx);
        let expected_end = lengths[j].mul_beta();
        let mut cursor = zero;
        for (left, right, key) in &pieces {
            if *left != cursor {
                let kind = if left.eval_real(beta_value) > cursor.eval_real(beta_value) {
                    "gap"
                } else {
                    "overlap"
                };
                return Err(SubstitutionError::GapOrOverlap {
                    letter,
                    kind: kind.into(),
                    position: *key,
                });
            }
            cursor = right.clone();
        }
        if cursor != expected_end {
            return Err(SubstitutionError::GapOrOverlap {
                letter,
                kind: "short cover".into(),
                position: cursor.eval_real(beta_value).to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// M-fold composed digit sets:
/// `(D^M)_{ij} = union_k D_{ik} + beta * (D^{M-1})_{kj}`.
///
/// No deduplication: cardinalities must match the matrix power `S^M`, and
/// collisions would indicate an invalid substitution.
pub fn iterate_digit_sets(
    digits: &DigitSets,
    m: u32,
    cap: usize,
) -> Result<DigitSets, SubstitutionError> {
    assert!(m >= 1, "iteration order must be at least 1");
    let k = digits.kappa();
    let mut cur = digits.clone();
    for _ in 1..m {
        let mut next = vec![vec![Vec::new(); k]; k];
        let mut total = 0usize;
        for i in 0..k {
            for j in 0..k {
                let mut acc = Vec::new();
                for t in 0..k {
                    for d in digits.entry(i, t) {
                        for e in cur.entry(t, j) {
                            acc.push(d.add(&e.mul_beta()));
                        }
                    }
                }
                total += acc.len();
                if total > cap {
                    return Err(SubstitutionError::SizeLimit { cap });
                }
                next[i][j] = acc;
            }
        }
        cur = DigitSets { table: next };
    }
    Ok(cur)
}

/// Distinct-element check used by the cardinality invariant.
pub fn digit_set_is_collision_free(d: &DigitSets) -> bool {
    for i in 0..d.kappa() {
        for j in 0..d.kappa() {
            let mut seen: HashSet<(Vec<BigInt>, BigInt)> = HashSet::new();
            for e in d.entry(i, j) {
                if !seen.insert((e.numerators().to_vec(), e.denominator().clone())) {
                    return false;
                }
            }
        }
    }
    true
}
