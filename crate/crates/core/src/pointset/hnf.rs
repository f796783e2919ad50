//! Column Hermite normal form over the integers.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Canonical column HNF of the integer column span of `vectors` (each of
/// length `n`). Returns `None` when the span has rank below `n`.
///
/// The result `h` is lower triangular with positive diagonal and
/// `0 <= h[i][j] < h[i][i]` for `j < i`; `h[j]` is the j-th basis column.
pub fn column_hnf(n: usize, vectors: &[Vec<BigInt>]) -> Option<Vec<Vec<BigInt>>> {
    let mut cols: Vec<Vec<BigInt>> = vectors.iter().filter(|v| !is_zero_vec(v)).cloned().collect();
    let mut basis: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in 0..n {
        // Gcd elimination on the active columns at this row.
        loop {
            let mut nonzero: Vec<usize> = (0..cols.len()).filter(|&c| !cols[c][row].is_zero()).collect();
            if nonzero.is_empty() {
                return None;
            }
            if nonzero.len() == 1 {
                break;
            }
            nonzero.sort_by(|&a, &b| cols[a][row].abs().cmp(&cols[b][row].abs()));
            let pivot = nonzero[0];
            let pivot_col = cols[pivot].clone();
            let pv = pivot_col[row].clone();
            for &c in &nonzero[1..] {
                let q = div_round(&cols[c][row], &pv);
                if !q.is_zero() {
                    for r in row..n {
                        let delta = &q * &pivot_col[r];
                        cols[c][r] -= delta;
                    }
                }
            }
            cols.retain(|v| !is_zero_vec(v));
        }
        let idx = (0..cols.len()).find(|&c| !cols[c][row].is_zero()).unwrap();
        let mut pivot = cols.swap_remove(idx);
        if pivot[row].is_negative() {
            for x in pivot.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        basis.push(pivot);
        cols.retain(|v| !is_zero_vec(v));
    }

    // Reduce off-diagonal entries: 0 <= basis[j][i] < basis[i][i] for i > j.
    for j in 0..n {
        for i in (j + 1)..n {
            let d = basis[i][i].clone();
            let q = euclid_div(&basis[j][i], &d);
            if !q.is_zero() {
                for r in i..n {
                    let delta = &q * &basis[i][r];
                    basis[j][r] -= delta;
                }
            }
        }
    }
    Some(basis)
}

pub fn hnf_determinant(h: &[Vec<BigInt>]) -> BigInt {
    let mut det = BigInt::from(1);
    for (i, col) in h.iter().enumerate() {
        det *= &col[i];
    }
    det
}

fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Euclidean quotient: `a - euclid_div(a, b) * b` lies in `[0, |b|)`.
fn euclid_div(a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(b.is_positive());
    let (q, r) = (a / b, a % b);
    if r.is_negative() {
        q - 1
    } else {
        q
    }
}

/// Quotient rounded to nearest (ties toward zero), so remainders shrink fast.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (q, r) = (a / b, a % b);
    if (&r * &two).abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}
