//! Algebraic-coincidence search: find `xi` and `M` with
//! `xi + beta^M Xi` contained in one control-point class, checked on the
//! generated window. Certificates are finite-radius evidence, never proofs,
//! and carry their bounds.

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::algebra::AlgebraicElement;
use crate::cps::{norm, CpsContext};
use crate::pointset::{PatchPointSet, ReturnModule};
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum CoincidenceError {
    #[error("patch too small: need radius {needed}, generated {have}")]
    PatchTooSmall { needed: f64, have: f64 },
    #[error("no exponent up to {bound} works at this radius")]
    NotFound { bound: u32 },
}

/// Outcome of the coincidence search. When `found`, every return vector in
/// the checked window satisfies `xi + beta^M x` being a control point of
/// `letter`; otherwise `counterexample` witnesses the failure for the best
/// candidate tried.
#[derive(Clone, Debug)]
pub struct CoincidenceCertificate {
    pub found: bool,
    pub m: u32,
    pub xi: AlgebraicElement,
    pub letter: usize,
    pub radius_checked: f64,
    pub m_max: u32,
    pub candidate_radius: f64,
    pub counterexample: Option<AlgebraicElement>,
}

/// Searches exponents `1..=m_max` in order, and for each exponent the
/// candidates `xi = 0` first, then control points by increasing distance
/// from the origin. The first hit in this order is the canonical
/// certificate.
pub fn search_coincidence(
    patch: &PatchPointSet,
    xi_module: &ReturnModule,
    m_max: u32,
    radius: f64,
    candidate_radius: f64,
) -> Result<CoincidenceCertificate, CoincidenceError> {
    let membership = patch.membership();
    let candidates = candidate_list(patch, candidate_radius);
    let needed = patch.beta().powi(m_max as i32) * radius + candidate_radius;
    if patch.radius() < needed {
        return Err(CoincidenceError::PatchTooSmall { needed, have: patch.radius() });
    }

    // Return vectors in the checked window, scaled stepwise by beta.
    let mut scaled: Vec<AlgebraicElement> = xi_module
        .points()
        .iter()
        .zip(xi_module.keys())
        .filter(|(_, k)| k.abs() <= radius)
        .map(|(p, _)| p.clone())
        .collect();
    let mut first_failure: Option<AlgebraicElement> = None;

    for m in 1..=m_max {
        for s in scaled.iter_mut() {
            *s = s.mul_beta();
        }
        for (xi, letter) in &candidates {
            let mut ok = true;
            for (s, original) in scaled.iter().zip(
                xi_module
                    .points()
                    .iter()
                    .zip(xi_module.keys())
                    .filter(|(_, k)| k.abs() <= radius)
                    .map(|(p, _)| p),
            ) {
                let shifted = xi.add(s);
                if membership.get(shifted.integer_coeffs()) != Some(letter) {
                    ok = false;
                    if xi.is_zero() && m == m_max && first_failure.is_none() {
                        first_failure = Some(original.clone());
                    }
                    break;
                }
            }
            if ok {
                return Ok(CoincidenceCertificate {
                    found: true,
                    m,
                    xi: xi.clone(),
                    letter: *letter,
                    radius_checked: radius,
                    m_max,
                    candidate_radius,
                    counterexample: None,
                });
            }
        }
    }
    let (xi0, letter0) = candidates[0].clone();
    Ok(CoincidenceCertificate {
        found: false,
        m: m_max,
        xi: xi0,
        letter: letter0,
        radius_checked: radius,
        m_max,
        candidate_radius,
        counterexample: first_failure,
    })
}

/// `xi = 0` first (the origin is always a control point of the seed
/// letter), then control points ordered by |position|, ties by letter.
fn candidate_list(patch: &PatchPointSet, candidate_radius: f64) -> Vec<(AlgebraicElement, usize)> {
    let mut rest: Vec<(f64, usize, AlgebraicElement)> = vec![];
    let mut zero = None;
    for t in patch.tiles() {
        if t.pos.is_zero() {
            zero = Some((t.pos.clone(), t.letter));
        } else if t.key.abs() <= candidate_radius {
            rest.push((t.key.abs(), t.letter, t.pos.clone()));
        }
    }
    let mut out = Vec::with_capacity(rest.len() + 1);
    out.push(zero.expect("origin is a control point of the seed"));
    rest.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    out.extend(rest.into_iter().map(|(_, l, p)| (p, l)));
    out
}

/// Checks the difference inclusion `beta^M Xi - beta^M Xi` inside `Xi` on
/// the window `[-r, r]`, skipping pairs whose scaled difference leaves the
/// generated data. Returns the first witness on failure.
pub fn check_xi_difference_inclusion(
    xi_module: &ReturnModule,
    m: u32,
    r: f64,
) -> Result<Option<AlgebraicElement>, CoincidenceError> {
    let beta = xi_module.beta();
    let scale = beta.powi(m as i32);
    if xi_module.radius() < r {
        return Err(CoincidenceError::PatchTooSmall { needed: r, have: xi_module.radius() });
    }
    let window: Vec<(&AlgebraicElement, f64)> = xi_module
        .points()
        .iter()
        .zip(xi_module.keys())
        .filter(|(_, k)| k.abs() <= r)
        .map(|(p, &k)| (p, k))
        .collect();
    for (x, kx) in &window {
        for (y, ky) in &window {
            if (scale * (kx - ky)).abs() > xi_module.radius() {
                continue;
            }
            let mut d = x.sub(y);
            for _ in 0..m {
                d = d.mul_beta();
            }
            if !xi_module.contains(&d) {
                return Ok(Some(d));
            }
        }
    }
    Ok(None)
}

/// Smallest `K <= k_max` with `beta^K x` a return vector for every
/// enumerated point `x` of `E_delta` inside the physical window.
pub fn find_k_for_e_delta<T: Scalar>(
    e_delta_points: &[AlgebraicElement],
    xi_module: &ReturnModule,
    cps: &CpsContext<T>,
    k_max: u32,
    radius: f64,
) -> Result<u32, CoincidenceError> {
    let beta = xi_module.beta();
    if beta.powi(k_max as i32) * radius > xi_module.radius() {
        return Err(CoincidenceError::PatchTooSmall {
            needed: beta.powi(k_max as i32) * radius,
            have: xi_module.radius(),
        });
    }
    let _ = cps;
    let mut scaled: Vec<AlgebraicElement> = e_delta_points.to_vec();
    for k in 0..=k_max {
        if scaled.iter().all(|x| xi_module.contains(x)) {
            return Ok(k);
        }
        for s in scaled.iter_mut() {
            *s = s.mul_beta();
        }
    }
    Err(CoincidenceError::NotFound { bound: k_max })
}

/// Smallest `l <= ell_max` with `beta^l y` a return vector.
pub fn lattice_to_xi_exponent(
    y: &AlgebraicElement,
    xi_module: &ReturnModule,
    ell_max: u32,
) -> Result<u32, CoincidenceError> {
    let beta = xi_module.beta();
    let mut v = y.clone();
    for l in 0..=ell_max {
        let val = v.eval_real(beta).abs();
        if val > xi_module.radius() {
            return Err(CoincidenceError::PatchTooSmall { needed: val, have: xi_module.radius() });
        }
        if xi_module.contains(&v) {
            return Ok(l);
        }
        v = v.mul_beta();
    }
    Err(CoincidenceError::NotFound { bound: ell_max })
}

/// Default delta: the smallest empirical ball containing `Psi(Xi)`, with
/// five percent headroom.
pub fn delta_star<T: Scalar>(cps: &CpsContext<T>, xi_module: &ReturnModule) -> T {
    let mut max = T::zero();
    for p in xi_module.points() {
        max = max.max(norm(&cps.star(p)));
    }
    max * T::from_f64_lossy(1.05)
}

/// Letters of control points found at each exact coefficient vector;
/// exposed for the verification stage.
pub fn membership_table(patch: &PatchPointSet) -> HashMap<Vec<BigInt>, usize> {
    patch.membership()
}
