//! Numeric Galois embeddings: simultaneous root iteration, root ordering,
//! and the Pisot-family test on the non-expanding conjugates.

use num_complex::Complex;

use super::field::AlgebraicElement;
use super::poly::IntPolynomial;
use super::AlgebraError;
use crate::scalar::Scalar;

const MAX_ITERATIONS: usize = 500;

/// One stored root of the minimal polynomial. Complex-conjugate pairs keep
/// only the positive-imaginary representative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootKind {
    Real,
    ComplexPair,
}

/// The numeric roots of the minimal polynomial, with the expanding root
/// singled out.
///
/// Ordering is deterministic: real roots ascending, then one representative
/// per conjugate pair sorted by (re, im). `n = e + 2f` counts roots with
/// pairs doubled; `m` is the number of physical dimensions carried by the
/// expanding root (1 here, the expansion being a real scalar).
#[derive(Clone, Debug)]
pub struct EmbeddingData<T: Scalar> {
    roots: Vec<Complex<T>>,
    kinds: Vec<RootKind>,
    expanding_index: usize,
    e: usize,
    f: usize,
}

impl<T: Scalar> EmbeddingData<T> {
    pub fn roots(&self) -> &[Complex<T>] {
        &self.roots
    }

    pub fn kinds(&self) -> &[RootKind] {
        &self.kinds
    }

    pub fn expanding_index(&self) -> usize {
        self.expanding_index
    }

    pub fn expanding_root(&self) -> T {
        self.roots[self.expanding_index].re
    }

    /// Number of real roots.
    pub fn e(&self) -> usize {
        self.e
    }

    /// Number of complex-conjugate pairs.
    pub fn f(&self) -> usize {
        self.f
    }

    /// Degree of the minimal polynomial.
    pub fn n(&self) -> usize {
        self.e + 2 * self.f
    }

    /// Physical dimensions of the expanding block.
    pub fn m(&self) -> usize {
        1
    }

    /// Dimension of the internal space: one per non-expanding real root,
    /// two per conjugate pair.
    pub fn internal_dim(&self) -> usize {
        self.n() - self.m()
    }

    /// Non-expanding roots in storage order, with their kinds.
    pub fn non_expanding(&self) -> impl Iterator<Item = (Complex<T>, RootKind)> + '_ {
        self.roots
            .iter()
            .zip(&self.kinds)
            .enumerate()
            .filter(move |(i, _)| *i != self.expanding_index)
            .map(|(_, (z, k))| (*z, *k))
    }

    /// Evaluates an element at the chosen root.
    pub fn embed(&self, a: &AlgebraicElement, which: usize) -> Complex<T> {
        a.eval_at(self.roots[which])
    }
}

/// Galois embedding of `a` at root index `which` of `emb`.
pub fn galois_embed<T: Scalar>(a: &AlgebraicElement, emb: &EmbeddingData<T>, which: usize) -> Complex<T> {
    emb.embed(a, which)
}

/// Finds all roots of `p` by Durand-Kerner simultaneous iteration from a
/// deterministic circle of initial points.
pub fn find_roots<T: Scalar>(p: &IntPolynomial, tol: T) -> Result<EmbeddingData<T>, AlgebraError> {
    let n = p.degree().ok_or(AlgebraError::ZeroPolynomial)?;
    if n == 0 {
        return Err(AlgebraError::ZeroPolynomial);
    }
    assert!(p.is_monic(), "root finder expects a monic polynomial");

    let mut zs: Vec<Complex<T>> = Vec::with_capacity(n);
    if n == 1 {
        let c0 = T::from_bigint(&p.coeff(0));
        zs.push(Complex::new(-c0, T::zero()));
    } else {
        let max_coeff = p
            .coeffs()
            .iter()
            .map(|c| T::from_bigint(c).abs())
            .fold(T::zero(), T::max);
        let radius = T::one() + max_coeff;
        // Fixed angular offset keeps the start asymmetric about the real axis.
        let offset = T::from_f64_lossy(0.7);
        for k in 0..n {
            let theta = T::from_f64_lossy(2.0 * std::f64::consts::PI * k as f64 / n as f64) + offset;
            zs.push(Complex::new(radius * theta.cos(), radius * theta.sin()));
        }
        let mut converged = false;
        for _ in 0..MAX_ITERATIONS {
            let mut max_step = T::zero();
            for i in 0..n {
                let mut denom = Complex::new(T::one(), T::zero());
                for j in 0..n {
                    if i != j {
                        denom *= zs[i] - zs[j];
                    }
                }
                let step = p.eval_complex(zs[i]) / denom;
                zs[i] -= step;
                max_step = max_step.max(step.norm());
            }
            if max_step < tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(AlgebraError::NoConvergence { iterations: MAX_ITERATIONS });
        }
    }

    // Newton polish.
    let dp = p.derivative();
    for z in zs.iter_mut() {
        for _ in 0..3 {
            let d = dp.eval_complex(*z);
            if d.norm() > T::zero() {
                *z = *z - p.eval_complex(*z) / d;
            }
        }
    }

    // Residual gate: every root must satisfy its polynomial.
    let resid_bound = tol * T::from_f64_lossy(100.0);
    for z in &zs {
        if !(p.eval_complex(*z).norm() < resid_bound) {
            return Err(AlgebraError::NoConvergence { iterations: MAX_ITERATIONS });
        }
    }

    // Classify real roots vs conjugate pairs.
    let classify_tol = T::epsilon().sqrt();
    let mut reals: Vec<T> = vec![];
    let mut pos_imag: Vec<Complex<T>> = vec![];
    let mut neg_imag = 0usize;
    for z in &zs {
        if z.im.abs() < classify_tol * (T::one() + z.norm()) {
            reals.push(z.re);
        } else if z.im > T::zero() {
            pos_imag.push(*z);
        } else {
            neg_imag += 1;
        }
    }
    if pos_imag.len() != neg_imag || reals.len() + 2 * pos_imag.len() != n {
        return Err(AlgebraError::NoConvergence { iterations: MAX_ITERATIONS });
    }
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pos_imag.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());

    let e = reals.len();
    let f = pos_imag.len();
    let mut roots: Vec<Complex<T>> = reals.iter().map(|&r| Complex::new(r, T::zero())).collect();
    let mut kinds = vec![RootKind::Real; e];
    roots.extend(pos_imag);
    kinds.extend(std::iter::repeat_n(RootKind::ComplexPair, f));

    // The expanding root of a one-dimensional inflation is its largest real root.
    let expanding_index = match (0..e).max_by(|&a, &b| roots[a].re.partial_cmp(&roots[b].re).unwrap()) {
        Some(i) if roots[i].re > T::one() => i,
        _ => return Err(AlgebraError::NoExpandingRoot),
    };

    Ok(EmbeddingData { roots, kinds, expanding_index, e, f })
}

/// Pisot-family verdict: true when every non-expanding conjugate lies
/// strictly inside the unit circle.
#[derive(Clone, Copy, Debug)]
pub struct PisotVerdict<T> {
    pub pisot_family: bool,
    /// `1 - max |non-expanding conjugate|`; positive margins certify.
    pub margin: T,
}

pub fn pisot_family_check<T: Scalar>(emb: &EmbeddingData<T>, tol: T) -> Result<PisotVerdict<T>, AlgebraError> {
    let mut max_mod = T::zero();
    for (z, _) in emb.non_expanding() {
        max_mod = max_mod.max(z.norm());
    }
    let margin = T::one() - max_mod;
    if margin.abs() < tol {
        return Err(AlgebraError::Inconclusive {
            modulus: max_mod.to_f64_lossy(),
        });
    }
    Ok(PisotVerdict { pisot_family: margin > T::zero(), margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{field_from_min_poly, AlgebraicElement};
    use approx::assert_relative_eq;
    use num_bigint::BigInt;

    fn poly(coeffs: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(coeffs)
    }

    // Independent oracle: roots of x^2 + bx + c by the quadratic formula.
    fn quadratic_oracle(b: f64, c: f64) -> (f64, f64) {
        let disc = (b * b - 4.0 * c).sqrt();
        ((-b + disc) / 2.0, (-b - disc) / 2.0)
    }

    // Independent oracle: the real root of a cubic by bisection.
    fn bisect_root(p: &IntPolynomial, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p.eval_real(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn golden_ratio_roots() {
        let (hi, lo) = quadratic_oracle(-1.0, -1.0);
        let emb = find_roots::<f64>(&poly(&[-1, -1, 1]), 1e-13).unwrap();
        assert_eq!(emb.n(), 2);
        assert_eq!(emb.e(), 2);
        assert_eq!(emb.f(), 0);
        assert_relative_eq!(emb.roots()[0].re, lo, max_relative = 1e-12);
        assert_relative_eq!(emb.roots()[1].re, hi, max_relative = 1e-12);
        assert_eq!(emb.expanding_index(), 1);
        assert_relative_eq!(emb.expanding_root(), 1.6180339887498949, epsilon = 1e-12);
    }

    #[test]
    fn sqrt2_shift_roots() {
        let (hi, lo) = quadratic_oracle(-4.0, 2.0);
        let emb = find_roots::<f64>(&poly(&[2, -4, 1]), 1e-13).unwrap();
        assert_relative_eq!(emb.roots()[1].re, hi, max_relative = 1e-12);
        assert_relative_eq!(emb.roots()[0].re, lo, max_relative = 1e-12);
        assert_relative_eq!(emb.expanding_root(), 3.414213562373095, epsilon = 1e-12);
    }

    #[test]
    fn tribonacci_roots() {
        let p = poly(&[-1, -1, -1, 1]);
        let real = bisect_root(&p, 1.0, 2.0);
        let emb = find_roots::<f64>(&p, 1e-13).unwrap();
        assert_eq!((emb.e(), emb.f()), (1, 1));
        assert_eq!(emb.internal_dim(), 2);
        assert_relative_eq!(emb.expanding_root(), real, epsilon = 1e-12);
        assert_relative_eq!(emb.expanding_root(), 1.8392867552141612, epsilon = 1e-11);
        // |pair|^2 = |p(0)| / realroot for a monic cubic with one real root
        let pair = emb.roots()[1];
        assert_relative_eq!(pair.norm(), (1.0 / real).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(pair.norm(), 0.7373527057603281, epsilon = 1e-10);
        assert!(pair.im > 0.0);
    }

    #[test]
    fn residuals_below_tolerance() {
        for coeffs in [&[-1i64, -1, 1][..], &[2, -4, 1], &[-1, -1, -1, 1], &[-1, 0, 0, -1, 1]] {
            let p = poly(coeffs);
            let emb = find_roots::<f64>(&p, 1e-13).unwrap();
            let mut all = vec![];
            for (z, k) in emb.roots().iter().zip(emb.kinds()) {
                all.push(*z);
                if matches!(k, RootKind::ComplexPair) {
                    all.push(z.conj());
                }
            }
            assert_eq!(all.len(), p.degree().unwrap());
            for z in &all {
                assert!(p.eval_complex(*z).norm() < 1e-12, "residual too large for {p}");
            }
            // product of all roots = (-1)^n p(0)
            let prod: num_complex::Complex<f64> = all.iter().product();
            let sign = if p.degree().unwrap() % 2 == 0 { 1.0 } else { -1.0 };
            let expected = sign * p.coeff(0).to_string().parse::<f64>().unwrap();
            assert_relative_eq!(prod.re, expected, epsilon = 1e-9);
            assert!(prod.im.abs() < 1e-9);
        }
    }

    #[test]
    fn pisot_margins() {
        let emb = find_roots::<f64>(&poly(&[-1, -1, 1]), 1e-13).unwrap();
        let v = pisot_family_check(&emb, 1e-9).unwrap();
        assert!(v.pisot_family);
        assert_relative_eq!(v.margin, 0.3819660112501051, epsilon = 1e-9);

        let emb = find_roots::<f64>(&poly(&[-1, -1, -1, 1]), 1e-13).unwrap();
        let v = pisot_family_check(&emb, 1e-9).unwrap();
        assert!(v.pisot_family);
        assert_relative_eq!(v.margin, 1.0 - 0.7373527057603281, epsilon = 1e-9);

        let emb = find_roots::<f64>(&poly(&[2, -4, 1]), 1e-13).unwrap();
        assert!(pisot_family_check(&emb, 1e-9).unwrap().pisot_family);

        // x^2 - x - 3 has conjugate -1.30, not a Pisot number
        let emb = find_roots::<f64>(&poly(&[-3, -1, 1]), 1e-13).unwrap();
        let v = pisot_family_check(&emb, 1e-9).unwrap();
        assert!(!v.pisot_family);
        assert!(v.margin < 0.0);
    }

    #[test]
    fn inconclusive_near_unit_circle() {
        // x^2 - 3x + 2 = (x-1)(x-2): conjugate exactly on the unit circle
        let emb = find_roots::<f64>(&poly(&[2, -3, 1]), 1e-13).unwrap();
        assert!(matches!(
            pisot_family_check(&emb, 1e-9),
            Err(AlgebraError::Inconclusive { .. })
        ));
    }

    #[test]
    fn embedding_examples() {
        let ctx = field_from_min_poly(poly(&[2, -4, 1])).unwrap();
        let emb = find_roots::<f64>(&poly(&[2, -4, 1]), 1e-13).unwrap();
        let beta = AlgebraicElement::beta(&ctx);
        // conjugate root is index 0 (smaller real root)
        let v = galois_embed(&beta, &emb, 0);
        assert_relative_eq!(v.re, 0.5857864376269049, epsilon = 1e-10);
        // 1 + sqrt(2) = beta - 1 maps to 1 - sqrt(2)
        let a = beta.sub(&AlgebraicElement::one(&ctx));
        let v = galois_embed(&a, &emb, 0);
        assert_relative_eq!(v.re, -0.41421356237309515, epsilon = 1e-10);
        // zero maps to zero everywhere
        let z = AlgebraicElement::zero(&ctx);
        for i in 0..emb.roots().len() {
            assert_eq!(galois_embed(&z, &emb, i).norm(), 0.0);
        }
    }

    #[test]
    fn embedding_is_multiplicative() {
        let ctx = field_from_min_poly(poly(&[-1, -1, -1, 1])).unwrap();
        let emb = find_roots::<f64>(&poly(&[-1, -1, -1, 1]), 1e-13).unwrap();
        let a = AlgebraicElement::from_coeffs(&ctx, vec![3.into(), (-2).into(), 5.into()]);
        let b = AlgebraicElement::from_coeffs(&ctx, vec![BigInt::from(-7), 1.into(), 2.into()]);
        for i in 0..emb.roots().len() {
            let lhs = galois_embed(&a.mul(&b), &emb, i);
            let rhs = galois_embed(&a, &emb, i) * galois_embed(&b, &emb, i);
            assert!((lhs - rhs).norm() < 1e-9);
        }
    }

    #[test]
    fn find_roots_is_deterministic() {
        let p = poly(&[-1, -1, -1, 1]);
        let a = find_roots::<f64>(&p, 1e-13).unwrap();
        let b = find_roots::<f64>(&p, 1e-13).unwrap();
        assert_eq!(a.roots(), b.roots());
    }
}
