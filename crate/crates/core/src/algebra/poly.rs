//! Integer polynomials: the minimal polynomial of the expansion and the
//! characteristic polynomial of the substitution matrix live here.
//!
//! Coefficients are arbitrary-precision and stored constant term first.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::Scalar;
use super::AlgebraError;

/// A polynomial over the integers, constant term first.
///
/// The zero polynomial has an empty coefficient vector; otherwise the
/// leading coefficient is nonzero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl std::fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IntPolynomial({})", self)
    }
}

impl std::fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}")?;
                    }
                    if k == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    /// Constant term (zero for the zero polynomial).
    pub fn constant_term(&self) -> BigInt {
        self.coeff(0)
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    pub fn eval_complex<T: Scalar>(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc * z + Complex::new(T::from_bigint(c), T::zero());
        }
        acc
    }

    pub fn eval_real<T: Scalar>(&self, x: T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + T::from_bigint(c);
        }
        acc
    }

    pub fn derivative(&self) -> IntPolynomial {
        if self.coeffs.len() <= 1 {
            return IntPolynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigInt::from(k))
            .collect();
        IntPolynomial::new(coeffs)
    }

    /// gcd of the coefficients; zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    /// Divides out the content and normalizes the leading coefficient to be positive.
    pub fn primitive_part(&self) -> IntPolynomial {
        if self.is_zero() {
            return IntPolynomial::zero();
        }
        let mut g = self.content();
        if self.leading().unwrap().is_negative() {
            g = -g;
        }
        IntPolynomial::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || other.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }

    fn scale(&self, k: &BigInt) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    fn sub(&self, other: &IntPolynomial) -> IntPolynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) - other.coeff(k)).collect();
        IntPolynomial::new(coeffs)
    }

    /// Pseudo-remainder of `lc(d)^(deg n - deg d + 1) * n` by `d`.
    fn pseudo_rem(&self, d: &IntPolynomial) -> IntPolynomial {
        let dd = d.degree().expect("division by zero polynomial");
        let lc = d.leading().unwrap().clone();
        let mut r = self.clone();
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            let r_lead = r.leading().unwrap().clone();
            // r <- lc * r - r_lead * x^shift * d
            let mut shifted = vec![BigInt::zero(); shift];
            shifted.extend(d.coeffs.iter().map(|c| c * &r_lead));
            r = r.scale(&lc).sub(&IntPolynomial::new(shifted));
        }
        r
    }

    /// Exact quotient over the rationals, when the remainder is zero and the
    /// quotient has integer coefficients.
    pub fn div_exact(&self, d: &IntPolynomial) -> Option<IntPolynomial> {
        let dd = d.degree()?;
        if self.is_zero() {
            return Some(IntPolynomial::zero());
        }
        let nd = self.degree().unwrap();
        if nd < dd {
            return None;
        }
        let lc = BigRational::from_integer(d.leading().unwrap().clone());
        let mut rem: Vec<BigRational> = self
            .coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let mut quot = vec![BigRational::zero(); nd - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dd] / &lc;
            quot[k] = q.clone();
            for (j, c) in d.coeffs.iter().enumerate() {
                let delta = &q * BigRational::from_integer(c.clone());
                rem[k + j] -= delta;
            }
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        let mut out = Vec::with_capacity(quot.len());
        for q in quot {
            if !q.is_integer() {
                return None;
            }
            out.push(q.to_integer());
        }
        Some(IntPolynomial::new(out))
    }

    /// Primitive gcd via the pseudo-remainder sequence; result has positive
    /// leading coefficient.
    pub fn gcd(&self, other: &IntPolynomial) -> IntPolynomial {
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_part();
            a = b;
            b = r;
        }
        a.primitive_part()
    }

    /// `gcd(p, p')` is constant exactly for squarefree polynomials.
    pub fn is_squarefree(&self) -> bool {
        match self.degree() {
            None | Some(0) => false,
            Some(1) => true,
            _ => self.gcd(&self.derivative()).degree() == Some(0),
        }
    }

    /// `p / gcd(p, p')`, primitive with positive leading coefficient.
    pub fn squarefree_part(&self) -> IntPolynomial {
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.primitive_part();
        }
        self.div_by_gcd(&g)
    }

    fn div_by_gcd(&self, g: &IntPolynomial) -> IntPolynomial {
        // self = g * q over Q; clear denominators and take the primitive part.
        let dd = g.degree().unwrap();
        let nd = self.degree().unwrap();
        let lc = BigRational::from_integer(g.leading().unwrap().clone());
        let mut rem: Vec<BigRational> = self
            .coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let mut quot = vec![BigRational::zero(); nd - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dd] / &lc;
            quot[k] = q.clone();
            for (j, c) in g.coeffs.iter().enumerate() {
                let delta = &q * BigRational::from_integer(c.clone());
                rem[k + j] -= delta;
            }
        }
        let mut den = BigInt::one();
        for q in &quot {
            den = den.lcm(q.denom());
        }
        let ints: Vec<BigInt> = quot
            .iter()
            .map(|q| (q * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        IntPolynomial::new(ints).primitive_part()
    }

    /// Characteristic polynomial `det(xI - A)` of a square integer matrix,
    /// by the Faddeev–LeVerrier recurrence (all divisions exact).
    pub fn char_poly(matrix: &[Vec<BigInt>]) -> IntPolynomial {
        let n = matrix.len();
        assert!(matrix.iter().all(|row| row.len() == n), "square matrix required");
        if n == 0 {
            return IntPolynomial::new(vec![BigInt::one()]);
        }
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut m = vec![vec![BigInt::zero(); n]; n]; // M_0 = 0
        for k in 1..=n {
            // M_k = A * M_{k-1} + c_{n-k+1} * I
            let mut next = mat_mul(matrix, &m);
            for i in 0..n {
                next[i][i] += &coeffs[n - k + 1];
            }
            m = next;
            // c_{n-k} = -tr(A * M_k) / k
            let am = mat_mul(matrix, &m);
            let tr: BigInt = (0..n).map(|i| am[i][i].clone()).sum();
            let k_big = BigInt::from(k);
            debug_assert!((&tr % &k_big).is_zero());
            coeffs[n - k] = -tr / k_big;
        }
        IntPolynomial::new(coeffs)
    }

    /// Integer roots (each returned once; input should be squarefree).
    pub fn integer_roots(&self) -> Vec<BigInt> {
        let mut out = vec![];
        if self.is_zero() {
            return out;
        }
        if self.constant_term().is_zero() {
            out.push(BigInt::zero());
        }
        let c0 = self.constant_term();
        if !c0.is_zero() {
            for d in divisors(&c0.abs()) {
                for cand in [d.clone(), -d] {
                    if self.eval_int(&cand).is_zero() {
                        out.push(cand);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Full factorization into irreducible primitive factors, Kronecker's
    /// method. Desk scale only: degree is capped at 10.
    pub fn factor(&self) -> Result<Vec<IntPolynomial>, AlgebraError> {
        let deg = self.degree().ok_or(AlgebraError::ZeroPolynomial)?;
        if deg > 10 {
            return Err(AlgebraError::FactorDegreeLimit { degree: deg });
        }
        let mut pending = vec![self.primitive_part()];
        let mut out = vec![];
        while let Some(p) = pending.pop() {
            match kronecker_split(&p)? {
                Some((g, h)) => {
                    pending.push(g);
                    pending.push(h);
                }
                None => out.push(p),
            }
        }
        out.sort_by_key(|p| (p.degree(), p.coeffs.clone()));
        Ok(out)
    }
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                let prod = &a[i][k] * &b[k][j];
                out[i][j] += prod;
            }
        }
    }
    out
}

fn divisors(v: &BigInt) -> Vec<BigInt> {
    // Trial division; the values at small sample points stay desk-sized.
    let mut out = vec![];
    let mut d = BigInt::one();
    loop {
        let d_sq = &d * &d;
        if &d_sq > v {
            break;
        }
        if (v % &d).is_zero() {
            out.push(d.clone());
            let q = v / &d;
            if q != d {
                out.push(q);
            }
        }
        d += 1;
    }
    out.sort();
    out
}

const KRONECKER_TUPLE_BUDGET: usize = 500_000;

/// One splitting step: returns a proper factorization `p = g * h` if any
/// factor of degree <= deg(p)/2 exists, `None` when `p` is irreducible.
fn kronecker_split(p: &IntPolynomial) -> Result<Option<(IntPolynomial, IntPolynomial)>, AlgebraError> {
    let deg = p.degree().unwrap();
    if deg <= 1 {
        return Ok(None);
    }
    // Linear factors first, via integer roots of the primitive polynomial
    // divided by divisors of the leading coefficient (we only need monic-ish
    // splits here; rational roots a/b give the factor bx - a).
    if let Some(split) = linear_split(p) {
        return Ok(Some(split));
    }
    let half = deg / 2;
    for k in 2..=half {
        // Sample points 0, 1, -1, 2, -2, ...
        let mut points = vec![];
        let mut values = vec![];
        let mut i = 0i64;
        while points.len() < k + 1 {
            let x = BigInt::from(if i == 0 { 0 } else if i % 2 == 1 { (i + 1) / 2 } else { -(i / 2) });
            i += 1;
            let v = p.eval_int(&x);
            debug_assert!(!v.is_zero(), "linear factors were removed above");
            points.push(x);
            values.push(v);
        }
        let divisor_lists: Vec<Vec<BigInt>> = values
            .iter()
            .map(|v| {
                let mut ds = divisors(&v.abs());
                let negs: Vec<BigInt> = ds.iter().map(|d| -d).collect();
                ds.extend(negs);
                ds
            })
            .collect();
        let mut total: usize = 1;
        for l in &divisor_lists {
            total = total.saturating_mul(l.len());
        }
        // First coordinate sign is fixed (g and -g divide together).
        let total = total / 2;
        if total > KRONECKER_TUPLE_BUDGET {
            return Err(AlgebraError::FactorBudget);
        }
        let mut idx = vec![0usize; k + 1];
        loop {
            let tuple: Vec<&BigInt> = idx.iter().enumerate().map(|(j, &i)| &divisor_lists[j][i]).collect();
            if tuple[0].is_positive() {
                if let Some(g) = interpolate_integer(&points, &tuple, k) {
                    if g.degree() == Some(k) {
                        if let Some(h) = p.div_exact(&g) {
                            return Ok(Some((g.primitive_part(), h.primitive_part())));
                        }
                    }
                }
            }
            // Advance the odometer.
            let mut pos = 0;
            loop {
                idx[pos] += 1;
                if idx[pos] < divisor_lists[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
                if pos > k {
                    break;
                }
            }
            if pos > k {
                break;
            }
        }
    }
    Ok(None)
}

fn linear_split(p: &IntPolynomial) -> Option<(IntPolynomial, IntPolynomial)> {
    // Rational roots a/b with b | lc and a | c0; roots with c0 = 0 give x.
    if p.constant_term().is_zero() {
        let g = IntPolynomial::from_i64(&[0, 1]);
        let h = p.div_exact(&g)?;
        return Some((g, h));
    }
    let lead_divs = divisors(&p.leading().unwrap().abs());
    let const_divs = divisors(&p.constant_term().abs());
    for b in &lead_divs {
        for a in &const_divs {
            for a_signed in [a.clone(), -a.clone()] {
                // candidate factor b*x - a
                let g = IntPolynomial::new(vec![-a_signed.clone(), b.clone()]).primitive_part();
                if let Some(h) = p.div_exact(&g) {
                    return Some((g, h.primitive_part()));
                }
            }
        }
    }
    None
}

fn interpolate_integer(points: &[BigInt], values: &[&BigInt], max_deg: usize) -> Option<IntPolynomial> {
    // Lagrange interpolation over Q, then an integrality check.
    let n = points.len();
    let mut acc = vec![BigRational::zero(); n];
    for i in 0..n {
        // Basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j), scaled by values[i].
        let mut numer = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let xj = BigRational::from_integer(points[j].clone());
            // numer *= (x - x_j)
            let mut next = vec![BigRational::zero(); numer.len() + 1];
            for (k, c) in numer.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xj;
            }
            numer = next;
            denom *= BigRational::from_integer(&points[i] - &points[j]);
        }
        let w = BigRational::from_integer((*values[i]).clone()) / denom;
        for (k, c) in numer.iter().enumerate() {
            acc[k] += c * &w;
        }
    }
    while acc.last().is_some_and(|c| c.is_zero()) {
        acc.pop();
    }
    if acc.len() > max_deg + 1 {
        return None;
    }
    let mut out = Vec::with_capacity(acc.len());
    for c in acc {
        if !c.is_integer() {
            return None;
        }
        out.push(c.to_integer());
    }
    Some(IntPolynomial::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(coeffs)
    }

    #[test]
    fn char_poly_of_known_matrices() {
        let fib = vec![
            vec![BigInt::from(1), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(0)],
        ];
        assert_eq!(IntPolynomial::char_poly(&fib), p(&[-1, -1, 1]));

        let ex = vec![
            vec![BigInt::from(2), BigInt::from(2)],
            vec![BigInt::from(1), BigInt::from(2)],
        ];
        assert_eq!(IntPolynomial::char_poly(&ex), p(&[2, -4, 1]));

        let trib = vec![
            vec![BigInt::from(1), BigInt::from(1), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1), BigInt::from(0)],
        ];
        assert_eq!(IntPolynomial::char_poly(&trib), p(&[-1, -1, -1, 1]));
    }

    #[test]
    fn squarefree_detection() {
        assert!(p(&[-1, -1, 1]).is_squarefree());
        assert!(!p(&[1, -2, 1]).is_squarefree()); // (x-1)^2
        assert_eq!(p(&[1, -2, 1]).squarefree_part(), p(&[-1, 1]));
        // (x-1)^2 (x-3) -> (x-1)(x-3) = x^2 - 4x + 3
        let q = p(&[1, -2, 1]).mul(&p(&[-3, 1]));
        assert_eq!(q.squarefree_part(), p(&[3, -4, 1]));
    }

    #[test]
    fn gcd_and_division() {
        let a = p(&[-1, -1, 1]).mul(&p(&[-2, 1]));
        assert_eq!(a.gcd(&p(&[-2, 1])), p(&[-2, 1]));
        assert_eq!(a.div_exact(&p(&[-2, 1])).unwrap(), p(&[-1, -1, 1]));
        assert!(p(&[-1, -1, 1]).div_exact(&p(&[-2, 1])).is_none());
    }

    #[test]
    fn factor_splits_off_perron_factor() {
        // x(x-2), the Thue-Morse characteristic polynomial
        let q = p(&[0, -2, 1]);
        let fs = q.factor().unwrap();
        assert_eq!(fs.len(), 2);
        assert!(fs.contains(&p(&[0, 1])));
        assert!(fs.contains(&p(&[-2, 1])));

        // (x-2)(x^2-x-1)
        let q = p(&[-2, 1]).mul(&p(&[-1, -1, 1]));
        let fs = q.factor().unwrap();
        assert!(fs.contains(&p(&[-2, 1])));
        assert!(fs.contains(&p(&[-1, -1, 1])));

        // irreducible cubic stays whole
        let fs = p(&[-1, -1, -1, 1]).factor().unwrap();
        assert_eq!(fs, vec![p(&[-1, -1, -1, 1])]);

        // a degree-4 split into two irreducible quadratics
        let q = p(&[-1, -1, 1]).mul(&p(&[2, -4, 1]));
        let fs = q.factor().unwrap();
        assert_eq!(fs.len(), 2);
        assert!(fs.contains(&p(&[-1, -1, 1])));
        assert!(fs.contains(&p(&[2, -4, 1])));
    }

    #[test]
    fn integer_roots_found() {
        let q = p(&[-2, 1]).mul(&p(&[3, 1]));
        assert_eq!(q.integer_roots(), vec![BigInt::from(-3), BigInt::from(2)]);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(p(&[-1, -1, 1]).to_string(), "x^2 - x - 1");
        assert_eq!(p(&[2, -4, 1]).to_string(), "x^2 - 4x + 2");
    }
}
