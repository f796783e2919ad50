//! Exact arithmetic in Q(beta) on the power basis `1, beta, ..., beta^(n-1)`.
//!
//! Elements carry an integer coefficient vector with one shared positive
//! denominator; products reduce modulo the minimal polynomial. Nothing here
//! ever rounds: the point sets downstream are compared coefficient-wise.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::IntPolynomial;
use super::AlgebraError;
use crate::scalar::Scalar;

/// The field Q(beta) for a fixed monic squarefree minimal polynomial.
///
/// Cheap to clone behind an [`Arc`]; every element holds a handle to its
/// context so mixed-field arithmetic is caught at the boundary.
#[derive(Debug)]
pub struct FieldContext {
    min_poly: IntPolynomial,
    degree: usize,
    unimodular: bool,
    /// `x^(n+k) mod p` for `k = 0 .. n-2`, integer vectors of length n.
    reduction: Vec<Vec<BigInt>>,
}

pub type FieldRef = Arc<FieldContext>;

/// Builds the arithmetic context for Q(beta), `p` the minimal polynomial of beta.
pub fn field_from_min_poly(p: IntPolynomial) -> Result<FieldRef, AlgebraError> {
    if !p.is_monic() {
        return Err(AlgebraError::NonMonic { poly: p.to_string() });
    }
    if !p.is_squarefree() {
        return Err(AlgebraError::NotSquarefree { poly: p.to_string() });
    }
    let n = p.degree().unwrap();
    let unimodular = p.constant_term().abs().is_one();
    // x^n = -(c_0 + c_1 x + ... + c_{n-1} x^{n-1});
    // each further power is shift-then-reduce.
    let base: Vec<BigInt> = (0..n).map(|k| -p.coeff(k)).collect();
    let mut reduction = vec![base.clone()];
    for _ in 1..n.saturating_sub(1) {
        let prev = reduction.last().unwrap();
        let top = prev[n - 1].clone();
        let mut next = vec![BigInt::zero(); n];
        for k in 1..n {
            next[k] = prev[k - 1].clone();
        }
        for k in 0..n {
            let add = &top * &base[k];
            next[k] += add;
        }
        reduction.push(next);
    }
    Ok(Arc::new(FieldContext {
        min_poly: p,
        degree: n,
        unimodular,
        reduction,
    }))
}

impl FieldContext {
    pub fn min_poly(&self) -> &IntPolynomial {
        &self.min_poly
    }

    /// Field degree n = deg p.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// True when |p(0)| = 1, i.e. beta is an algebraic unit.
    pub fn is_unimodular(&self) -> bool {
        self.unimodular
    }

    fn same_field(&self, other: &FieldContext) -> bool {
        std::ptr::eq(self, other) || self.min_poly == other.min_poly
    }
}

/// An element of Q(beta): `(num[0] + num[1] beta + ...) / den`, den > 0,
/// with gcd(gcd(num), den) = 1 after normalization.
#[derive(Clone)]
pub struct AlgebraicElement {
    ctx: FieldRef,
    num: Vec<BigInt>,
    den: BigInt,
}

impl std::fmt::Debug for AlgebraicElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.num.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")?;
        if !self.den.is_one() {
            write!(f, "/{}", self.den)?;
        }
        Ok(())
    }
}

impl PartialEq for AlgebraicElement {
    fn eq(&self, other: &Self) -> bool {
        debug_assert!(self.ctx.same_field(&other.ctx));
        self.num == other.num && self.den == other.den
    }
}
impl Eq for AlgebraicElement {}

impl std::hash::Hash for AlgebraicElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl AlgebraicElement {
    fn normalized(ctx: FieldRef, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        debug_assert_eq!(num.len(), ctx.degree);
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -std::mem::take(c);
            }
        }
        let mut g = den.clone();
        for c in &num {
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            den /= &g;
            for c in num.iter_mut() {
                *c = &*c / &g;
            }
        }
        if num.iter().all(|c| c.is_zero()) {
            den = BigInt::one();
        }
        AlgebraicElement { ctx, num, den }
    }

    pub fn zero(ctx: &FieldRef) -> Self {
        AlgebraicElement {
            ctx: ctx.clone(),
            num: vec![BigInt::zero(); ctx.degree],
            den: BigInt::one(),
        }
    }

    pub fn one(ctx: &FieldRef) -> Self {
        Self::from_int(ctx, BigInt::one())
    }

    pub fn beta(ctx: &FieldRef) -> Self {
        let mut num = vec![BigInt::zero(); ctx.degree];
        if ctx.degree >= 2 {
            num[1] = BigInt::one();
            AlgebraicElement { ctx: ctx.clone(), num, den: BigInt::one() }
        } else {
            // Degree one: beta is the rational root itself.
            num[0] = -ctx.min_poly.coeff(0);
            AlgebraicElement { ctx: ctx.clone(), num, den: BigInt::one() }
        }
    }

    pub fn from_int(ctx: &FieldRef, v: BigInt) -> Self {
        let mut num = vec![BigInt::zero(); ctx.degree];
        num[0] = v;
        AlgebraicElement { ctx: ctx.clone(), num, den: BigInt::one() }
    }

    pub fn from_coeffs(ctx: &FieldRef, coeffs: Vec<BigInt>) -> Self {
        assert_eq!(coeffs.len(), ctx.degree, "coefficient vector length");
        Self::normalized(ctx.clone(), coeffs, BigInt::one())
    }

    pub fn from_rational_coeffs(ctx: &FieldRef, coeffs: &[BigRational]) -> Self {
        assert_eq!(coeffs.len(), ctx.degree, "coefficient vector length");
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let num = coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        Self::normalized(ctx.clone(), num, den)
    }

    pub fn context(&self) -> &FieldRef {
        &self.ctx
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// True when the element lies in `Z[beta]`.
    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Integer coefficient vector, for hashing into point-set tables.
    /// Panics when the element is not integral.
    pub fn integer_coeffs(&self) -> &[BigInt] {
        assert!(self.is_integral(), "element has a nontrivial denominator");
        &self.num
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn coeff_rational(&self, k: usize) -> BigRational {
        BigRational::new(self.num[k].clone(), self.den.clone())
    }

    pub fn neg(&self) -> Self {
        AlgebraicElement {
            ctx: self.ctx.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.ctx.same_field(&other.ctx), "field context mismatch");
        let den = self.den.lcm(&other.den);
        let fa = &den / &self.den;
        let fb = &den / &other.den;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a * &fa + b * &fb)
            .collect();
        Self::normalized(self.ctx.clone(), num, den)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exact product, reduced modulo the minimal polynomial.
    pub fn mul(&self, other: &Self) -> Self {
        assert!(self.ctx.same_field(&other.ctx), "field context mismatch");
        let n = self.ctx.degree;
        let mut conv = vec![BigInt::zero(); 2 * n - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                conv[i + j] += a * b;
            }
        }
        let mut num: Vec<BigInt> = conv[..n].to_vec();
        for k in n..2 * n - 1 {
            if conv[k].is_zero() {
                continue;
            }
            let row = &self.ctx.reduction[k - n];
            for (t, r) in row.iter().enumerate() {
                let add = &conv[k] * r;
                num[t] += add;
            }
        }
        Self::normalized(self.ctx.clone(), num, &self.den * &other.den)
    }

    /// Spec-facing product with an explicit context check.
    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        if !self.ctx.same_field(&other.ctx) {
            return Err(AlgebraError::ContextMismatch);
        }
        Ok(self.mul(other))
    }

    /// Fast multiplication by beta (shift and reduce the top coefficient).
    pub fn mul_beta(&self) -> Self {
        let n = self.ctx.degree;
        if n == 1 {
            return self.mul(&Self::beta(&self.ctx));
        }
        let top = self.num[n - 1].clone();
        let mut num = vec![BigInt::zero(); n];
        for k in 1..n {
            num[k] = self.num[k - 1].clone();
        }
        if !top.is_zero() {
            let row = &self.ctx.reduction[0];
            for (t, r) in row.iter().enumerate() {
                let add = &top * r;
                num[t] += add;
            }
        }
        Self::normalized(self.ctx.clone(), num, self.den.clone())
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        let num = self.num.iter().map(|c| c * k).collect();
        Self::normalized(self.ctx.clone(), num, self.den.clone())
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in `Q[x]`.
    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::NotInvertible);
        }
        let a: Vec<BigRational> = self.num.iter().map(|c| BigRational::new(c.clone(), self.den.clone())).collect();
        let p: Vec<BigRational> = self
            .ctx
            .min_poly
            .coeffs()
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let (g, s) = rat_poly_half_gcd(&a, &p);
        if g.len() != 1 {
            return Err(AlgebraError::NotInvertible);
        }
        let ginv = BigRational::one() / g[0].clone();
        let mut coeffs = vec![BigRational::zero(); self.ctx.degree];
        for (k, c) in s.iter().enumerate() {
            if k < coeffs.len() {
                coeffs[k] = c * &ginv;
            }
        }
        Ok(Self::from_rational_coeffs(&self.ctx, &coeffs))
    }

    /// Evaluates the element at a numeric root of the minimal polynomial.
    pub fn eval_at<T: Scalar>(&self, root: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for c in self.num.iter().rev() {
            acc = acc * root + Complex::new(T::from_bigint(c), T::zero());
        }
        acc / Complex::new(T::from_bigint(&self.den), T::zero())
    }

    pub fn eval_real<T: Scalar>(&self, root: T) -> T {
        let mut acc = T::zero();
        for c in self.num.iter().rev() {
            acc = acc * root + T::from_bigint(c);
        }
        acc / T::from_bigint(&self.den)
    }
}

/// Computes beta^(-1); an integer element exactly when beta is a unit.
pub fn inverse_of_beta(ctx: &FieldRef) -> Result<AlgebraicElement, AlgebraError> {
    if !ctx.is_unimodular() {
        return Err(AlgebraError::NotUnimodular {
            constant_term: ctx.min_poly().constant_term().to_string(),
        });
    }
    // p(beta) = 0  =>  beta * (c_1 + c_2 beta + ... + beta^(n-1)) = -c_0
    let n = ctx.degree();
    let c0 = ctx.min_poly().coeff(0);
    let mut num = vec![BigInt::zero(); n];
    for k in 0..n {
        let c = if k + 1 == n { BigInt::one() } else { ctx.min_poly().coeff(k + 1) };
        num[k] = -c / &c0; // c0 = +-1, division exact
    }
    Ok(AlgebraicElement::from_coeffs(ctx, num))
}

/// Extended Euclid over Q[x]: returns `(g, s)` with `s*a = g (mod m)`.
fn rat_poly_half_gcd(a: &[BigRational], m: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let trim = |mut v: Vec<BigRational>| {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        v
    };
    let mut r0 = trim(m.to_vec());
    let mut r1 = trim(a.to_vec());
    let mut s0: Vec<BigRational> = vec![];
    let mut s1: Vec<BigRational> = vec![BigRational::one()];
    while !r1.is_empty() {
        let (q, r) = rat_poly_div(&r0, &r1);
        let s_next = trim(rat_poly_sub(&s0, &rat_poly_mul(&q, &s1)));
        r0 = r1;
        r1 = trim(r);
        s0 = s1;
        s1 = s_next;
    }
    (r0, s0)
}

fn rat_poly_div(n: &[BigRational], d: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = n.to_vec();
    if n.len() < d.len() {
        return (vec![], rem);
    }
    let mut q = vec![BigRational::zero(); n.len() - d.len() + 1];
    let lead = d.last().unwrap().clone();
    for k in (0..q.len()).rev() {
        let c = &rem[k + d.len() - 1] / &lead;
        q[k] = c.clone();
        for (j, dc) in d.iter().enumerate() {
            let delta = &c * dc;
            rem[k + j] -= delta;
        }
    }
    (q, rem)
}

fn rat_poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn rat_poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(k).cloned().unwrap_or_else(BigRational::zero);
            x - y
        })
        .collect()
}
