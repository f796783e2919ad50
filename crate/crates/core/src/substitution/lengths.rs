//! Exact tile lengths: the Perron eigenvector over Q(beta).
//!
//! Lengths must satisfy `beta * l_j = sum_i S(i,j) l_i` exactly. Either the
//! kernel of `S^T - beta I` is computed by Gaussian elimination over Q(beta),
//! or a user override is verified against the same equation. The result is
//! normalized to land in Z[beta].

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{SubMatrix, SubstitutionError, SubstitutionSpec};
use crate::algebra::{AlgebraicElement, FieldRef};
use crate::scalar::Scalar;

/// Parses a polynomial-in-beta expression such as `"beta^2 - 2*beta + 1/2"`.
pub fn parse_beta_expr(ctx: &FieldRef, text: &str) -> Result<AlgebraicElement, SubstitutionError> {
    Parser::new(ctx, text)?.parse()
}

struct Parser<'a> {
    ctx: &'a FieldRef,
    tokens: Vec<Token>,
    pos: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Int(BigInt),
    Beta,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<Token>, SubstitutionError> {
    let err = |msg: String| SubstitutionError::LengthExpr(msg);
    let mut tokens = vec![];
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => { tokens.push(Token::Plus); i += 1 }
            '-' => { tokens.push(Token::Minus); i += 1 }
            '*' => { tokens.push(Token::Star); i += 1 }
            '/' => { tokens.push(Token::Slash); i += 1 }
            '^' => { tokens.push(Token::Caret); i += 1 }
            '(' => { tokens.push(Token::LParen); i += 1 }
            ')' => { tokens.push(Token::RParen); i += 1 }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                tokens.push(Token::Int(lit.parse().unwrap()));
            }
            'b' => {
                let rest: String = chars[i..].iter().take(4).collect();
                if rest == "beta" {
                    tokens.push(Token::Beta);
                    i += 4;
                } else {
                    return Err(err(format!("unexpected symbol at '{}'", &text[i.min(text.len())..])));
                }
            }
            _ => return Err(err(format!("unexpected character '{c}'"))),
        }
    }
    Ok(tokens)
}

impl<'a> Parser<'a> {
    fn new(ctx: &'a FieldRef, text: &str) -> Result<Self, SubstitutionError> {
        Ok(Parser { ctx, tokens: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse(&mut self) -> Result<AlgebraicElement, SubstitutionError> {
        let v = self.expr()?;
        if self.pos != self.tokens.len() {
            return Err(SubstitutionError::LengthExpr("trailing input".into()));
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<AlgebraicElement, SubstitutionError> {
        let mut negate = false;
        if matches!(self.peek(), Some(Token::Minus)) {
            self.next();
            negate = true;
        } else if matches!(self.peek(), Some(Token::Plus)) {
            self.next();
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(Token::Minus) => {
                    self.next();
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<AlgebraicElement, SubstitutionError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.next();
            let f = self.factor()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<AlgebraicElement, SubstitutionError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.next();
            match self.next() {
                Some(Token::Int(k)) if !k.is_negative() => {
                    let mut acc = AlgebraicElement::one(self.ctx);
                    let mut e = k;
                    while e.is_positive() {
                        acc = acc.mul(&base);
                        e -= 1;
                    }
                    return Ok(acc);
                }
                _ => return Err(SubstitutionError::LengthExpr("exponent must be a non-negative integer".into())),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<AlgebraicElement, SubstitutionError> {
        match self.next() {
            Some(Token::Int(v)) => {
                if matches!(self.peek(), Some(Token::Slash)) {
                    self.next();
                    match self.next() {
                        Some(Token::Int(d)) if d.is_positive() => {
                            let mut coeffs = vec![BigRational::zero(); self.ctx.degree()];
                            coeffs[0] = BigRational::new(v, d);
                            Ok(AlgebraicElement::from_rational_coeffs(self.ctx, &coeffs))
                        }
                        _ => Err(SubstitutionError::LengthExpr("denominator must be a positive integer".into())),
                    }
                } else {
                    Ok(AlgebraicElement::from_int(self.ctx, v))
                }
            }
            Some(Token::Beta) => Ok(AlgebraicElement::beta(self.ctx)),
            Some(Token::LParen) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(v),
                    _ => Err(SubstitutionError::LengthExpr("missing closing parenthesis".into())),
                }
            }
            t => Err(SubstitutionError::LengthExpr(format!("unexpected token {t:?}"))),
        }
    }
}

/// Exact tile lengths for the substitution.
///
/// Without an override, computes the kernel of `S^T - beta I` over Q(beta)
/// and scales it so the lexicographically last letter has length 1 before
/// clearing denominators. An override is accepted only when it satisfies the
/// eigen-equation exactly; it is normalized into `Z[beta]` the same way.
pub fn derive_lengths<T: Scalar>(
    spec: &SubstitutionSpec,
    s: &SubMatrix<T>,
    ctx: &FieldRef,
    beta_value: T,
) -> Result<Vec<AlgebraicElement>, SubstitutionError> {
    let k = spec.kappa();
    let lengths = match spec.lengths_override() {
        Some(exprs) => {
            let mut ls = Vec::with_capacity(k);
            for e in exprs {
                ls.push(parse_beta_expr(ctx, e)?);
            }
            verify_eigen_equation(&ls, s, ctx).map_err(|reason| SubstitutionError::LengthOverride { reason })?;
            ls
        }
        None => {
            let raw = exact_kernel(s, ctx)?;
            let anchor = spec.lex_last_letter();
            if raw[anchor].is_zero() {
                return Err(SubstitutionError::NoExactEigenvector {
                    reason: "eigenvector vanishes at the normalization letter".into(),
                });
            }
            let inv = raw[anchor].inverse().map_err(SubstitutionError::Algebra)?;
            raw.iter().map(|l| l.mul(&inv)).collect()
        }
    };
    let lengths = clear_denominators(ctx, &lengths);
    for (i, l) in lengths.iter().enumerate() {
        if !(l.eval_real(beta_value) > T::zero()) {
            return Err(SubstitutionError::LengthOverride {
                reason: format!("length of letter '{}' is not positive", spec.letter(i)),
            });
        }
    }
    debug_assert!(verify_eigen_equation(&lengths, s, ctx).is_ok());
    Ok(lengths)
}

fn verify_eigen_equation<T: Scalar>(
    lengths: &[AlgebraicElement],
    s: &SubMatrix<T>,
    ctx: &FieldRef,
) -> Result<(), String> {
    for j in 0..s.kappa() {
        let lhs = lengths[j].mul_beta();
        let mut rhs = AlgebraicElement::zero(ctx);
        for i in 0..s.kappa() {
            let c = s.count(i, j);
            if c != 0 {
                rhs = rhs.add(&lengths[i].mul_int(&BigInt::from(c)));
            }
        }
        if lhs != rhs {
            return Err(format!(
                "beta * l_{j} = {lhs:?} but the rule children sum to {rhs:?}"
            ));
        }
    }
    Ok(())
}

/// Kernel of `S^T - beta I` over Q(beta) by Gaussian elimination; the Perron
/// eigenvalue of a primitive matrix is simple, so the kernel is a line.
fn exact_kernel<T: Scalar>(s: &SubMatrix<T>, ctx: &FieldRef) -> Result<Vec<AlgebraicElement>, SubstitutionError> {
    let k = s.kappa();
    let beta = AlgebraicElement::beta(ctx);
    let mut a: Vec<Vec<AlgebraicElement>> = (0..k)
        .map(|r| {
            (0..k)
                .map(|c| {
                    // (S^T)_{rc} = S(c, r)
                    let mut e = AlgebraicElement::from_int(ctx, BigInt::from(s.count(c, r)));
                    if r == c {
                        e = e.sub(&beta);
                    }
                    e
                })
                .collect()
        })
        .collect();

    let mut pivot_cols = vec![];
    let mut row = 0;
    for col in 0..k {
        let pivot = (row..k).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { continue };
        a.swap(row, p);
        let inv = a[row][col].inverse().map_err(SubstitutionError::Algebra)?;
        for c in 0..k {
            a[row][c] = a[row][c].mul(&inv);
        }
        for r in 0..k {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..k {
                    let delta = f.mul(&a[row][c]);
                    a[r][c] = a[r][c].sub(&delta);
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == k {
            break;
        }
    }

    let free: Vec<usize> = (0..k).filter(|c| !pivot_cols.contains(c)).collect();
    match free.len() {
        0 => Err(SubstitutionError::NoExactEigenvector {
            reason: "the Perron value is not a root of the minimal polynomial in use".into(),
        }),
        1 => {
            let f = free[0];
            let mut x = vec![AlgebraicElement::zero(ctx); k];
            x[f] = AlgebraicElement::one(ctx);
            for (r, &pc) in pivot_cols.iter().enumerate() {
                x[pc] = a[r][f].neg();
            }
            Ok(x)
        }
        _ => Err(SubstitutionError::NoExactEigenvector {
            reason: "Perron eigenspace is not one-dimensional".into(),
        }),
    }
}

/// Scales a positive multiple into Z[beta]: multiply by the lcm of the
/// denominators, then divide out the common content.
fn clear_denominators(ctx: &FieldRef, lengths: &[AlgebraicElement]) -> Vec<AlgebraicElement> {
    let mut d = BigInt::one();
    for l in lengths {
        d = d.lcm(l.denominator());
    }
    let scaled: Vec<AlgebraicElement> = lengths.iter().map(|l| l.mul_int(&d)).collect();
    let mut g = BigInt::zero();
    for l in &scaled {
        for c in l.numerators() {
            g = g.gcd(c);
        }
    }
    if g.is_one() || g.is_zero() {
        return scaled;
    }
    scaled
        .iter()
        .map(|l| {
            let coeffs = l.numerators().iter().map(|c| c / &g).collect();
            AlgebraicElement::from_coeffs(ctx, coeffs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{field_from_min_poly, IntPolynomial};
    use crate::substitution::{build_matrix, parse_spec};

    fn fib_ctx() -> FieldRef {
        field_from_min_poly(IntPolynomial::from_i64(&[-1, -1, 1])).unwrap()
    }

    #[test]
    fn expression_parser() {
        let ctx = fib_ctx();
        let b = AlgebraicElement::beta(&ctx);
        assert_eq!(parse_beta_expr(&ctx, "beta").unwrap(), b);
        assert_eq!(parse_beta_expr(&ctx, "beta^2").unwrap(), b.mul(&b));
        assert_eq!(
            parse_beta_expr(&ctx, "2*beta - 1").unwrap(),
            b.mul_int(&BigInt::from(2)).sub(&AlgebraicElement::one(&ctx))
        );
        assert_eq!(
            parse_beta_expr(&ctx, "(beta - 1) * beta").unwrap(),
            AlgebraicElement::one(&ctx) // beta^2 - beta = 1
        );
        let half = parse_beta_expr(&ctx, "1/2").unwrap();
        assert_eq!(half.denominator(), &BigInt::from(2));
        assert!(parse_beta_expr(&ctx, "beta +").is_err());
        assert!(parse_beta_expr(&ctx, "gamma").is_err());
    }

    #[test]
    fn fibonacci_lengths() {
        let spec = parse_spec(r#"{"format":1,"letters":["a","b"],"rules":{"a":"ab","b":"a"}}"#).unwrap();
        let s = build_matrix::<f64>(&spec, 1e-13);
        let ctx = fib_ctx();
        let ls = derive_lengths(&spec, &s, &ctx, 1.618033988749895).unwrap();
        assert_eq!(ls[0], AlgebraicElement::beta(&ctx));
        assert_eq!(ls[1], AlgebraicElement::one(&ctx));
    }

    #[test]
    fn tribonacci_lengths() {
        let spec =
            parse_spec(r#"{"format":1,"letters":["a","b","c"],"rules":{"a":"ab","b":"ac","c":"a"}}"#).unwrap();
        let s = build_matrix::<f64>(&spec, 1e-13);
        let ctx = field_from_min_poly(IntPolynomial::from_i64(&[-1, -1, -1, 1])).unwrap();
        let ls = derive_lengths(&spec, &s, &ctx, 1.8392867552141612).unwrap();
        let b = AlgebraicElement::beta(&ctx);
        // normalized so l(c) = 1: (beta, beta^2 - beta, 1)
        assert_eq!(ls[0], b);
        assert_eq!(ls[1], b.mul(&b).sub(&b));
        assert_eq!(ls[2], AlgebraicElement::one(&ctx));
    }

    #[test]
    fn override_accepted_for_sqrt2_example() {
        let spec = parse_spec(
            r#"{"format":1,"letters":["a","b"],"rules":{"a":"aab","b":"abab"},
                "lengths":{"a":"1","b":"beta - 2"}}"#,
        )
        .unwrap();
        let s = build_matrix::<f64>(&spec, 1e-13);
        let ctx = field_from_min_poly(IntPolynomial::from_i64(&[2, -4, 1])).unwrap();
        let ls = derive_lengths(&spec, &s, &ctx, 3.414213562373095).unwrap();
        assert_eq!(ls[0], AlgebraicElement::one(&ctx));
        assert_eq!(
            ls[1],
            AlgebraicElement::beta(&ctx).sub(&AlgebraicElement::from_int(&ctx, 2.into()))
        );
    }

    #[test]
    fn override_rejected_when_eigen_equation_fails() {
        let spec = parse_spec(
            r#"{"format":1,"letters":["a","b"],"rules":{"a":"ab","b":"a"},
                "lengths":{"a":"1","b":"1"}}"#,
        )
        .unwrap();
        let s = build_matrix::<f64>(&spec, 1e-13);
        let ctx = fib_ctx();
        assert!(matches!(
            derive_lengths(&spec, &s, &ctx, 1.618033988749895),
            Err(SubstitutionError::LengthOverride { .. })
        ));
    }

    #[test]
    fn kernel_absent_for_wrong_field() {
        // Fibonacci matrix over the sqrt2 field: beta there is not an eigenvalue.
        let spec = parse_spec(r#"{"format":1,"letters":["a","b"],"rules":{"a":"ab","b":"a"}}"#).unwrap();
        let s = build_matrix::<f64>(&spec, 1e-13);
        let ctx = field_from_min_poly(IntPolynomial::from_i64(&[2, -4, 1])).unwrap();
        assert!(matches!(
            derive_lengths(&spec, &s, &ctx, 3.414213562373095),
            Err(SubstitutionError::NoExactEigenvector { .. })
        ));
    }
}
