//! Muntz polynomials `sum_i c_i x^{lambda_i}` on `[0, 1]`.

mod supnorm;

pub use supnorm::{
    level_crossings, sup_norm, sup_norm_with, SupNorm, SupNormOptions, DEFAULT_SCAN_POINTS, DEFAULT_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::numeric::{compensated_sum, ExpSum};
use crate::point::PointT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponent: f64,
    pub coefficient: f64,
}

/// Finite linear combination of monomials with distinct, ascending exponents.
///
/// Zero coefficients are dropped, so the zero function has no terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Term>", into = "Vec<Term>")]
pub struct MuntzPolynomial {
    terms: Vec<Term>,
    sum: ExpSum,
}

impl PartialEq for MuntzPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl TryFrom<Vec<Term>> for MuntzPolynomial {
    type Error = MuntzError;

    fn try_from(terms: Vec<Term>) -> Result<Self> {
        MuntzPolynomial::new(terms.into_iter().map(|t| (t.exponent, t.coefficient)))
    }
}

impl From<MuntzPolynomial> for Vec<Term> {
    fn from(p: MuntzPolynomial) -> Self {
        p.terms
    }
}

impl MuntzPolynomial {
    /// Builds from `(exponent, coefficient)` pairs, merging equal exponents.
    pub fn new(terms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut raw: Vec<(f64, f64)> = terms.into_iter().collect();
        for &(e, c) in &raw {
            if !e.is_finite() || e < 0.0 {
                return Err(MuntzError::invalid(format!("exponent {e} is not a finite non-negative number")));
            }
            if !c.is_finite() {
                return Err(MuntzError::invalid(format!("coefficient {c} of x^{e} is not finite")));
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<Term> = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            let exponent = raw[i].0;
            let j = i + raw[i..].iter().take_while(|(e, _)| *e == exponent).count();
            let coefficient = compensated_sum(raw[i..j].iter().map(|(_, c)| *c));
            if coefficient != 0.0 {
                merged.push(Term { exponent, coefficient });
            }
            i = j;
        }
        Ok(Self::from_sorted(merged))
    }

    fn from_sorted(terms: Vec<Term>) -> Self {
        let sum =
            ExpSum::new(terms.iter().map(|t| t.exponent).collect(), terms.iter().map(|t| t.coefficient).collect());
        MuntzPolynomial { terms, sum }
    }

    pub fn zero() -> Self {
        Self::from_sorted(Vec::new())
    }

    pub fn monomial(exponent: f64, coefficient: f64) -> Result<Self> {
        Self::new([(exponent, coefficient)])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn exp_sum(&self) -> &ExpSum {
        &self.sum
    }

    /// `p(e^{-t})`; exact sum of coefficients at `t = 0` and constant term at `t = inf`.
    pub fn eval(&self, at: PointT) -> f64 {
        self.sum.eval(at.t()).value
    }

    pub fn eval_x(&self, x: f64) -> Result<f64> {
        Ok(self.eval(PointT::from_x(x)?))
    }

    /// Value at `x = 1`.
    pub fn coefficient_sum(&self) -> f64 {
        self.sum.anchor()
    }

    /// Value at `x = 0`.
    pub fn constant_term(&self) -> f64 {
        self.sum.limit()
    }

    pub fn max_exponent(&self) -> Option<f64> {
        self.terms.last().map(|t| t.exponent)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.terms.iter().map(|t| (t.exponent, factor * t.coefficient)))
    }

    /// `sum_i w_i p_i`, term-merged.
    pub fn linear_combination<'a>(parts: impl IntoIterator<Item = (f64, &'a MuntzPolynomial)>) -> Result<Self> {
        let terms: Vec<(f64, f64)> =
            parts.into_iter().flat_map(|(w, p)| p.terms.iter().map(move |t| (t.exponent, w * t.coefficient))).collect();
        Self::new(terms)
    }

    pub fn add(&self, other: &MuntzPolynomial) -> Result<Self> {
        Self::linear_combination([(1.0, self), (1.0, other)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn poly(terms: &[(f64, f64)]) -> MuntzPolynomial {
        MuntzPolynomial::new(terms.iter().copied()).unwrap()
    }

    #[test]
    fn merges_and_sorts() {
        let p = poly(&[(4.0, 1.0), (2.0, 1.0), (4.0, -3.0), (1.0, 0.0)]);
        assert_eq!(p.terms(), &[Term { exponent: 2.0, coefficient: 1.0 }, Term { exponent: 4.0, coefficient: -2.0 }]);
        assert!(poly(&[(3.0, 1.0), (3.0, -1.0)]).is_zero());
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(MuntzPolynomial::new([(-1.0, 1.0)]).is_err());
        assert!(MuntzPolynomial::new([(1.0, f64::NAN)]).is_err());
        assert!(MuntzPolynomial::new([(f64::INFINITY, 1.0)]).is_err());
    }

    #[test]
    fn eval_examples() {
        let p = poly(&[(2.0, 1.0), (4.0, -1.0)]);
        assert_eq!(p.eval(PointT::new(LN_2).unwrap()), 0.1875);

        let big = poly(&[(1e6, 1.0), (2e6, -1.0)]);
        let v = big.eval(PointT::new(LN_2 / 1e6).unwrap());
        assert!((v - 0.25).abs() < 1e-12, "{v}");
    }

    #[test]
    fn endpoint_values() {
        let p = poly(&[(0.0, 0.3), (1.5, -2.0), (7.0, 0.25)]);
        assert_eq!(p.eval(PointT::ONE), 0.3 - 2.0 + 0.25);
        assert_eq!(p.coefficient_sum(), p.eval(PointT::ONE));
        assert_eq!(p.eval(PointT::ZERO), 0.3);
        assert_eq!(poly(&[(1.0, 1.0)]).eval(PointT::ZERO), 0.0);
        assert_eq!(MuntzPolynomial::zero().eval(PointT::new(0.3).unwrap()), 0.0);
    }

    #[test]
    fn linear_combination_cancels() {
        let a = poly(&[(1.0, 1.0), (2.0, 1.0)]);
        let b = poly(&[(2.0, 1.0), (3.0, 1.0)]);
        let c = MuntzPolynomial::linear_combination([(1.0, &a), (-1.0, &b)]).unwrap();
        assert_eq!(c.terms().len(), 2);
        assert_eq!(c.eval(PointT::ONE), 0.0);
    }

    #[test]
    fn json_shape() {
        let p = poly(&[(2.0, 1.0), (4.0, -1.0)]);
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(js, r#"[{"exponent":2.0,"coefficient":1.0},{"exponent":4.0,"coefficient":-1.0}]"#);
        let back: MuntzPolynomial = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
    }
}
