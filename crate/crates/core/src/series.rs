//! Truncated univariate power series in `t` with exact rational coefficients.
//!
//! A series of truncation order `M` stores the plain coefficients of
//! `t^0 .. t^M`; arithmetic never silently extends past `M`. The recursion in
//! [`crate::formal`] works in the factorial convention `x(t) = Σ x^m/m! t^m`
//! and converts at its own boundary, so everything here is plain-coefficient.
//!
//! [`FloatSeries`] mirrors the same operations in `f64` for the
//! float/rational cross-check of the series recursion.

use crate::algebra::Rational;
use std::fmt;

/// Error from series arithmetic that callers must handle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesError {
    /// Division by a series with vanishing constant term, i.e. evaluation at a
    /// collapsed coordinate. The caller must treat this as a domain or
    /// model-data error.
    DivisionBySingularSeries,
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::DivisionBySingularSeries => {
                write!(f, "series division by a series with zero constant term")
            }
        }
    }
}

impl std::error::Error for SeriesError {}

/// Truncated power series with rational coefficients; `coeffs[k]` multiplies `t^k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalSeries {
    coeffs: Vec<Rational>,
}

impl RationalSeries {
    /// Zero series of truncation order `order` (holds `order + 1` coefficients).
    pub fn zero(order: usize) -> Self {
        RationalSeries {
            coeffs: vec![Rational::zero(); order + 1],
        }
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The identity series `t`.
    pub fn t(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = Rational::one();
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the constant term");
        RationalSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, v: Rational) {
        self.coeffs[k] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    /// Order of the lowest nonvanishing coefficient, `None` for the zero series.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        RationalSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        RationalSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        RationalSeries {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RationalSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        let m = self.order();
        let mut out = Self::zero(m);
        for i in 0..=m {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=m - i {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                let add = &self.coeffs[i] * &other.coeffs[j];
                out.coeffs[i + j] += add;
            }
        }
        out
    }

    /// Quotient `q` with `q * other == self` through the truncation order.
    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        if other.coeffs[0].is_zero() {
            return Err(SeriesError::DivisionBySingularSeries);
        }
        let m = self.order();
        let inv0 = other.coeffs[0].recip();
        let mut q = Self::zero(m);
        for k in 0..=m {
            let mut acc = self.coeffs[k].clone();
            for j in 0..k {
                acc -= &q.coeffs[j] * &other.coeffs[k - j];
            }
            q.coeffs[k] = acc * &inv0;
        }
        Ok(q)
    }

    /// Multiplies by `t^k`, dropping coefficients past the truncation order.
    pub fn shift_up(&self, k: usize) -> Self {
        let m = self.order();
        let mut out = Self::zero(m);
        for i in 0..=m {
            if i + k <= m {
                out.coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        out
    }

    /// Termwise derivative, same truncation order (top coefficient zero).
    pub fn derivative(&self) -> Self {
        let m = self.order();
        let mut out = Self::zero(m);
        for k in 1..=m {
            out.coeffs[k - 1] = &self.coeffs[k] * &Rational::from_int(k as i64);
        }
        out
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        RationalSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    /// Exact evaluation at rational `t` (Horner).
    pub fn eval(&self, t: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn to_float(&self) -> FloatSeries {
        FloatSeries {
            coeffs: self.coeffs.iter().map(Rational::to_f64).collect(),
        }
    }
}

/// `f64` mirror of [`RationalSeries`]; used by the floating-point re-run of
/// the series recursion.
#[derive(Clone, PartialEq, Debug)]
pub struct FloatSeries {
    coeffs: Vec<f64>,
}

impl FloatSeries {
    pub fn zero(order: usize) -> Self {
        FloatSeries {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn t(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, v: f64) {
        self.coeffs[k] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        FloatSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        FloatSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        FloatSeries {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        let m = self.order();
        let mut out = Self::zero(m);
        for i in 0..=m {
            for j in 0..=m - i {
                out.coeffs[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        out
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        if other.coeffs[0] == 0.0 {
            return Err(SeriesError::DivisionBySingularSeries);
        }
        let m = self.order();
        let mut q = Self::zero(m);
        for k in 0..=m {
            let mut acc = self.coeffs[k];
            for j in 0..k {
                acc -= q.coeffs[j] * other.coeffs[k - j];
            }
            q.coeffs[k] = acc / other.coeffs[0];
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, ratio};
    use proptest::prelude::*;

    fn s(coeffs: &[(i64, i64)]) -> RationalSeries {
        RationalSeries::from_coeffs(coeffs.iter().map(|&(n, d)| ratio(n, d)).collect())
    }

    #[test]
    fn product_of_conjugates() {
        // (1+t)(1-t) at order 2 -> 1 - t^2
        let a = s(&[(1, 1), (1, 1), (0, 1)]);
        let b = s(&[(1, 1), (-1, 1), (0, 1)]);
        assert_eq!(a.mul(&b), s(&[(1, 1), (0, 1), (-1, 1)]));
    }

    #[test]
    fn square_of_truncated_exponential() {
        // (1 + t + t^2/2)^2 at order 2 -> 1 + 2t + 2t^2
        let e = s(&[(1, 1), (1, 1), (1, 2)]);
        assert_eq!(e.mul(&e), s(&[(1, 1), (2, 1), (2, 1)]));
    }

    #[test]
    fn additive_identity() {
        let a = s(&[(3, 2), (-1, 5), (7, 1)]);
        assert_eq!(a.add(&RationalSeries::zero(2)), a);
    }

    #[test]
    fn geometric_series_by_division() {
        // 1/(1-t) at order 3 -> 1 + t + t^2 + t^3
        let one = RationalSeries::constant(rat(1), 3);
        let den = s(&[(1, 1), (-1, 1), (0, 1), (0, 1)]);
        assert_eq!(one.div(&den).unwrap(), s(&[(1, 1), (1, 1), (1, 1), (1, 1)]));
    }

    #[test]
    fn self_division_is_one() {
        let a = s(&[(1, 1), (1, 1), (0, 1)]);
        assert_eq!(a.div(&a).unwrap(), RationalSeries::constant(rat(1), 2));
    }

    #[test]
    fn t_over_one_plus_t() {
        // t/(1+t) at order 2 -> t - t^2
        let num = RationalSeries::t(2);
        let den = s(&[(1, 1), (1, 1), (0, 1)]);
        assert_eq!(num.div(&den).unwrap(), s(&[(0, 1), (1, 1), (-1, 1)]));
    }

    #[test]
    fn division_by_singular_series_is_an_error() {
        let num = RationalSeries::constant(rat(1), 2);
        let den = RationalSeries::t(2);
        assert_eq!(num.div(&den), Err(SeriesError::DivisionBySingularSeries));
    }

    #[test]
    fn shift_and_derivative() {
        let a = s(&[(1, 1), (2, 1), (3, 1)]);
        assert_eq!(a.shift_up(1), s(&[(0, 1), (1, 1), (2, 1)]));
        assert_eq!(a.derivative(), s(&[(2, 1), (6, 1), (0, 1)]));
        assert_eq!(a.eval(&rat(2)), rat(1 + 4 + 12));
    }

    fn arb_series(order: usize) -> impl Strategy<Value = RationalSeries> {
        proptest::collection::vec((-20i64..=20, 1i64..=6), order + 1)
            .prop_map(|cs| RationalSeries::from_coeffs(cs.into_iter().map(|(n, d)| ratio(n, d)).collect()))
    }

    proptest! {
        #[test]
        fn ring_axioms_hold_through_truncation(a in arb_series(6), b in arb_series(6), c in arb_series(6)) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn division_inverts_multiplication(a in arb_series(6), mut b in arb_series(6)) {
            if b.coeff(0).is_zero() {
                b.set_coeff(0, rat(1));
            }
            prop_assert_eq!(a.mul(&b).div(&b).unwrap(), a);
        }
    }
}
