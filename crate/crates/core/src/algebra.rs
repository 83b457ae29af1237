//! Exact rational arithmetic and dense rational linear algebra.
//!
//! Everything here is exact: [`Rational`] is an arbitrary-precision fraction
//! kept in lowest terms with positive denominator, and the matrix routines
//! (fraction-free determinants, affine solving with explicit kernel bases)
//! never round. All values are immutable after construction and safe to share
//! across threads.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Arbitrary-precision rational number, always in lowest terms, denominator > 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den` as an exact fraction. Panics if `den == 0`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational with zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    /// Integer power; `pow(0) == 1` even for zero base.
    pub fn pow(&self, exp: u32) -> Self {
        Rational(self.0.pow(exp as i32))
    }

    pub fn to_f64(&self) -> f64 {
        // Exact for anything representable; falls back to a quotient of
        // rounded big integers for extreme magnitudes.
        let n = num::ToPrimitive::to_f64(self.0.numer()).unwrap_or(f64::NAN);
        let d = num::ToPrimitive::to_f64(self.0.denom()).unwrap_or(f64::NAN);
        n / d
    }
}

impl fmt::Display for Rational {
    /// `num/den`, with `/den` omitted when the value is an integer.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Error from parsing a rational out of a `num` or `num/den` string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational: {}", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let n = BigInt::from_str(num).map_err(|_| ParseRationalError(s.to_string()))?;
        let d = match den {
            Some(d) => BigInt::from_str(d).map_err(|_| ParseRationalError(s.to_string()))?,
            None => BigInt::one(),
        };
        if d.is_zero() {
            return Err(ParseRationalError(format!("{s} (zero denominator)")));
        }
        Ok(Rational(BigRational::new(n, d)))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

impl_binop!(Add, add);
impl_binop!(Sub, sub);
impl_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(self.0 / rhs.0)
    }
}
impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(&self.0 / &rhs.0)
    }
}
impl Div<&Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(self.0 / &rhs.0)
    }
}
impl Div<Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(&self.0 / rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}
impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}
impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}
impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}
impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}
impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}
impl MulAssign for Rational {
    fn mul_assign(&mut self, rhs: Rational) {
        self.0 *= rhs.0;
    }
}
impl DivAssign<&Rational> for Rational {
    fn div_assign(&mut self, rhs: &Rational) {
        assert!(!rhs.is_zero(), "rational division by zero");
        self.0 /= &rhs.0;
    }
}

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_int(n)
}

/// Shorthand for `num/den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

/// Dense vector of rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QVector(pub Vec<Rational>);

impl QVector {
    pub fn zeros(n: usize) -> Self {
        QVector(vec![Rational::zero(); n])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        QVector(v.iter().map(|&n| rat(n)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    pub fn add(&self, other: &QVector) -> QVector {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Rational) -> QVector {
        QVector(self.0.iter().map(|a| a * c).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Rational::to_f64).collect()
    }

    /// Applies the permutation `perm` (0-based image list): result[i] = self[perm[i]].
    pub fn permute(&self, perm: &[usize]) -> QVector {
        assert_eq!(perm.len(), self.len(), "permutation length mismatch");
        QVector(perm.iter().map(|&j| self.0[j].clone()).collect())
    }
}

impl std::ops::Index<usize> for QVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for QVector {
    fn index_mut(&mut self, i: usize) -> &mut Rational {
        &mut self.0[i]
    }
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

/// Outcome of [`solve_affine`]: one particular solution of `L v = d` together
/// with a basis of `ker(L)` in reduced echelon form.
#[derive(Clone, Debug)]
pub struct AffineSolution {
    pub particular: QVector,
    pub kernel_basis: Vec<QVector>,
}

/// `d` is not in the range of `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inconsistent;

impl fmt::Display for Inconsistent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "linear system is inconsistent: right-hand side not in range")
    }
}

impl std::error::Error for Inconsistent {}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&n| rat(n)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> QVector {
        QVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shape mismatch");
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shape mismatch");
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn matvec(&self, v: &QVector) -> QVector {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = QVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = Rational::zero();
            for j in 0..self.cols {
                acc += &self[(i, j)] * &v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_f64()).collect())
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    ///
    /// Row denominators are cleared first so the elimination runs over
    /// integers, which bounds intermediate entry growth.
    pub fn det(&self) -> Rational {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Rational::one();
        }

        // Clear denominators row by row; det scales by the product.
        let mut scale = BigInt::one();
        let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut lcm = BigInt::one();
            for j in 0..n {
                lcm = num::integer::lcm(lcm, self[(i, j)].denom().clone());
            }
            scale *= &lcm;
            a.push(
                (0..n)
                    .map(|j| self[(i, j)].numer() * (&lcm / self[(i, j)].denom()))
                    .collect(),
            );
        }

        let mut sign = 1i64;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return Rational::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                    // Exact division: Bareiss guarantees divisibility.
                    a[i][j] = num / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        let det_int = if sign < 0 { -a[n - 1][n - 1].clone() } else { a[n - 1][n - 1].clone() };
        Rational(BigRational::new(det_int, scale))
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r >= self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].recip();
            for j in c..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let f = self[(i, c)].clone();
                    for j in c..self.cols {
                        let v = &self[(i, j)] - &(&f * &self[(r, j)]);
                        self[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Basis of `ker(self)` in reduced echelon form (one vector per free
    /// column, unit entry at the free column).
    pub fn kernel_basis(&self) -> Vec<QVector> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = QVector::zeros(self.cols);
                v[fc] = Rational::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -&m[(r, fc)];
                }
                v
            })
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `L v = d` exactly, returning one particular solution together with a
/// kernel basis, or [`Inconsistent`] when `d` is not in the range of `L`.
///
/// The particular solution sets every free variable to zero; the kernel basis
/// is in reduced echelon form, so results are deterministic. Callers comparing
/// against reference solution families should use [`same_span`] / kernel
/// membership rather than literal equality.
pub fn solve_affine(l: &QMatrix, d: &QVector) -> Result<AffineSolution, Inconsistent> {
    assert_eq!(l.rows(), l.cols(), "solve_affine expects a square operator");
    assert_eq!(l.rows(), d.len(), "right-hand side length mismatch");
    let n = l.rows();

    let mut aug = QMatrix::zeros(n, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = l[(i, j)].clone();
        }
        aug[(i, n)] = d[i].clone();
    }
    let pivots = aug.rref();
    if pivots.contains(&n) {
        return Err(Inconsistent);
    }

    let mut particular = QVector::zeros(n);
    for (r, &pc) in pivots.iter().enumerate() {
        particular[pc] = aug[(r, n)].clone();
    }
    Ok(AffineSolution {
        particular,
        kernel_basis: l.kernel_basis(),
    })
}

/// True iff the two families of vectors span the same subspace (exact).
pub fn same_span(a: &[QVector], b: &[QVector]) -> bool {
    if a.is_empty() && b.is_empty() {
        return true;
    }
    let dim = a.first().or_else(|| b.first()).map_or(0, QVector::len);
    if a.iter().chain(b).any(|v| v.len() != dim) {
        return false;
    }
    let rank = |vs: &[QVector]| -> usize {
        if vs.is_empty() {
            return 0;
        }
        let mut m = QMatrix::from_rows(vs.iter().map(|v| v.0.clone()).collect());
        m.rref().len()
    };
    let ra = rank(a);
    let rb = rank(b);
    let joint: Vec<QVector> = a.iter().chain(b).cloned().collect();
    ra == rb && rank(&joint) == ra
}

/// True iff `v` lies in the span of `basis` (exact).
pub fn in_span(v: &QVector, basis: &[QVector]) -> bool {
    if v.is_zero() {
        return true;
    }
    let with: Vec<QVector> = basis.iter().cloned().chain([v.clone()]).collect();
    same_span(basis, &with)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_rat(rng: &mut StdRng, max: i64) -> Rational {
        let n = rng.random_range(-max..=max);
        let d = rng.random_range(1..=8);
        Rational::from_ratio(n, d)
    }

    #[test]
    fn rational_basics() {
        let a = ratio(6, 4);
        assert_eq!(a, ratio(3, 2));
        assert_eq!(a.to_string(), "3/2");
        assert_eq!(rat(-7).to_string(), "-7");
        assert_eq!("3/2".parse::<Rational>().unwrap(), a);
        assert_eq!("-5".parse::<Rational>().unwrap(), rat(-5));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        assert_eq!(ratio(-3, -6), ratio(1, 2));
        assert!(ratio(-1, 2).denom() > &BigInt::zero());
        assert_eq!(ratio(2, 3).pow(3), ratio(8, 27));
        assert_eq!(ratio(2, 3).pow(0), rat(1));
    }

    #[test]
    fn lowest_terms_normalization_is_idempotent() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let a = random_rat(&mut rng, 40);
            let b = random_rat(&mut rng, 40);
            let s = &a + &b;
            let back = &s - &b;
            assert_eq!(back, a);
            if !b.is_zero() {
                let p = &a * &b;
                assert_eq!(&p / &b, a);
            }
            if s.is_zero() {
                assert_eq!(s.denom(), &BigInt::one());
            } else {
                assert_eq!(num::integer::gcd(s.numer().abs(), s.denom().clone()), BigInt::one());
            }
        }
    }

    #[test]
    fn det_identity_is_one() {
        assert_eq!(QMatrix::identity(5).det(), rat(1));
    }

    #[test]
    fn det_matches_cofactor_expansion_on_random_matrices() {
        fn cofactor_det(m: &QMatrix) -> Rational {
            let n = m.rows();
            if n == 1 {
                return m[(0, 0)].clone();
            }
            let mut acc = Rational::zero();
            for j in 0..n {
                if m[(0, j)].is_zero() {
                    continue;
                }
                let mut minor = QMatrix::zeros(n - 1, n - 1);
                for i in 1..n {
                    let mut cc = 0;
                    for c in 0..n {
                        if c != j {
                            minor[(i - 1, cc)] = m[(i, c)].clone();
                            cc += 1;
                        }
                    }
                }
                let term = &m[(0, j)] * &cofactor_det(&minor);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }

        let mut rng = StdRng::seed_from_u64(11);
        for n in 1..=5 {
            for _ in 0..20 {
                let m = QMatrix::from_rows(
                    (0..n)
                        .map(|_| (0..n).map(|_| random_rat(&mut rng, 6)).collect())
                        .collect(),
                );
                assert_eq!(m.det(), cofactor_det(&m));
            }
        }
    }

    #[test]
    fn solve_diagonal_system() {
        // L = 2·Id, d = (2,4,6) -> particular (1,2,3), empty kernel.
        let l = QMatrix::identity(3).scale(&rat(2));
        let d = QVector::from_ints(&[2, 4, 6]);
        let sol = solve_affine(&l, &d).unwrap();
        assert_eq!(sol.particular, QVector::from_ints(&[1, 2, 3]));
        assert!(sol.kernel_basis.is_empty());
    }

    #[test]
    fn solve_reports_inconsistency() {
        let l = QMatrix::from_int_rows(&[&[1, 0], &[1, 0]]);
        let d = QVector::from_ints(&[1, 2]);
        assert_eq!(solve_affine(&l, &d).unwrap_err(), Inconsistent);
    }

    #[test]
    fn solutions_satisfy_system_exactly() {
        let mut rng = StdRng::seed_from_u64(3);
        let mut singular_seen = 0;
        for _ in 0..60 {
            let n = rng.random_range(2..=5usize);
            // Force occasional rank deficiency by duplicating a row.
            let mut rows: Vec<Vec<Rational>> = (0..n)
                .map(|_| (0..n).map(|_| random_rat(&mut rng, 5)).collect())
                .collect();
            if rng.random_bool(0.5) && n >= 2 {
                rows[n - 1] = rows[0].clone();
            }
            let l = QMatrix::from_rows(rows);
            let x = QVector((0..n).map(|_| random_rat(&mut rng, 5)).collect());
            let d = l.matvec(&x); // consistent by construction
            let sol = solve_affine(&l, &d).unwrap();
            assert_eq!(l.matvec(&sol.particular), d);
            for k in &sol.kernel_basis {
                assert!(l.matvec(k).is_zero());
            }
            let deficient = !sol.kernel_basis.is_empty();
            assert_eq!(l.det().is_zero(), deficient);
            if deficient {
                singular_seen += 1;
                assert!(in_span(&x.sub(&sol.particular), &sol.kernel_basis));
            }
        }
        assert!(singular_seen > 5, "expected some singular samples");
    }

    #[test]
    fn span_comparison_ignores_scaling_and_mixing() {
        let a = vec![QVector::from_ints(&[-2, 0, 1])];
        let b = vec![QVector::from_ints(&[4, 0, -2])];
        assert!(same_span(&a, &b));
        let c = vec![QVector::from_ints(&[1, 0, 0])];
        assert!(!same_span(&a, &c));
        let e = vec![
            QVector::from_ints(&[-64, 1, 0, 0, 0]),
            QVector(vec![rat(0), rat(0), ratio(-3, 2), rat(1), rat(1)]),
        ];
        let f = vec![
            e[0].add(&e[1].scale(&rat(2))),
            e[1].clone(),
        ];
        assert!(same_span(&e, &f));
    }
}
