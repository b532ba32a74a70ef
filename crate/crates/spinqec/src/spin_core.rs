//! Exact half-integer labels and the spin-j operator algebra on `C^(2j+1)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Default tolerance for unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;
/// Default tolerance for algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest modulus in a sequence of complex numbers.
pub fn max_modulus<'a>(values: impl Iterator<Item = &'a Complex64>) -> f64 {
    values.map(|z| z.norm()).fold(0.0, f64::max)
}

/// A half-integer stored exactly as twice its value.
///
/// Spin labels are non-negative; magnetic quantum numbers may be negative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub const fn integer(n: i64) -> Self {
        HalfInt { twice: 2 * n }
    }

    /// Nearest half-integer to `x`, or `None` if `x` is not one.
    pub fn from_f64(x: f64) -> Option<Self> {
        let t = (2.0 * x).round();
        ((2.0 * x - t).abs() < 1e-9 && t.abs() < 1e15).then_some(HalfInt { twice: t as i64 })
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// `2j + 1` for a spin label.
    ///
    /// # Panics
    /// Panics on a negative label.
    pub fn dim(self) -> usize {
        assert!(self.twice >= 0, "negative spin label {self}");
        self.twice as usize + 1
    }

    /// Magnetic quantum number at basis index `i` of a spin-`self` space.
    pub fn m_at(self, i: usize) -> HalfInt {
        HalfInt { twice: self.twice - 2 * i as i64 }
    }

    /// Basis index of `m` in a spin-`self` space, if present.
    pub fn index_of(self, m: HalfInt) -> Option<usize> {
        let diff = self.twice - m.twice;
        (m.twice.abs() <= self.twice && diff % 2 == 0).then_some((diff / 2) as usize)
    }

    /// Iterator over `m = j, j-1, ..., -j`.
    pub fn ms(self) -> impl Iterator<Item = HalfInt> {
        (0..self.dim()).map(move |i| self.m_at(i))
    }

    pub fn abs(self) -> HalfInt {
        HalfInt { twice: self.twice.abs() }
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + o.twice }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - o.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3"`, `"3/2"` or `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("not a half-integer: {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "2" => Ok(HalfInt::from_twice(num)),
                "1" => Ok(HalfInt::integer(num)),
                _ => Err(bad()),
            };
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        HalfInt::from_f64(x).ok_or_else(bad)
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => HalfInt::from_f64(x)
                .ok_or_else(|| serde::de::Error::custom(format!("not a half-integer: {x}"))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A vector in the spin-j space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVec {
    j: HalfInt,
    amps: DVector<Complex64>,
}

impl StateVec {
    pub fn new(j: HalfInt, amps: DVector<Complex64>) -> Result<Self> {
        if amps.len() != j.dim() {
            return Err(Error::InvalidParameter(format!(
                "state of length {} for spin {j}",
                amps.len()
            )));
        }
        Ok(StateVec { j, amps })
    }

    pub fn from_fn(j: HalfInt, f: impl Fn(HalfInt) -> Complex64) -> Self {
        StateVec {
            j,
            amps: DVector::from_iterator(j.dim(), j.ms().map(f)),
        }
    }

    pub fn zeros(j: HalfInt) -> Self {
        StateVec {
            j,
            amps: DVector::zeros(j.dim()),
        }
    }

    /// The basis ket `|j, m>`.
    pub fn basis(j: HalfInt, m: HalfInt) -> Result<Self> {
        let i = j
            .index_of(m)
            .ok_or_else(|| Error::OutOfRange(format!("m = {m} for j = {j}")))?;
        let mut v = Self::zeros(j);
        v.amps[i] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn amps(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.amps.norm_squared() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> StateVec {
        StateVec {
            j: self.j,
            amps: &self.amps / Complex64::new(self.norm(), 0.0),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVec) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    pub fn scale(&self, c: Complex64) -> StateVec {
        StateVec {
            j: self.j,
            amps: &self.amps * c,
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: Complex64, other: &StateVec) -> StateVec {
        StateVec {
            j: self.j,
            amps: &self.amps + &other.amps * c,
        }
    }

    pub fn max_abs_diff(&self, other: &StateVec) -> f64 {
        max_modulus((&self.amps - &other.amps).iter())
    }
}

/// A dense operator on the spin-j space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    j: HalfInt,
    mat: DMatrix<Complex64>,
}

impl Operator {
    pub fn new(j: HalfInt, mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != j.dim() || mat.ncols() != j.dim() {
            return Err(Error::InvalidParameter(format!(
                "{}x{} matrix for spin {j}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Operator { j, mat })
    }

    pub(crate) fn from_matrix_unchecked(j: HalfInt, mat: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(mat.nrows(), j.dim());
        Operator { j, mat }
    }

    pub fn identity(j: HalfInt) -> Self {
        Operator {
            j,
            mat: DMatrix::identity(j.dim(), j.dim()),
        }
    }

    pub fn zeros(j: HalfInt) -> Self {
        Operator {
            j,
            mat: DMatrix::zeros(j.dim(), j.dim()),
        }
    }

    pub fn from_diagonal(j: HalfInt, f: impl Fn(HalfInt) -> Complex64) -> Self {
        let d = DVector::from_iterator(j.dim(), j.ms().map(f));
        Operator {
            j,
            mat: DMatrix::from_diagonal(&d),
        }
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    /// `<j,m|self|j,n>`.
    pub fn entry(&self, m: HalfInt, n: HalfInt) -> Complex64 {
        match (self.j.index_of(m), self.j.index_of(n)) {
            (Some(a), Some(b)) => self.mat[(a, b)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn dagger(&self) -> Operator {
        Operator {
            j: self.j,
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        Operator {
            j: self.j,
            mat: &self.mat * c,
        }
    }

    pub fn apply(&self, v: &StateVec) -> StateVec {
        assert_eq!(self.j, v.j, "spin mismatch in apply");
        StateVec {
            j: self.j,
            amps: &self.mat * &v.amps,
        }
    }

    /// `<a|self|b>`.
    pub fn sandwich(&self, a: &StateVec, b: &StateVec) -> Complex64 {
        a.amps.dotc(&(&self.mat * &b.amps))
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        self * other - other * self
    }

    pub fn pow(&self, n: u32) -> Operator {
        let mut acc = Operator::identity(self.j);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_modulus((&self.mat - &other.mat).iter())
    }

    pub fn max_abs(&self) -> f64 {
        max_modulus(self.mat.iter())
    }

    pub fn hermiticity_residual(&self) -> f64 {
        max_modulus((&self.mat - self.mat.adjoint()).iter())
    }

    pub fn unitarity_residual(&self) -> f64 {
        let p = self.mat.adjoint() * &self.mat;
        max_modulus((p - DMatrix::<Complex64>::identity(self.j.dim(), self.j.dim())).iter())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitian_part_checked()?;
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// `(A + A†)/2`, rejecting operators that are not Hermitian to 1e-10.
    pub fn symmetrized(&self) -> Result<Operator> {
        Ok(Operator::from_matrix_unchecked(self.j, self.hermitian_part_checked()?))
    }

    fn hermitian_part_checked(&self) -> Result<DMatrix<Complex64>> {
        let residual = self.hermiticity_residual();
        let scale = self.max_abs().max(1.0);
        if residual > 1e-10 * scale {
            return Err(Error::NotHermitian { residual });
        }
        Ok((&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0))
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.j, rhs.j, "spin mismatch in product");
        Operator {
            j: self.j,
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.j, rhs.j, "spin mismatch in sum");
        Operator {
            j: self.j,
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.j, rhs.j, "spin mismatch in difference");
        Operator {
            j: self.j,
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

/// `L3 = diag(j, j-1, ..., -j)`.
pub fn l3_operator(j: HalfInt) -> Operator {
    Operator::from_diagonal(j, |m| Complex64::new(m.value(), 0.0))
}

/// `(L+, L-)` with `<m±1|L±|m> = sqrt(j(j+1) - m(m±1))`.
pub fn ladder_operators(j: HalfInt) -> (Operator, Operator) {
    let n = j.dim();
    let jj = j.value();
    let mut plus = DMatrix::zeros(n, n);
    for i in 1..n {
        // column i holds m, row i-1 holds m+1
        let m = j.m_at(i).value();
        plus[(i - 1, i)] = Complex64::new((jj * (jj + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    (Operator { j, mat: plus }, Operator { j, mat: minus })
}

/// `L_x = (L+ + L-)/2`.
pub fn lx_operator(j: HalfInt) -> Operator {
    let (p, m) = ladder_operators(j);
    (&p + &m).scale(Complex64::new(0.5, 0.0))
}

/// `L_y = (L+ - L-)/(2i)`.
pub fn ly_operator(j: HalfInt) -> Operator {
    let (p, m) = ladder_operators(j);
    (&p - &m).scale(-0.5 * I)
}

/// `exp(-i t A)` for Hermitian `A`, through its eigendecomposition.
pub fn matexp_antihermitian(a: &Operator, t: f64) -> Result<Operator> {
    let h = a.hermitian_part_checked()?;
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        v.ncols(),
        eig.eigenvalues.iter().map(|&lam| Complex64::from_polar(1.0, -t * lam)),
    );
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * phases[c]);
    Ok(Operator {
        j: a.j,
        mat: scaled * v.adjoint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn l3_examples() {
        let h = HalfInt::from_twice(1);
        let l3 = l3_operator(h);
        assert_eq!(l3.matrix()[(0, 0)], c(0.5));
        assert_eq!(l3.matrix()[(1, 1)], c(-0.5));
        let l3 = l3_operator(HalfInt::integer(1));
        assert_eq!(
            (0..3).map(|i| l3.matrix()[(i, i)].re).collect::<Vec<_>>(),
            vec![1.0, 0.0, -1.0]
        );
        assert_eq!(l3_operator(HalfInt::integer(5)).matrix().trace(), c(0.0));
    }

    #[test]
    fn ladder_examples() {
        let (p, _) = ladder_operators(HalfInt::from_twice(1));
        assert_eq!(p.matrix()[(0, 1)], c(1.0));
        assert_eq!(p.matrix()[(0, 0)], c(0.0));
        assert_eq!(p.matrix()[(1, 0)], c(0.0));
        let (p, _) = ladder_operators(HalfInt::integer(1));
        assert_eq!(p.entry(HalfInt::integer(1), HalfInt::ZERO), c(2f64.sqrt()));
        let j = HalfInt::from_twice(7);
        let (p, m) = ladder_operators(j);
        let res = p.commutator(&m).max_abs_diff(&l3_operator(j).scale(c(2.0)));
        assert!(res < 1e-12);
    }

    #[test]
    fn matexp_examples() {
        let j = HalfInt::integer(3);
        let l3 = l3_operator(j);
        assert!(matexp_antihermitian(&l3, 0.0).unwrap().max_abs_diff(&Operator::identity(j)) < 1e-15);
        let full = matexp_antihermitian(&l3, 2.0 * std::f64::consts::PI).unwrap();
        assert!(full.max_abs_diff(&Operator::identity(j)) < 1e-12);
        let jh = HalfInt::from_twice(5);
        let full = matexp_antihermitian(&l3_operator(jh), 2.0 * std::f64::consts::PI).unwrap();
        assert!(full.max_abs_diff(&Operator::identity(jh).scale(c(-1.0))) < 1e-12);
    }

    #[test]
    fn matexp_rejects_non_hermitian() {
        let j = HalfInt::integer(1);
        let (p, _) = ladder_operators(j);
        assert!(matches!(matexp_antihermitian(&p, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn halfint_parsing_and_display() {
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(3));
        assert_eq!("2.5".parse::<HalfInt>().unwrap(), HalfInt::from_twice(5));
        assert_eq!("4".parse::<HalfInt>().unwrap(), HalfInt::integer(4));
        assert!("0.3".parse::<HalfInt>().is_err());
        assert_eq!(HalfInt::from_twice(7).to_string(), "7/2");
        assert_eq!(HalfInt::integer(-2).to_string(), "-2");
        let j: HalfInt = serde_json::from_str("1.5").unwrap();
        assert_eq!(j, HalfInt::from_twice(3));
        assert_eq!(serde_json::to_string(&HalfInt::from_twice(3)).unwrap(), "1.5");
    }

    fn random_hermitian(n: usize, entries: &[f64]) -> DMatrix<Complex64> {
        let mut k = 0;
        let mut next = || {
            let v = entries[k % entries.len()] * (1.0 + k as f64 * 0.37).sin();
            k += 1;
            v
        };
        let m = DMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
        (&m + m.adjoint()) * c(0.5)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn exp_is_unitary(twice in 0i64..=50, t in -10.0f64..10.0,
                          entries in prop::collection::vec(-3.0f64..3.0, 8)) {
            let j = HalfInt::from_twice(twice);
            let a = Operator::new(j, random_hermitian(j.dim(), &entries)).unwrap();
            let u = matexp_antihermitian(&a, t).unwrap();
            prop_assert!(u.unitarity_residual() < 1e-10);
        }

        #[test]
        fn angular_momentum_algebra(twice in 0i64..=50) {
            let j = HalfInt::from_twice(twice);
            let (p, m) = ladder_operators(j);
            let l3 = l3_operator(j);
            prop_assert!(l3.commutator(&p).max_abs_diff(&p) < 1e-12);
            prop_assert!(l3.commutator(&m).max_abs_diff(&m.scale(c(-1.0))) < 1e-12);
            prop_assert!(p.commutator(&m).max_abs_diff(&l3.scale(c(2.0))) < 1e-12);
            let casimir = &(&l3 * &l3) + &(&(&p * &m) + &(&m * &p)).scale(c(0.5));
            let jj = j.value();
            prop_assert!(casimir.max_abs_diff(&Operator::identity(j).scale(c(jj * (jj + 1.0)))) < 1e-12);
        }
    }
}
