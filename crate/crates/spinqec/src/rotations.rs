//! Euler-angle rotations, Wigner d and D matrices, SU(2) composition and
//! Haar sampling.
//!
//! The z-y-z convention is used throughout:
//! `D(α, β, γ) = exp(-iαL3) exp(-iβL_y) exp(-iγL3)`.

use std::f64::consts::{PI, TAU};
use std::ops::{Mul, Neg};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::special::{ln_factorial, signed_ln_pow, Dd};
use crate::{Error, HalfInt, Operator, Result};

const GIMBAL_EPS: f64 = 1e-13;

/// A z-y-z Euler triple.
///
/// Any real triple is accepted; [`EulerAngles::canonical`] maps it into
/// `α, γ ∈ [0, 2π)`, `β ∈ [0, π]` and reports the SU(2) sign that the
/// reduction introduced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Element of the centre `{+1, -1}` of SU(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// The scalar by which this sign acts in the spin-`j` irrep, `(±1)^{2j}`.
    pub fn in_irrep(self, j: HalfInt) -> f64 {
        match self {
            Sign::Minus if !j.is_integer() => -1.0,
            _ => 1.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, o: Sign) -> Sign {
        if self == o {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl EulerAngles {
    pub const IDENTITY: EulerAngles = EulerAngles {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }

    /// Rotation by `theta` about the z axis.
    pub const fn z(theta: f64) -> Self {
        EulerAngles::new(theta, 0.0, 0.0)
    }

    pub fn to_su2(&self) -> Su2Element {
        let (s, c) = (0.5 * self.beta).sin_cos();
        Su2Element {
            a: Complex64::from_polar(c, -0.5 * (self.alpha + self.gamma)),
            b: Complex64::from_polar(s, 0.5 * (self.alpha - self.gamma)),
        }
    }

    /// The exact SU(2) inverse `(-γ, -β, -α)`.
    pub fn inverse(&self) -> EulerAngles {
        EulerAngles::new(-self.gamma, -self.beta, -self.alpha)
    }

    /// Canonical triple and sign with `self.to_su2() = sign * canonical.to_su2()`.
    pub fn canonical(&self) -> (EulerAngles, Sign) {
        self.to_su2().to_euler()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }
}

/// `[[a, -conj(b)], [b, conj(a)]]` with `|a|^2 + |b|^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Element {
    a: Complex64,
    b: Complex64,
}

impl Su2Element {
    pub const IDENTITY: Su2Element = Su2Element {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let det = a.norm_sqr() + b.norm_sqr();
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("SU(2) determinant {det}")));
        }
        Ok(Su2Element { a, b })
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Row-major 2x2 matrix.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.a, -self.b.conj()], [self.b, self.a.conj()]]
    }

    pub fn inverse(&self) -> Su2Element {
        Su2Element {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    /// Rotation by `angle` about the x axis, `exp(-i angle σx/2)`.
    pub fn x_rotation(angle: f64) -> Su2Element {
        let (s, c) = (0.5 * angle).sin_cos();
        Su2Element {
            a: Complex64::new(c, 0.0),
            b: Complex64::new(0.0, -s),
        }
    }

    /// Canonical Euler angles and the sign with `self = sign * euler.to_su2()`.
    ///
    /// When `β` is 0 or π only one combination of `α` and `γ` is defined; all
    /// of it is placed in `α` and `γ` is set to 0.
    pub fn to_euler(&self) -> (EulerAngles, Sign) {
        let ca = self.a.norm();
        let sb = self.b.norm();
        let beta = 2.0 * sb.atan2(ca);
        let (alpha, gamma) = if beta < GIMBAL_EPS {
            (-2.0 * self.a.arg(), 0.0)
        } else if PI - beta < GIMBAL_EPS {
            (2.0 * self.b.arg(), 0.0)
        } else {
            (self.b.arg() - self.a.arg(), -self.a.arg() - self.b.arg())
        };
        let euler = EulerAngles::new(wrap_angle(alpha), beta.min(PI), wrap_angle(gamma));
        let rebuilt = euler.to_su2();
        let plus = (rebuilt.a - self.a).norm() + (rebuilt.b - self.b).norm();
        let minus = (rebuilt.a + self.a).norm() + (rebuilt.b + self.b).norm();
        let sign = if plus <= minus { Sign::Plus } else { Sign::Minus };
        (euler, sign)
    }

    pub fn max_abs_diff(&self, other: &Su2Element) -> f64 {
        (self.a - other.a).norm().max((self.b - other.b).norm())
    }
}

impl Mul for Su2Element {
    type Output = Su2Element;
    fn mul(self, o: Su2Element) -> Su2Element {
        // [[a, -b*],[b, a*]] [[c, -d*],[d, c*]]
        Su2Element {
            a: self.a * o.a - self.b.conj() * o.b,
            b: self.b * o.a + self.a.conj() * o.b,
        }
    }
}

impl Neg for Su2Element {
    type Output = Su2Element;
    fn neg(self) -> Su2Element {
        Su2Element {
            a: -self.a,
            b: -self.b,
        }
    }
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Composition `R1 R2` as a canonical triple plus the SU(2) sign relating it
/// to the product of the two input triples.
pub fn compose(r1: &EulerAngles, r2: &EulerAngles) -> (EulerAngles, Sign) {
    (r1.to_su2() * r2.to_su2()).to_euler()
}

/// Wigner small-d element `d^j_{mn}(β) = <j,m| exp(-iβL_y) |j,n>`.
///
/// Evaluated from the single sum over `s` with log-factorials; signs of
/// `cos(β/2)` and `sin(β/2)` are tracked so any real `β` is accepted.
pub fn wigner_d(j: HalfInt, m: HalfInt, n: HalfInt, beta: f64) -> Result<f64> {
    if j.twice() < 0
        || m.abs() > j
        || n.abs() > j
        || (j.twice() - m.twice()) % 2 != 0
        || (j.twice() - n.twice()) % 2 != 0
    {
        return Err(Error::OutOfRange(format!("d^{j}_({m},{n})")));
    }
    Ok(wigner_d_unchecked(j.twice(), m.twice(), n.twice(), beta))
}

pub(crate) fn wigner_d_unchecked(tj: i64, tm: i64, tn: i64, beta: f64) -> f64 {
    let (s_half, c_half) = (0.5 * beta).sin_cos();
    let jpm = (tj + tm) / 2;
    let jmm = (tj - tm) / 2;
    let jpn = (tj + tn) / 2;
    let jmn = (tj - tn) / 2;
    let m_minus_n = (tm - tn) / 2;
    let prefactor = 0.5
        * (ln_factorial(jpm as u64)
            + ln_factorial(jmm as u64)
            + ln_factorial(jpn as u64)
            + ln_factorial(jmn as u64));
    let s_min = 0.max(-m_minus_n);
    let s_max = jpn.min(jmm);
    let overall = if m_minus_n.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    let log_term = |s: i64| -> (f64, f64) {
        let cos_pow = tj - 2 * s - m_minus_n;
        let sin_pow = m_minus_n + 2 * s;
        let (lc, sc) = signed_ln_pow(c_half, cos_pow as u64);
        let (ls, ss) = signed_ln_pow(s_half, sin_pow as u64);
        let denom = ln_factorial(s as u64)
            + ln_factorial((jpn - s) as u64)
            + ln_factorial((m_minus_n + s) as u64)
            + ln_factorial((jmm - s) as u64);
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 } * sc * ss;
        (prefactor + lc + ls - denom, sign)
    };

    if c_half == 0.0 || s_half == 0.0 {
        // At most one term survives.
        let total: f64 = (s_min..=s_max)
            .map(log_term)
            .filter(|(l, _)| l.is_finite())
            .map(|(l, sign)| sign * l.exp())
            .sum();
        return overall * total;
    }

    // Leading term in log form; later terms by their exact ratio, summed in
    // double-double so the alternating sum does not amplify rounding.
    let (mut offset, sign0) = log_term(s_min);
    let mut term = Dd::new(sign0);
    let mut total = term;
    let ratio_trig = (Dd::new(s_half) * Dd::new(s_half)) / (Dd::new(c_half) * Dd::new(c_half));
    const RESCALE: f64 = 1e150;
    for s in s_min..s_max {
        let num = ((jpn - s) * (jmm - s)) as f64;
        let den = ((s + 1) * (m_minus_n + s + 1)) as f64;
        term = -(term * ratio_trig * (Dd::new(num) / Dd::new(den)));
        total = total + term;
        if term.hi.abs() > RESCALE {
            term = term.mul_f64(1.0 / RESCALE);
            total = total.mul_f64(1.0 / RESCALE);
            offset += RESCALE.ln();
        }
    }
    overall * total.to_f64() * offset.exp()
}

/// The full real matrix `d^j(β)` in the descending-m basis.
pub fn wigner_d_small(j: HalfInt, beta: f64) -> DMatrix<f64> {
    let n = j.dim();
    DMatrix::from_fn(n, n, |r, c| {
        wigner_d_unchecked(j.twice(), j.m_at(r).twice(), j.m_at(c).twice(), beta)
    })
}

/// Wigner D matrix with entries `exp(-iαm) d^j_{mn}(β) exp(-iγn)`.
pub fn wigner_d_matrix(j: HalfInt, r: &EulerAngles) -> Operator {
    let d = wigner_d_small(j, r.beta);
    let n = j.dim();
    let mat = DMatrix::from_fn(n, n, |row, col| {
        let m = j.m_at(row).value();
        let nn = j.m_at(col).value();
        Complex64::from_polar(d[(row, col)], -r.alpha * m - r.gamma * nn)
    });
    Operator::from_matrix_unchecked(j, mat)
}

/// The spin-j representative of an SU(2) element, sign included.
pub fn su2_representation(j: HalfInt, u: &Su2Element) -> Operator {
    let (euler, sign) = u.to_euler();
    let d = wigner_d_matrix(j, &euler);
    match sign.in_irrep(j) {
        s if s < 0.0 => d.scale(Complex64::new(-1.0, 0.0)),
        _ => d,
    }
}

/// Haar-random rotation from a seed.
pub fn haar_random(seed: u64) -> EulerAngles {
    haar_random_with(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Haar-random rotation drawn from `rng`.
pub fn haar_random_with<R: Rng + ?Sized>(rng: &mut R) -> EulerAngles {
    let alpha = rng.gen::<f64>() * TAU;
    let cos_beta: f64 = rng.gen_range(-1.0..=1.0);
    let gamma = rng.gen::<f64>() * TAU;
    EulerAngles::new(alpha, cos_beta.clamp(-1.0, 1.0).acos(), gamma)
}
