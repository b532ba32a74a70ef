//! Double-double reference evaluation of `<Ω'| D(R) |Ω>` by the explicit
//! matrix sandwich.
//!
//! Used as an independent oracle for the closed-form matrix element. A
//! float64 sandwich carries about 1e-15 absolute error, which is too coarse
//! to check relative agreement on elements of size 1e-10; here every step
//! (trigonometry, factorials, the Wigner s-sum and the double sum over
//! `m, n`) is carried with about 32 significant digits.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::coherent::SphPoint;
use crate::rotations::EulerAngles;
use crate::special::Dd;
use crate::HalfInt;

const HALF_PI: Dd = Dd {
    hi: std::f64::consts::FRAC_PI_2,
    lo: 6.123_233_995_736_766e-17,
};

/// Complex number with double-double parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    pub fn from_polar(r: Dd, angle: Dd) -> DdComplex {
        let (s, c) = sin_cos(angle);
        DdComplex { re: r * c, im: r * s }
    }

    pub fn conj(self) -> DdComplex {
        DdComplex {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for DdComplex {
    type Output = DdComplex;
    fn add(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for DdComplex {
    type Output = DdComplex;
    fn sub(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for DdComplex {
    type Output = DdComplex;
    fn mul(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Mul<Dd> for DdComplex {
    type Output = DdComplex;
    fn mul(self, o: Dd) -> DdComplex {
        DdComplex {
            re: self.re * o,
            im: self.im * o,
        }
    }
}

/// `(sin x, cos x)` after reduction by multiples of `π/2`.
pub fn sin_cos(x: Dd) -> (Dd, Dd) {
    let k = (x.to_f64() / HALF_PI.hi).round();
    let r = x - HALF_PI * Dd::new(k);
    let r2 = r * r;
    let mut sin = r;
    let mut cos = Dd::ONE;
    let mut s_term = r;
    let mut c_term = Dd::ONE;
    for n in 1..40 {
        let two_n = 2.0 * n as f64;
        s_term = -(s_term * r2) / Dd::new(two_n * (two_n + 1.0));
        c_term = -(c_term * r2) / Dd::new((two_n - 1.0) * two_n);
        sin = sin + s_term;
        cos = cos + c_term;
        if c_term.hi.abs() < 1e-36 && s_term.hi.abs() < 1e-36 {
            break;
        }
    }
    match (k as i64).rem_euclid(4) {
        0 => (sin, cos),
        1 => (cos, -sin),
        2 => (-sin, -cos),
        _ => (-cos, sin),
    }
}

fn factorial(n: i64) -> Dd {
    (2..=n).fold(Dd::ONE, |acc, k| acc.mul_f64(k as f64))
}

fn powi(x: Dd, n: i64) -> Dd {
    (0..n).fold(Dd::ONE, |acc, _| acc * x)
}

/// `d^j_{mn}(β)` by the s-sum, all in double-double. Arguments are twice
/// the spin labels.
pub fn wigner_d(tj: i64, tm: i64, tn: i64, beta: f64) -> Dd {
    let (s, c) = sin_cos(Dd::new(0.5 * beta));
    let jpm = (tj + tm) / 2;
    let jmm = (tj - tm) / 2;
    let jpn = (tj + tn) / 2;
    let jmn = (tj - tn) / 2;
    let mn = (tm - tn) / 2;
    let pref = (factorial(jpm) * factorial(jmm) * factorial(jpn) * factorial(jmn)).sqrt();
    let mut total = Dd::ZERO;
    for k in 0.max(-mn)..=jpn.min(jmm) {
        let den = factorial(jpn - k) * factorial(k) * factorial(mn + k) * factorial(jmm - k);
        let term = pref / den * powi(c, tj - mn - 2 * k) * powi(s, mn + 2 * k);
        if (mn + k).rem_euclid(2) == 0 {
            total = total + term;
        } else {
            total = total - term;
        }
    }
    total
}

/// Coherent-state amplitudes `<j,m|θ,φ>` in double-double.
pub fn coherent_amplitudes(j: HalfInt, p: &SphPoint) -> Vec<DdComplex> {
    let (s, c) = sin_cos(Dd::new(0.5 * p.theta));
    let tj = j.twice();
    j.ms()
        .map(|m| {
            let jpm = (tj + m.twice()) / 2;
            let jmm = tj - jpm;
            let binom = factorial(tj) / (factorial(jpm) * factorial(jmm));
            let r = binom.sqrt() * powi(c, jpm) * powi(s, jmm);
            DdComplex::from_polar(r, Dd::new(p.phi).mul_f64(jmm as f64))
        })
        .collect()
}

/// `<out| D(R) |inp>` as `Σ_{m,n} conj(a'_m) e^{-iαm} d_{mn}(β) e^{-iγn} a_n`.
pub fn sandwich(j: HalfInt, out: &SphPoint, r: &EulerAngles, inp: &SphPoint) -> Complex64 {
    let bra = coherent_amplitudes(j, out);
    let ket = coherent_amplitudes(j, inp);
    let ms: Vec<i64> = j.ms().map(|m| m.twice()).collect();
    let mut total = DdComplex::ZERO;
    for (row, &tm) in ms.iter().enumerate() {
        let mut inner = DdComplex::ZERO;
        for (col, &tn) in ms.iter().enumerate() {
            let phase = -(Dd::new(r.alpha).mul_f64(0.5 * tm as f64) + Dd::new(r.gamma).mul_f64(0.5 * tn as f64));
            let entry = DdComplex::from_polar(wigner_d(j.twice(), tm, tn, r.beta), phase);
            inner = inner + entry * ket[col];
        }
        total = total + bra[row].conj() * inner;
    }
    total.to_complex()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::coherent_state;
    use crate::rotations::wigner_d_matrix;

    #[test]
    fn trigonometry() {
        for x in [0.0, 0.3, -1.2, 2.5, 7.0, -40.0, 123.456] {
            let (s, c) = sin_cos(Dd::new(x));
            assert!((s.to_f64() - x.sin()).abs() < 2e-16 * x.abs().max(1.0));
            assert!((c.to_f64() - x.cos()).abs() < 2e-16 * x.abs().max(1.0));
            let one = s * s + c * c - Dd::ONE;
            assert!(one.to_f64().abs() < 1e-30);
        }
        // sin(π/6) = 1/2 to double-double accuracy when the argument is π/6 in dd.
        let (s, _) = sin_cos(HALF_PI / Dd::new(3.0));
        assert!((s - Dd::new(0.5)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn small_d_matches_float_path() {
        for (tj, tm, tn, beta) in [(1, 1, -1, 0.7), (8, 2, -4, 1.9), (40, 10, 6, 2.2), (17, -3, 5, 0.4)] {
            let a = wigner_d(tj, tm, tn, beta).to_f64();
            let b = crate::rotations::wigner_d_unchecked(tj, tm, tn, beta);
            assert!((a - b).abs() < 1e-12, "{tj} {tm} {tn}");
        }
    }

    #[test]
    fn sandwich_matches_float_path() {
        let j = HalfInt::from_twice(7);
        let r = EulerAngles::new(0.4, 1.3, 5.1);
        let a = SphPoint::new(0.9, 2.0);
        let b = SphPoint::new(2.2, 4.4);
        let float = wigner_d_matrix(j, &r).sandwich(&coherent_state(j, a).vec, &coherent_state(j, b).vec);
        assert!((sandwich(j, &a, &r, &b) - float).norm() < 1e-14);
    }
}
