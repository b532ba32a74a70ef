//! Monopole (spin-weighted) spherical harmonics and the truncated full
//! spherical Landau codes built from them.
//!
//! Harmonics are in the `ε = −1` gauge:
//!
//! `ⱼY^ℓ_m = 2^m N (1−x)^{−(m+j)/2} (1+x)^{−(m−j)/2} P_{ℓ+m}^{(−(m+j), −(m−j))}(x) e^{i(m+j)φ}`
//!
//! with `x = cos θ`. Both Jacobi parameters may be negative; the factors
//! `((x−1)/2)^{max(m+j,0)}` and `((x+1)/2)^{max(m−j,0)}` are split off
//! exactly, leaving a Jacobi polynomial with parameters `(|m+j|, |m−j|)`
//! that is evaluated by the three-term recurrence.

use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::{y_symbol, SphPoint};
use crate::rotations::wigner_d;
use crate::special::{ln_binomial, ln_factorial};
use crate::{Error, HalfInt, Result, StateVec};

/// `P_n^{(α,β)}(x)` for non-negative integer parameters, by recurrence in `n`.
pub fn jacobi_p(n: usize, alpha: u32, beta: u32, x: f64) -> f64 {
    let (a, b) = (alpha as f64, beta as f64);
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c0 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c2 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let p2 = (c1 * p1 - c2 * p0) / c0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonopoleHarmonic {
    pub j: HalfInt,
    pub l: HalfInt,
    pub m: HalfInt,
    ln_scale: f64,
    sign: f64,
    sin_pow: u32,
    cos_pow: u32,
    degree: usize,
}

pub fn monopole_y(j: HalfInt, l: HalfInt, m: HalfInt) -> Result<MonopoleHarmonic> {
    if l.twice() < j.twice().abs() {
        return Err(Error::InvalidParameter(format!("need ℓ >= |j|, got ℓ = {l}, j = {j}")));
    }
    if m.twice().abs() > l.twice() || !(l - m).is_integer() || !(l - j).is_integer() {
        return Err(Error::InvalidParameter(format!("inconsistent (j, ℓ, m) = ({j}, {l}, {m})")));
    }
    let half = |h: HalfInt| h.twice() / 2;
    let a = half(m + j);
    let b = (m - j).twice() / 2;
    let n = half(l + m);
    let (big_a, big_b) = (half(l - j), half(l + j));
    let (a_plus, b_plus) = (a.max(0), b.max(0));
    let degree = n - a_plus - b_plus;
    let lf = |k: i64| ln_factorial(k as u64);
    let lb = |top: i64, k: i64| ln_binomial(top as u64, k as u64);
    let lv = l.value();
    let ln_norm = 0.5
        * ((2.0 * lv + 1.0).ln() + lf(half(l - m)) + lf(n) - (4.0 * PI).ln() - lf(big_a) - lf(big_b));
    let ln_scale = ln_norm
        + m.value() * LN_2
        + LN_2 * (a.abs() as f64 / 2.0 - a_plus as f64)
        + LN_2 * (b.abs() as f64 / 2.0 - b_plus as f64)
        + lb(big_a, n - a_plus)
        + lb(big_b, a_plus)
        - lb(degree + a.abs(), degree);
    Ok(MonopoleHarmonic {
        j,
        l,
        m,
        ln_scale,
        sign: if a_plus % 2 == 0 { 1.0 } else { -1.0 },
        sin_pow: a.unsigned_abs() as u32,
        cos_pow: b.unsigned_abs() as u32,
        degree: degree as usize,
    })
}

impl MonopoleHarmonic {
    /// Azimuthal winding `m + j`.
    pub fn winding(&self) -> i64 {
        (self.m + self.j).twice() / 2
    }

    /// Jacobi-polynomial evaluation.
    pub fn eval(&self, theta: f64, phi: f64) -> Complex64 {
        let (s, c) = (0.5 * theta).sin_cos();
        let mut ln_mag = self.ln_scale;
        if self.sin_pow > 0 {
            ln_mag += self.sin_pow as f64 * s.abs().ln();
        }
        if self.cos_pow > 0 {
            ln_mag += self.cos_pow as f64 * c.abs().ln();
        }
        let parity = if (s < 0.0 && self.sin_pow % 2 == 1) != (c < 0.0 && self.cos_pow % 2 == 1) {
            -1.0
        } else {
            1.0
        };
        let p = jacobi_p(self.degree, self.sin_pow, self.cos_pow, theta.cos());
        Complex64::from_polar(self.sign * parity * ln_mag.exp() * p, self.winding() as f64 * phi)
    }

    /// `sqrt((2ℓ+1)/4π) e^{i(m+j)φ} d^ℓ_{j,−m}(θ)`.
    pub fn eval_wigner(&self, theta: f64, phi: f64) -> Complex64 {
        let d = wigner_d(self.l, self.j, HalfInt::ZERO - self.m, theta).expect("validated labels");
        let scale = ((2.0 * self.l.value() + 1.0) / (4.0 * PI)).sqrt();
        Complex64::from_polar(scale * d, self.winding() as f64 * phi)
    }

    pub fn at(&self, p: &SphPoint) -> Complex64 {
        self.eval(p.theta, p.phi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeCheck {
    pub j: HalfInt,
    pub m: HalfInt,
    pub max_residual: f64,
}

/// Compare `ⱼY^j_{−m}` with `(−1)^{j−m} sqrt((2j+1)/4π) y^j_m*` on an
/// `n × n` grid (poles included).
pub fn lowest_level_bridge(j: HalfInt, m: HalfInt, n: usize) -> Result<BridgeCheck> {
    if m.twice().abs() > j.twice() || !(j - m).is_integer() {
        return Err(Error::OutOfRange(format!("m = {m} outside spin {j}")));
    }
    let harmonic = monopole_y(j, j, HalfInt::ZERO - m)?;
    let sign = if ((j - m).twice() / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let scale = sign * ((2.0 * j.value() + 1.0) / (4.0 * PI)).sqrt();
    let n = n.max(2);
    let mut max_residual: f64 = 0.0;
    for it in 0..n {
        for ip in 0..n {
            let p = SphPoint::new(PI * it as f64 / (n - 1) as f64, 2.0 * PI * ip as f64 / n as f64);
            let rhs = y_symbol(j, m, &p).conj() * scale;
            max_residual = max_residual.max((harmonic.at(&p) - rhs).norm());
        }
    }
    Ok(BridgeCheck { j, m, max_residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandauCoefficient {
    pub l: HalfInt,
    pub m: HalfInt,
    pub p: i64,
    /// Coefficients of `|0̄>` and `|1̄>` on `|ℓ, m>`.
    pub c: [Complex64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullLandauCode {
    pub n: usize,
    pub j: HalfInt,
    pub l_max: HalfInt,
    pub coeffs: Vec<LandauCoefficient>,
    /// Truncated `‖r̄‖²` for `r = 0, 1`.
    pub norm_sq: [f64; 2],
    /// `1 − ‖r̄‖²`. The untruncated codewords are position-eigenstate sums,
    /// so this goes to `−∞` with `l_max`.
    pub norm_deficit: [f64; 2],
    /// Truncated `<0̄|1̄>`.
    pub overlap: Complex64,
    /// `‖r̄‖²` contributed by each level `ℓ = |j|, …, l_max` (same for both `r`).
    pub level_weights: Vec<f64>,
}

pub fn default_l_max(n: usize, j: HalfInt) -> HalfInt {
    j.abs() + HalfInt::integer(8 * n as i64)
}

/// Coefficients `sqrt(N) (−1)^{pr} ⱼY^ℓ_{pN−j}(π/2, 0)*` for `|j| <= ℓ <= l_max`.
pub fn build_full_landau_code(n: usize, j: HalfInt, l_max: HalfInt) -> Result<FullLandauCode> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if l_max.twice() < j.twice().abs() || !(l_max - j).is_integer() {
        return Err(Error::InvalidParameter(format!("l_max = {l_max} must be >= |j| = {} with l_max − j integer", j.abs())));
    }
    let root_n = (n as f64).sqrt();
    let n2 = 2 * n as i64;
    let mut coeffs = Vec::new();
    let mut level_weights = Vec::new();
    let mut l = j.abs();
    while l.twice() <= l_max.twice() {
        // m = pN − j with |m| <= ℓ, in twice-units.
        let p_lo = (j.twice() - l.twice()).div_euclid(n2);
        let p_hi = (j.twice() + l.twice()).div_euclid(n2);
        let mut weight = 0.0;
        for p in p_lo..=p_hi {
            let m = HalfInt::from_twice(p * n2 - j.twice());
            if m.twice().abs() > l.twice() {
                continue;
            }
            let y = monopole_y(j, l, m)?.eval(PI / 2.0, 0.0).conj() * root_n;
            let sign = if p.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            weight += y.norm_sqr();
            coeffs.push(LandauCoefficient { l, m, p, c: [y, y * sign] });
        }
        level_weights.push(weight);
        l = l + HalfInt::integer(1);
    }
    let norm: f64 = level_weights.iter().sum();
    let overlap = coeffs.iter().map(|k| k.c[0].conj() * k.c[1]).sum();
    Ok(FullLandauCode {
        n,
        j,
        l_max,
        coeffs,
        norm_sq: [norm, norm],
        norm_deficit: [1.0 - norm, 1.0 - norm],
        overlap,
        level_weights,
    })
}

impl FullLandauCode {
    /// Residues `(m + j) mod N` over the support, from integer arithmetic.
    pub fn support_residues(&self) -> Vec<i64> {
        let mut res: Vec<i64> = self
            .coeffs
            .iter()
            .map(|k| ((k.m + self.j).twice() / 2).rem_euclid(self.n as i64))
            .collect();
        res.sort_unstable();
        res.dedup();
        res
    }

    /// The `ℓ`-block of codeword `r` as a spin-`ℓ` vector in the `|ℓ, m>` basis.
    pub fn level_block(&self, l: HalfInt, r: usize) -> StateVec {
        let mut amps = StateVec::zeros(l).amps().clone();
        for k in self.coeffs.iter().filter(|k| k.l == l) {
            amps[l.index_of(k.m).expect("m within level")] = k.c[r];
        }
        StateVec::new(l, amps).expect("dimension matches")
    }

    /// `<0̄|1̄> / (‖0̄‖ ‖1̄‖)`.
    pub fn normalized_overlap(&self) -> Complex64 {
        self.overlap / (self.norm_sq[0] * self.norm_sq[1]).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftVerdict {
    pub l: HalfInt,
    pub m: HalfInt,
    /// `(m + j) mod N`, readable from the support lattice.
    pub residue: i64,
    pub correctable: bool,
    pub trace: Vec<String>,
}

/// Decide whether the momentum kicks of level `ℓ` are correctable.
///
/// The kick `ⱼŶ^ℓ_m` shifts `L3` by `s = m + j`; the codeword support pins
/// `s mod N`. The level is correctable when decoding every residue to its
/// representative in `(−N/2, N/2)` recovers every `s` with `|m| <= ℓ`.
pub fn momentum_shift_analysis(code: &FullLandauCode, l: HalfInt, m: HalfInt) -> Result<ShiftVerdict> {
    let j = code.j;
    if m.twice().abs() > l.twice() || !(l - m).is_integer() || !(m + j).is_integer() {
        return Err(Error::InvalidParameter(format!("shift (ℓ, m) = ({l}, {m}) incompatible with j = {j}")));
    }
    let n = code.n as i64;
    let shift = |mm: HalfInt| (mm + j).twice() / 2;
    let decode = |res: i64| -> Option<i64> {
        if 2 * res < n {
            Some(res)
        } else if 2 * res > n {
            Some(res - n)
        } else {
            None
        }
    };
    let s = shift(m);
    let residue = s.rem_euclid(n);
    let mut trace = vec![
        format!("support lattice: m + j ≡ 0 (mod {n})"),
        format!("kick shifts L3 by s = m + j = {s}; syndrome s mod {n} = {residue}"),
    ];
    let (s_lo, s_hi) = (shift(HalfInt::ZERO - l), shift(l));
    let failures: Vec<i64> = (s_lo..=s_hi).filter(|&t| decode(t.rem_euclid(n)) != Some(t)).collect();
    let correctable = failures.is_empty();
    if correctable {
        trace.push(format!("all shifts in [{s_lo}, {s_hi}] decode uniquely inside (−N/2, N/2)"));
    } else {
        trace.push(format!("shifts {failures:?} in [{s_lo}, {s_hi}] are aliased or ambiguous"));
    }
    Ok(ShiftVerdict { l, m, residue, correctable, trace })
}

/// Number of correctable levels `|j| <= ℓ <= l_max` and the total number
/// of kicks `(ℓ, m)` they contain.
pub fn correctable_shift_count(code: &FullLandauCode) -> (usize, usize) {
    let mut levels = 0;
    let mut kicks = 0;
    let mut l = code.j.abs();
    while l.twice() <= code.l_max.twice() {
        if let Ok(v) = momentum_shift_analysis(code, l, l) {
            if v.correctable {
                levels += 1;
                kicks += l.dim();
            }
        }
        l = l + HalfInt::integer(1);
    }
    (levels, kicks)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicRow {
    pub l: HalfInt,
    pub m: HalfInt,
    pub theta: f64,
    pub phi: f64,
    pub value: Complex64,
}

pub fn harmonic_table(j: HalfInt, lms: &[(HalfInt, HalfInt)], points: &[SphPoint]) -> Result<Vec<HarmonicRow>> {
    let mut rows = Vec::with_capacity(lms.len() * points.len());
    for &(l, m) in lms {
        let y = monopole_y(j, l, m)?;
        rows.extend(points.iter().map(|p| HarmonicRow {
            l,
            m,
            theta: p.theta,
            phi: p.phi,
            value: y.at(p),
        }));
    }
    Ok(rows)
}

/// CSV with header `l,m,theta,phi,re,im`, 17 significant digits.
pub fn harmonic_csv(rows: &[HarmonicRow]) -> String {
    let mut out = String::from("l,m,theta,phi,re,im\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.l, r.m, r.theta, r.phi, r.value.re, r.value.im
        );
    }
    out
}
