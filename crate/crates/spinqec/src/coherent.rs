//! Spin coherent states, their overlaps and rotation matrix elements, sphere
//! quadrature, and operators diagonal in the coherent-state basis.
//!
//! Phase convention: `|θ,φ> = D(φ, θ, -φ)|j,j>`, so that
//! `<j,m|θ,φ> = sqrt(C(2j, j+m)) cos^{j+m}(θ/2) sin^{j-m}(θ/2) e^{i(j-m)φ}`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::rotations::{wrap_angle, EulerAngles, Su2Element};
use crate::special::{gauss_legendre_interval, ln_binomial};
use crate::spin_core::{ladder_operators, l3_operator, lx_operator, ly_operator};
use crate::{Error, HalfInt, Operator, Result, StateVec};

const UNDERFLOW: f64 = 1e-300;

/// A point on the unit sphere in polar coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphPoint {
    pub theta: f64,
    pub phi: f64,
}

impl SphPoint {
    pub const NORTH: SphPoint = SphPoint { theta: 0.0, phi: 0.0 };

    pub const fn new(theta: f64, phi: f64) -> Self {
        SphPoint { theta, phi }
    }

    pub const fn equator(phi: f64) -> Self {
        SphPoint::new(PI / 2.0, phi)
    }

    pub const fn south(phi: f64) -> Self {
        SphPoint::new(PI, phi)
    }

    pub fn from_unit_vector(n: [f64; 3]) -> Self {
        let theta = n[2].clamp(-1.0, 1.0).acos();
        let phi = if n[0] == 0.0 && n[1] == 0.0 {
            0.0
        } else {
            wrap_angle(n[1].atan2(n[0]))
        };
        SphPoint::new(theta, phi)
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn dot(&self, other: &SphPoint) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    /// Stereographic coordinate `z = tan(θ/2) e^{iφ}`.
    pub fn stereographic(&self) -> Result<Complex64> {
        let (s, c) = (0.5 * self.theta).sin_cos();
        if c.abs() < 1e-15 {
            return Err(Error::SouthPole);
        }
        Ok(Complex64::from_polar(s / c, self.phi))
    }

    /// The spinor `(cos(θ/2), e^{iφ} sin(θ/2))`, whose `2j`-fold symmetric
    /// power is the coherent state.
    pub fn spinor(&self) -> [Complex64; 2] {
        let (s, c) = half_angle(self.theta);
        [Complex64::new(c, 0.0), Complex64::from_polar(s, self.phi)]
    }

    /// Image of this point under the SO(3) rotation covered by `u`.
    pub fn rotated(&self, u: &Su2Element) -> SphPoint {
        let m = u.matrix();
        let z = self.spinor();
        let w0 = m[0][0] * z[0] + m[0][1] * z[1];
        let w1 = m[1][0] * z[0] + m[1][1] * z[1];
        // Bloch vector of the rotated spinor.
        let x = 2.0 * (w0.conj() * w1).re;
        let y = 2.0 * (w0.conj() * w1).im;
        let zc = w0.norm_sqr() - w1.norm_sqr();
        SphPoint::from_unit_vector([x, y, zc])
    }
}

/// Real amplitude `sqrt(C(2j, j+m)) cos^{j+m}(θ/2) sin^{j-m}(θ/2)`, the
/// modulus of `<j,m|θ,φ>` for `θ ∈ [0, π]`.
pub fn coherent_modulus(j: HalfInt, m: HalfInt, theta: f64) -> f64 {
    let (s, c) = half_angle(theta);
    let jpm = ((j + m).twice() / 2) as u64;
    let jmm = ((j - m).twice() / 2) as u64;
    let log_c = if jpm == 0 { 0.0 } else { jpm as f64 * c.abs().ln() };
    let log_s = if jmm == 0 { 0.0 } else { jmm as f64 * s.abs().ln() };
    let sign = if (c < 0.0 && jpm % 2 == 1) ^ (s < 0.0 && jmm % 2 == 1) {
        -1.0
    } else {
        1.0
    };
    sign * (0.5 * ln_binomial(j.twice() as u64, jpm) + log_c + log_s).exp()
}

/// `(sin θ/2, cos θ/2)`, exact at the south pole so that antipodal states
/// are exactly orthogonal.
fn half_angle(theta: f64) -> (f64, f64) {
    if theta == PI {
        (1.0, 0.0)
    } else {
        (0.5 * theta).sin_cos()
    }
}

/// `<j,m|θ,φ>`, i.e. the conjugated symbol `y^j_m(Ω)*`.
pub fn coherent_amplitude(j: HalfInt, m: HalfInt, p: &SphPoint) -> Complex64 {
    let k = (j - m).twice() / 2;
    Complex64::from_polar(1.0, k as f64 * p.phi) * coherent_modulus(j, m, p.theta)
}

/// The symbol `y^j_m(Ω) = <θ,φ|j,m>`.
pub fn y_symbol(j: HalfInt, m: HalfInt, p: &SphPoint) -> Complex64 {
    coherent_amplitude(j, m, p).conj()
}

/// A normalized spin coherent state.
#[derive(Clone, Debug)]
pub struct CoherentState {
    pub j: HalfInt,
    pub point: SphPoint,
    pub vec: StateVec,
}

pub fn coherent_state(j: HalfInt, p: SphPoint) -> CoherentState {
    CoherentState {
        j,
        point: p,
        vec: StateVec::from_fn(j, |m| coherent_amplitude(j, m, &p)),
    }
}

/// `z^{2j}` computed as `exp(2j log z)`, with magnitudes below 1e-300 set to
/// zero and flagged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Power {
    pub value: Complex64,
    pub underflow: bool,
}

pub fn pow_2j(z: Complex64, j: HalfInt) -> Power {
    if j.twice() == 0 {
        return Power {
            value: Complex64::new(1.0, 0.0),
            underflow: false,
        };
    }
    let n = j.twice() as f64;
    let log_mag = n * z.norm().ln();
    if log_mag.is_nan() || log_mag <= UNDERFLOW.ln() {
        return Power {
            value: Complex64::new(0.0, 0.0),
            underflow: z != Complex64::new(0.0, 0.0),
        };
    }
    Power {
        value: Complex64::from_polar(log_mag.exp(), n * z.arg()),
        underflow: false,
    }
}

/// Closed-form `<s1|s2>`.
pub fn overlap(s1: &CoherentState, s2: &CoherentState) -> Result<Complex64> {
    if s1.j != s2.j {
        return Err(Error::SpinMismatch {
            left: s1.j,
            right: s2.j,
        });
    }
    Ok(overlap_points(s1.j, &s1.point, &s2.point))
}

/// `<Ω'|Ω> = (cos θ/2 cos θ'/2 + e^{i(φ-φ')} sin θ/2 sin θ'/2)^{2j}`.
pub fn overlap_points(j: HalfInt, bra: &SphPoint, ket: &SphPoint) -> Complex64 {
    let (s1, c1) = half_angle(bra.theta);
    let (s2, c2) = half_angle(ket.theta);
    let base = Complex64::new(c1 * c2, 0.0) + Complex64::from_polar(s1 * s2, ket.phi - bra.phi);
    pow_2j(base, j).value
}

/// `<Ω'|X_R|Ω>` from the closed form in Euler angles.
pub fn rotation_matrix_element(j: HalfInt, out: &SphPoint, r: &EulerAngles, inp: &SphPoint) -> Complex64 {
    rotation_matrix_element_flagged(j, out, r, inp).value
}

pub fn rotation_matrix_element_flagged(
    j: HalfInt,
    out: &SphPoint,
    r: &EulerAngles,
    inp: &SphPoint,
) -> Power {
    let (so, co) = half_angle(out.theta);
    let (si, ci) = half_angle(inp.theta);
    let (sb, cb) = (0.5 * r.beta).sin_cos();
    let sum = 0.5 * (r.alpha + r.gamma);
    let diff = 0.5 * (r.alpha - r.gamma);
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let diag = e(-sum) * (co * ci) + e(sum + inp.phi - out.phi) * (so * si);
    let off = e(-diff + inp.phi) * (co * si) - e(diff - out.phi) * (so * ci);
    pow_2j(diag * cb - off * sb, j)
}

/// `<Ω'|X_U|Ω>` for an SU(2) element, as the `2j`-th power of the spin-1/2
/// matrix element between the two spinors. The double-cover sign of `u` is
/// carried into half-integer spins.
pub fn su2_matrix_element(j: HalfInt, out: &SphPoint, u: &Su2Element, inp: &SphPoint) -> Power {
    let m = u.matrix();
    let z = inp.spinor();
    let w = out.spinor();
    let uz0 = m[0][0] * z[0] + m[0][1] * z[1];
    let uz1 = m[1][0] * z[0] + m[1][1] * z[1];
    pow_2j(w[0].conj() * uz0 + w[1].conj() * uz1, j)
}

/// `<π/2, φ'| e^{-iΘL3} |π/2, φ> = ((e^{-iΘ/2} + e^{iΘ/2} e^{i(φ-φ')})/2)^{2j}`.
pub fn equatorial_matrix_element(j: HalfInt, phi_out: f64, theta_rot: f64, phi_in: f64) -> Complex64 {
    let base = (Complex64::from_polar(1.0, -0.5 * theta_rot)
        + Complex64::from_polar(1.0, 0.5 * theta_rot + phi_in - phi_out))
        * 0.5;
    pow_2j(base, j).value
}

/// Product rule on the sphere: Gauss–Legendre in `t = θ/2 ∈ [0, π/2]`
/// (measure `dΩ = 4 sin t cos t dt dφ`) times a uniform azimuthal grid.
///
/// Every half-angle monomial `cos^a(θ/2) sin^b(θ/2)` is an entire function
/// of `t`, so the rule integrates odd as well as even powers to rounding once
/// the node count covers the degree; the uniform grid is exact for
/// `e^{ikφ}` with `|k| < n_phi`.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    /// Polar angles of the rings.
    pub thetas: Vec<f64>,
    /// Ring weights including the `4 sin t cos t` Jacobian (sum to 2).
    pub ring_weights: Vec<f64>,
    /// Raw Gauss–Legendre weights in `t`.
    pub t_weights: Vec<f64>,
    pub n_phi: usize,
}

impl SphereQuadrature {
    /// A rule resolving integrands of total half-angle degree `half_angle_degree`
    /// and azimuthal modes `|k| <= max_azimuthal`.
    pub fn for_degree(half_angle_degree: usize, max_azimuthal: usize) -> Self {
        Self::with_sizes(theta_nodes_for(half_angle_degree), max_azimuthal + 1)
    }

    pub fn with_sizes(n_theta: usize, n_phi: usize) -> Self {
        let (ts, ws) = gauss_legendre_interval(n_theta.max(1), 0.0, PI / 2.0);
        let ring_weights = ts
            .iter()
            .zip(&ws)
            .map(|(&t, &w)| 4.0 * w * t.sin() * t.cos())
            .collect();
        SphereQuadrature {
            thetas: ts.iter().map(|t| 2.0 * t).collect(),
            ring_weights,
            t_weights: ws,
            n_phi: n_phi.max(1),
        }
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn phis(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_phi).map(move |l| TAU * l as f64 / self.n_phi as f64)
    }

    pub fn phi_weight(&self) -> f64 {
        TAU / self.n_phi as f64
    }

    /// All nodes with their weights.
    pub fn nodes(&self) -> Vec<(SphPoint, f64)> {
        let wphi = self.phi_weight();
        let mut out = Vec::with_capacity(self.n_theta() * self.n_phi);
        for (theta, w) in self.thetas.iter().zip(&self.ring_weights) {
            for phi in self.phis() {
                out.push((SphPoint::new(*theta, phi), w * wphi));
            }
        }
        out
    }

    pub fn integrate<F: Fn(&SphPoint) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes().iter().map(|(p, w)| f(p) * *w).sum()
    }

    /// `∫_0^π cos^a(θ/2) sin^b(θ/2) dθ` on the polar rule.
    pub fn beta_integral(&self, a: u32, b: u32) -> f64 {
        self.thetas
            .iter()
            .zip(&self.t_weights)
            .map(|(&theta, &w)| {
                let (s, c) = (0.5 * theta).sin_cos();
                2.0 * w * c.powi(a as i32) * s.powi(b as i32)
            })
            .sum()
    }
}

/// Polar node count resolving half-angle degree `degree` to rounding.
pub fn theta_nodes_for(degree: usize) -> usize {
    let d = degree as f64;
    (PI * d / 8.0 + 2.0 * d.sqrt()).ceil() as usize + 8
}

/// The default rule for spin `j`: resolves `|Ω><Ω|` products (half-angle
/// degree `4j`) with at least `2j+1` polar nodes and `4j+2` azimuthal nodes.
pub fn sphere_quadrature(j: HalfInt) -> Arc<SphereQuadrature> {
    static CACHE: OnceLock<Mutex<HashMap<i64, Arc<SphereQuadrature>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(j.twice())
        .or_insert_with(|| {
            let tj = j.twice() as usize;
            let n_theta = theta_nodes_for(2 * tj + 2).max(tj + 1);
            Arc::new(SphereQuadrature::with_sizes(n_theta, 2 * tj + 2))
        })
        .clone()
}

/// Band limits of an upper symbol: total half-angle degree and largest
/// azimuthal mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolBand {
    pub half_angle_degree: usize,
    pub max_azimuthal: usize,
}

impl SymbolBand {
    pub const fn azimuthal(k: usize) -> Self {
        SymbolBand {
            half_angle_degree: 0,
            max_azimuthal: k,
        }
    }
}

type Symbol = Arc<dyn Fn(&SphPoint) -> Complex64 + Send + Sync>;

/// An operator `(2j+1)/4π ∫ P(Ω) |Ω><Ω| dΩ` together with its upper symbol.
#[derive(Clone)]
pub struct DiagonalOp {
    pub j: HalfInt,
    pub realized: Operator,
    /// False when the symbol carried no band limit, so the quadrature is a
    /// best-effort approximation.
    pub exact: bool,
    symbol: Symbol,
}

impl std::fmt::Debug for DiagonalOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiagonalOp")
            .field("j", &self.j)
            .field("exact", &self.exact)
            .field("realized", &self.realized)
            .finish()
    }
}

impl DiagonalOp {
    pub fn symbol(&self, p: &SphPoint) -> Complex64 {
        (self.symbol)(p)
    }

    /// Lower symbol `<Ω|O|Ω>`.
    pub fn lower_symbol(&self, p: &SphPoint) -> Complex64 {
        let v = coherent_state(self.j, *p).vec;
        self.realized.sandwich(&v, &v)
    }
}

/// Realize a diagonal operator. With `band = None` the default rule for `j`
/// is used and the result is flagged approximate.
pub fn diagonal_operator<F>(j: HalfInt, symbol: F, band: Option<SymbolBand>) -> DiagonalOp
where
    F: Fn(&SphPoint) -> Complex64 + Send + Sync + 'static,
{
    let tj = j.twice() as usize;
    let quad = match band {
        Some(b) => Arc::new(SphereQuadrature::with_sizes(
            theta_nodes_for(2 * tj + 2 + b.half_angle_degree).max(tj + 1),
            (2 * tj + 2).max(tj + b.max_azimuthal + 1),
        )),
        None => sphere_quadrature(j),
    };
    let realized = realize_on(j, &symbol, &quad);
    DiagonalOp {
        j,
        realized,
        exact: band.is_some(),
        symbol: Arc::new(symbol),
    }
}

/// `O_{m m'} = (2j+1)/4π Σ_t W_t f_m(t) f_{m'}(t) G(t, m'-m)` with
/// `G(t, k) = Σ_φ w_φ P(t, φ) e^{ikφ}`, using `<m|Ω> = f_m(θ) e^{i(j-m)φ}`.
fn realize_on<F: Fn(&SphPoint) -> Complex64>(j: HalfInt, symbol: &F, quad: &SphereQuadrature) -> Operator {
    let dim = j.dim();
    let tj = j.twice();
    let pref = (dim as f64) / (4.0 * PI);
    let wphi = quad.phi_weight();
    let phis: Vec<f64> = quad.phis().collect();
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    for (theta, w) in quad.thetas.iter().zip(&quad.ring_weights) {
        let values: Vec<Complex64> = phis.iter().map(|&phi| symbol(&SphPoint::new(*theta, phi))).collect();
        // G(t, k) for k = m' - m ∈ [-2j, 2j]; index k + 2j.
        let g: Vec<Complex64> = (-tj..=tj)
            .map(|k| {
                phis.iter()
                    .zip(&values)
                    .map(|(&phi, v)| v * Complex64::from_polar(wphi, k as f64 * phi))
                    .sum()
            })
            .collect();
        let f: Vec<f64> = j.ms().map(|m| coherent_modulus(j, m, *theta)).collect();
        for r in 0..dim {
            for c in 0..dim {
                // m - m' = c - r in index units, so k = m' - m = r - c.
                let k = r as i64 - c as i64;
                mat[(r, c)] += g[(k + tj) as usize] * (pref * w * f[r] * f[c]);
            }
        }
    }
    Operator::from_matrix_unchecked(j, mat)
}

/// Momentum-kick analogue `ŷ^j_m = (2j+1)/4π ∫ y^j_m(Ω) |Ω><Ω| dΩ`.
pub fn momentum_kick(j: HalfInt, m: HalfInt) -> Result<DiagonalOp> {
    if j.index_of(m).is_none() {
        return Err(Error::OutOfRange(format!("m = {m} for j = {j}")));
    }
    let band = SymbolBand {
        half_angle_degree: j.twice() as usize,
        max_azimuthal: ((j - m).twice() / 2) as usize,
    };
    Ok(diagonal_operator(j, move |p| y_symbol(j, m, p), Some(band)))
}

/// `L·n` for the unit vector of `p`.
pub fn spin_along(j: HalfInt, p: &SphPoint) -> Operator {
    let n = p.unit_vector();
    let c = |x: f64| Complex64::new(x, 0.0);
    &(&lx_operator(j).scale(c(n[0])) + &ly_operator(j).scale(c(n[1]))) + &l3_operator(j).scale(c(n[2]))
}

/// Max-norm difference between `X_{R(φ,θ,-φ)}` and
/// `e^{z L-} cos^{2 L3}(θ/2) e^{-z̄ L+}` with `z = tan(θ/2) e^{iφ}`.
pub fn disentangle_check(j: HalfInt, p: &SphPoint) -> Result<f64> {
    let z = p.stereographic()?;
    let (lp, lm) = ladder_operators(j);
    let left = nilpotent_exp(&lm, z);
    let right = nilpotent_exp(&lp, -z.conj());
    let c = (0.5 * p.theta).cos();
    let middle = Operator::from_diagonal(j, |m| Complex64::new(c.powf(2.0 * m.value()), 0.0));
    let product = &(&left * &middle) * &right;
    let rotation = crate::rotations::wigner_d_matrix(j, &EulerAngles::new(p.phi, p.theta, -p.phi));
    Ok(product.max_abs_diff(&rotation))
}

/// `exp(z A)` for nilpotent `A` by its terminating Taylor series.
fn nilpotent_exp(a: &Operator, z: Complex64) -> Operator {
    let mut acc = Operator::identity(a.j());
    let mut term = Operator::identity(a.j());
    for k in 1..=a.j().dim() {
        term = (&term * a).scale(z / k as f64);
        acc = &acc + &term;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotations::{haar_random, wigner_d_matrix};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn h(t: i64) -> HalfInt {
        HalfInt::from_twice(t)
    }

    fn random_point(rng: &mut ChaCha8Rng) -> SphPoint {
        let z: f64 = rng.gen_range(-1.0..1.0);
        SphPoint::new(z.acos(), rng.gen_range(0.0..TAU))
    }

    #[test]
    fn poles() {
        let j = h(6);
        let north = coherent_state(j, SphPoint::NORTH).vec;
        assert_eq!(north, StateVec::basis(j, j).unwrap());
        let phi0 = 0.7;
        let south = coherent_state(j, SphPoint::south(phi0)).vec;
        let expected = StateVec::basis(j, HalfInt::ZERO - j)
            .unwrap()
            .scale(Complex64::from_polar(1.0, 2.0 * j.value() * phi0));
        assert!(south.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn coherent_state_is_rotated_highest_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for tj in 0..=16 {
            let j = h(tj);
            let p = random_point(&mut rng);
            let v = coherent_state(j, p).vec;
            assert!(v.is_normalized(1e-12));
            let d = wigner_d_matrix(j, &EulerAngles::new(p.phi, p.theta, -p.phi));
            let rotated = d.apply(&StateVec::basis(j, j).unwrap());
            assert!(v.max_abs_diff(&rotated) < 1e-12, "j={j}");
        }
    }

    #[test]
    fn eigenvector_of_spin_along_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let j = h(4);
        let p = random_point(&mut rng);
        let v = coherent_state(j, p).vec;
        let lv = spin_along(j, &p).apply(&v);
        assert!((lv.amps() - v.amps() * Complex64::new(j.value(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn overlap_examples() {
        let j = h(2);
        let a = coherent_state(j, SphPoint::new(0.4, 1.2));
        assert!((overlap(&a, &a).unwrap() - 1.0).norm() < 1e-15);
        let n = coherent_state(j, SphPoint::NORTH);
        let s = coherent_state(j, SphPoint::south(0.3));
        assert_eq!(overlap(&n, &s).unwrap(), Complex64::new(0.0, 0.0));
        let x = coherent_state(j, SphPoint::equator(0.0));
        assert!((overlap(&n, &x).unwrap().norm() - 0.5).abs() < 1e-15);
        let other = coherent_state(h(4), SphPoint::NORTH);
        assert!(overlap(&n, &other).is_err());
    }

    #[test]
    fn matrix_element_examples() {
        let j = h(9);
        let r = EulerAngles::new(0.3, 1.1, -0.8);
        let v = rotation_matrix_element(j, &SphPoint::NORTH, &r, &SphPoint::NORTH);
        let expected = Complex64::from_polar((0.55f64).cos().powi(9), -4.5 * (0.3 - 0.8));
        assert!((v - expected).norm() < 1e-14);
        let a = SphPoint::new(0.4, 2.0);
        let b = SphPoint::new(2.1, -0.3);
        let id = rotation_matrix_element(j, &a, &EulerAngles::IDENTITY, &b);
        assert!((id - overlap_points(j, &a, &b)).norm() < 1e-14);
    }

    #[test]
    fn equatorial_examples() {
        let j = h(20);
        assert!((equatorial_matrix_element(j, 0.3, 0.0, 0.3) - 1.0).norm() < 1e-14);
        assert!((equatorial_matrix_element(j, 0.3 + 0.5, 0.5, 0.3).norm() - 1.0).abs() < 1e-14);
        let theta = PI / 6.0;
        let v = equatorial_matrix_element(j, 0.2 + PI, theta, 0.2);
        let expected = ((1.0 - theta.cos()) / 2.0).powi(10);
        assert!((v.norm() - expected).abs() < 1e-12 * expected);
        let brute = wigner_d_matrix(j, &EulerAngles::z(theta)).sandwich(
            &coherent_state(j, SphPoint::equator(0.2 + PI)).vec,
            &coherent_state(j, SphPoint::equator(0.2)).vec,
        );
        assert!((brute.norm() - expected).abs() < 1e-15);
        let general = rotation_matrix_element(
            j,
            &SphPoint::equator(1.0),
            &EulerAngles::z(0.7),
            &SphPoint::equator(0.4),
        );
        assert!((general - equatorial_matrix_element(j, 1.0, 0.7, 0.4)).norm() < 1e-12);
    }

    #[test]
    fn quadrature_examples() {
        let q = sphere_quadrature(h(8));
        let area = q.integrate(|_| Complex64::new(1.0, 0.0));
        assert!((area.re - 4.0 * PI).abs() < 1e-12);
        // Γ(5/2)Γ(3/2)/Γ(4) = π/16.
        assert!((q.beta_integral(4, 2) - PI / 16.0).abs() < 1e-14);
        for tj in 0..=30 {
            let j = h(tj);
            let one = diagonal_operator(j, |_| Complex64::new(1.0, 0.0), Some(SymbolBand::azimuthal(0)));
            assert!(one.realized.max_abs_diff(&Operator::identity(j)) < 1e-10, "j={j}");
        }
    }

    #[test]
    fn azimuthal_selection_rule() {
        let j = h(6);
        let op = diagonal_operator(j, |p| Complex64::from_polar(1.0, p.phi), Some(SymbolBand::azimuthal(1)));
        let m = op.realized.matrix();
        for r in 0..j.dim() {
            for c in 0..j.dim() {
                if c == r + 1 {
                    assert!(m[(r, c)].norm() > 1e-3);
                } else {
                    assert!(m[(r, c)].norm() < 1e-14, "({r},{c})");
                }
            }
        }
    }

    #[test]
    fn superdiagonal_entries_match_beta_functions() {
        // <m|Z|m-1> = (2j+1)/4π · 2π · sqrt(C(2j,j+m)C(2j,j+m-1)) · 4 ∫ c^{2j+2m} s^{4j-2j-2m+2} dt
        // which is a beta function with half-integer arguments.
        let j = h(6);
        let op = diagonal_operator(j, |p| Complex64::from_polar(1.0, p.phi), Some(SymbolBand::azimuthal(1)));
        for r in 0..j.dim() - 1 {
            let m = j.m_at(r);
            let mm = j.m_at(r + 1);
            let a = ((j + m).twice() / 2 + (j + mm).twice() / 2) as f64;
            let b = ((j - m).twice() / 2 + (j - mm).twice() / 2) as f64;
            // 4 ∫_0^{π/2} c^{a+1} s^{b+1} dt = 2 B((a+2)/2, (b+2)/2)
            let beta = 2.0 * (ln_gamma((a + 2.0) / 2.0) + ln_gamma((b + 2.0) / 2.0) - ln_gamma((a + b + 4.0) / 2.0)).exp();
            let coeff = (0.5 * (ln_binomial(6, ((j + m).twice() / 2) as u64) + ln_binomial(6, ((j + mm).twice() / 2) as u64))).exp();
            let expected = (j.dim() as f64) / (4.0 * PI) * TAU * coeff * beta;
            assert!((op.realized.matrix()[(r, r + 1)].re - expected).abs() < 1e-13, "row {r}");
        }
    }

    fn ln_gamma(x: f64) -> f64 {
        // x is a positive multiple of 1/2 here.
        let twice = (2.0 * x).round() as i64;
        if twice % 2 == 0 {
            crate::special::ln_factorial((twice / 2 - 1) as u64)
        } else {
            // Γ(n + 1/2) = (2n)! sqrt(π) / (4^n n!)
            let n = (twice - 1) / 2;
            crate::special::ln_factorial(2 * n as u64) + 0.5 * PI.ln()
                - n as f64 * 4f64.ln()
                - crate::special::ln_factorial(n as u64)
        }
    }

    #[test]
    fn lower_symbol_converges() {
        let mut errors = Vec::new();
        for jv in [4, 8, 16, 32] {
            let j = HalfInt::integer(jv);
            let op = diagonal_operator(
                j,
                |p| Complex64::new(p.theta.sin() * p.phi.cos(), 0.0),
                Some(SymbolBand {
                    half_angle_degree: 2,
                    max_azimuthal: 1,
                }),
            );
            assert!(op.realized.is_hermitian(1e-12));
            let grid = sphere_quadrature(h(6)).nodes();
            let err = grid
                .iter()
                .map(|(p, _)| (op.lower_symbol(p) - op.symbol(p)).norm())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    }

    #[test]
    fn lx_has_upper_symbol_proportional_to_nx() {
        let j = h(10);
        let op = diagonal_operator(
            j,
            |p| Complex64::new(p.theta.sin() * p.phi.cos(), 0.0),
            Some(SymbolBand {
                half_angle_degree: 2,
                max_azimuthal: 1,
            }),
        );
        let lx = lx_operator(j).scale(Complex64::new(1.0 / (j.value() + 1.0), 0.0));
        assert!(op.realized.max_abs_diff(&lx) < 1e-12);
    }

    #[test]
    fn momentum_kick_is_built() {
        let j = h(4);
        let kick = momentum_kick(j, HalfInt::integer(1)).unwrap();
        assert!(kick.exact);
        assert!(kick.realized.max_abs() > 0.0);
        assert!(momentum_kick(j, HalfInt::integer(3)).is_err());
    }

    #[test]
    fn disentangling_examples() {
        assert_eq!(disentangle_check(h(4), &SphPoint::new(0.0, 0.7)).unwrap(), 0.0);
        assert!(disentangle_check(h(1), &SphPoint::new(1.3, 2.2)).unwrap() < 1e-12);
        assert!(disentangle_check(h(14), &SphPoint::new(2.0, 1.0)).unwrap() < 1e-9);
        assert_eq!(disentangle_check(h(2), &SphPoint::south(0.0)), Err(Error::SouthPole));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn phase_and_projector_covariance(seed in any::<u64>(), tj in 0i64..=16) {
            let j = h(tj);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_point(&mut rng);
            let r = haar_random(seed ^ 0x5151);
            let u = r.to_su2();
            let rp = p.rotated(&u);
            let d = wigner_d_matrix(j, &r);
            let v = coherent_state(j, p).vec;
            let w = coherent_state(j, rp).vec;
            let rotated = d.apply(&v);
            prop_assert!((w.inner(&rotated).norm() - 1.0).abs() < 1e-10);
            let proj = |x: &StateVec| x.amps() * x.amps().adjoint();
            prop_assert!(crate::spin_core::max_modulus((proj(&rotated) - proj(&w)).iter()) < 1e-10);
        }

        #[test]
        fn z_rotation_phase_law(theta in 0.0f64..PI, phi in 0.0f64..TAU, dphi in -4.0f64..4.0, tj in 0i64..=20) {
            let j = h(tj);
            let lhs = wigner_d_matrix(j, &EulerAngles::z(dphi)).apply(&coherent_state(j, SphPoint::new(theta, phi)).vec);
            let rhs = coherent_state(j, SphPoint::new(theta, phi + dphi)).vec.scale(Complex64::from_polar(1.0, -j.value() * dphi));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn overlap_modulus_law(seed in any::<u64>(), tj in 0i64..=40) {
            let j = h(tj);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_point(&mut rng);
            let b = random_point(&mut rng);
            let dot = coherent_state(j, a).vec.inner(&coherent_state(j, b).vec);
            let law = ((1.0 + a.dot(&b)) / 2.0).powf(j.value());
            prop_assert!((dot.norm() - law).abs() < 1e-12);
            prop_assert!((overlap_points(j, &a, &b) - dot).norm() < 1e-12);
        }

        #[test]
        fn closed_form_matches_su2_form(seed in any::<u64>(), tj in 0i64..=20) {
            let j = h(tj);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_point(&mut rng);
            let b = random_point(&mut rng);
            let r = haar_random(seed);
            let x = rotation_matrix_element(j, &a, &r, &b);
            let y = su2_matrix_element(j, &a, &r.to_su2(), &b).value;
            prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1e-3));
        }
    }
}
