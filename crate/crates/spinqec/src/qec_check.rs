//! Approximate Knill–Laflamme checks of coherent-state codes against sets of
//! rotation errors, and the correctable-angle budgets that follow from the
//! overlap law.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::pow_2j;
use crate::lll_codes::Codewords;
use crate::rotations::{su2_representation, EulerAngles, Sign, Su2Element};
use crate::{Error, HalfInt, Result};

/// Pairs above this count are thinned by stratified sampling.
pub const PAIR_CAP: usize = 10_000;

const FAMILY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorKind {
    /// `e^{-iΘL3}` with `|Θ| ≤ theta_max`.
    EquatorialZ { theta_max: f64 },
    /// `R(φ0, θ, -φ0)`: rotations about a fixed equatorial axis, `|θ| ≤ theta_max`.
    ConjugatedY { phi0: f64, theta_max: f64 },
    /// `Rx(χ) Rz(α) Rx(-χ)` with `|α| ≤ alpha_max`: z-rotations conjugated by a
    /// fixed x-rotation, for the `d = 2` equatorial code.
    ConjugatedZaboutX { alpha_max: f64, x_angle: f64 },
    ExplicitList { rotations: Vec<EulerAngles> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSet {
    pub kind: ErrorKind,
    pub samples: usize,
}

impl ErrorSet {
    pub fn new(kind: ErrorKind, samples: usize) -> Self {
        ErrorSet { kind, samples }
    }

    pub fn identity_only() -> Self {
        ErrorSet::new(
            ErrorKind::ExplicitList {
                rotations: vec![EulerAngles::IDENTITY],
            },
            1,
        )
    }

    /// Whether products `R^{-1}R'` of members stay in the same family.
    pub fn closed_under_composition(&self) -> bool {
        !matches!(self.kind, ErrorKind::ExplicitList { .. })
    }

    fn element(&self, t: f64) -> Su2Element {
        match self.kind {
            ErrorKind::EquatorialZ { .. } => EulerAngles::z(t).to_su2(),
            ErrorKind::ConjugatedY { phi0, .. } => EulerAngles::new(phi0, t, -phi0).to_su2(),
            ErrorKind::ConjugatedZaboutX { x_angle, .. } => {
                Su2Element::x_rotation(x_angle) * EulerAngles::z(t).to_su2() * Su2Element::x_rotation(-x_angle)
            }
            ErrorKind::ExplicitList { .. } => unreachable!("explicit lists carry their own elements"),
        }
    }

    fn range(&self) -> Option<f64> {
        match self.kind {
            ErrorKind::EquatorialZ { theta_max } | ErrorKind::ConjugatedY { theta_max, .. } => Some(theta_max),
            ErrorKind::ConjugatedZaboutX { alpha_max, .. } => Some(alpha_max),
            ErrorKind::ExplicitList { .. } => None,
        }
    }

    /// Sampled members: an inclusive grid of `samples` parameters on
    /// `[-max, max]` followed by `⌈samples/4⌉` seeded uniform draws.
    pub fn members(&self, seed: u64) -> Vec<Su2Element> {
        if let ErrorKind::ExplicitList { rotations } = &self.kind {
            return rotations.iter().map(EulerAngles::to_su2).collect();
        }
        let max = self.range().expect("parametrized family");
        let n = self.samples.max(1);
        let mut params: Vec<f64> = if n == 1 {
            vec![0.0]
        } else {
            (0..n).map(|i| -max + 2.0 * max * i as f64 / (n - 1) as f64).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if max > 0.0 {
            params.extend((0..n.div_ceil(4)).map(|_| rng.gen_range(-max..=max)));
        }
        params.into_iter().map(|t| self.element(t)).collect()
    }

    /// Whether `t` lies in the one-parameter family of this set.
    pub fn contains(&self, t: &Su2Element) -> bool {
        let (a, b) = (t.a(), t.b());
        match self.kind {
            ErrorKind::EquatorialZ { .. } => b.norm() <= FAMILY_TOL,
            ErrorKind::ConjugatedY { phi0, .. } => {
                a.im.abs() <= FAMILY_TOL && (b * Complex64::from_polar(1.0, -phi0)).im.abs() <= FAMILY_TOL
            }
            ErrorKind::ConjugatedZaboutX { x_angle, .. } => {
                // Axis n = (0, -sin χ, cos χ): b = s n_y and Im a = -s n_z.
                let (ny, nz) = (-x_angle.sin(), x_angle.cos());
                b.im.abs() <= FAMILY_TOL && (a.im * ny + b.re * nz).abs() <= FAMILY_TOL
            }
            ErrorKind::ExplicitList { .. } => true,
        }
    }
}

/// Pair index list: all pairs when at most [`PAIR_CAP`], otherwise the four
/// corner pairs plus a stratified draw of `PAIR_CAP / n` partners per row.
pub fn pair_indices(n: usize, seed: u64) -> Vec<(usize, usize)> {
    if n * n <= PAIR_CAP {
        return (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).collect();
    }
    let per_row = (PAIR_CAP / n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut pairs = vec![(0, 0), (0, n - 1), (n - 1, 0), (n - 1, n - 1)];
    for i in 0..n {
        for s in 0..per_row {
            let lo = s * n / per_row;
            let hi = ((s + 1) * n / per_row).max(lo + 1);
            pairs.push((i, rng.gen_range(lo..hi)));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub r: EulerAngles,
    pub r_prime: EulerAngles,
    /// Canonical Euler angles of `T = R^{-1}R'`.
    pub t: EulerAngles,
    pub delta: f64,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KLReport {
    pub delta_star: f64,
    pub eps_star: f64,
    pub worst_pair: (EulerAngles, EulerAngles),
    pub worst_delta_pair: (EulerAngles, EulerAngles),
    pub pairs: Vec<PairRecord>,
    /// Whether every sampled `T` stayed in the error family.
    pub closure_holds: bool,
    /// Largest closed-form vs brute-force discrepancy, when requested.
    pub brute_force_residual: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KlOptions {
    pub seed: u64,
    /// Also evaluate every matrix element by the D-matrix sandwich.
    pub brute_force: bool,
}

pub fn kl_check(code: &Codewords, errs: &ErrorSet, seed: u64) -> Result<KLReport> {
    kl_check_with(code, errs, &KlOptions { seed, brute_force: false })
}

struct PairEval {
    record: PairRecord,
    in_family: bool,
    brute: f64,
}

pub fn kl_check_with(code: &Codewords, errs: &ErrorSet, opts: &KlOptions) -> Result<KLReport> {
    let k = code.dim();
    if k < 2 {
        return Err(Error::InvalidParameter("code dimension must be at least 2".into()));
    }
    let members = errs.members(opts.seed);
    if members.is_empty() {
        return Err(Error::InvalidParameter("error set is empty".into()));
    }
    let pairs = pair_indices(members.len(), opts.seed);
    let j = code.j();
    let evals: Vec<PairEval> = pairs
        .par_iter()
        .map(|&(i, l)| {
            let t = members[i].inverse() * members[l];
            let m = logical_matrix(code, &t);
            let (delta, eps) = discrepancies(&m);
            let brute = if opts.brute_force {
                let op = su2_representation(j, &t);
                let mut worst: f64 = 0.0;
                for (row, ba) in m.iter().zip(&code.basis) {
                    for (value, bb) in row.iter().zip(&code.basis) {
                        worst = worst.max((op.sandwich(ba, bb) - value).norm());
                    }
                }
                worst
            } else {
                0.0
            };
            PairEval {
                record: PairRecord {
                    r: members[i].to_euler().0,
                    r_prime: members[l].to_euler().0,
                    t: t.to_euler().0,
                    delta,
                    eps,
                },
                in_family: !errs.closed_under_composition() || errs.contains(&t),
                brute,
            }
        })
        .collect();

    let mut report = KLReport {
        delta_star: 0.0,
        eps_star: 0.0,
        worst_pair: (evals[0].record.r, evals[0].record.r_prime),
        worst_delta_pair: (evals[0].record.r, evals[0].record.r_prime),
        pairs: Vec::with_capacity(evals.len()),
        closure_holds: true,
        brute_force_residual: opts.brute_force.then_some(0.0),
    };
    for e in evals {
        if e.record.eps > report.eps_star {
            report.eps_star = e.record.eps;
            report.worst_pair = (e.record.r, e.record.r_prime);
        }
        if e.record.delta > report.delta_star {
            report.delta_star = e.record.delta;
            report.worst_delta_pair = (e.record.r, e.record.r_prime);
        }
        report.closure_holds &= e.in_family;
        if let Some(b) = report.brute_force_residual.as_mut() {
            *b = b.max(e.brute);
        }
        report.pairs.push(e.record);
    }
    Ok(report)
}

/// `<a| X_T |b>` for all codeword pairs.
pub fn logical_matrix(code: &Codewords, t: &Su2Element) -> Vec<Vec<Complex64>> {
    let k = code.dim();
    (0..k)
        .map(|a| (0..k).map(|b| code.matrix_element(a, t, b)).collect())
        .collect()
}

/// Largest spread of the diagonal and largest off-diagonal magnitude.
fn discrepancies(m: &[Vec<Complex64>]) -> (f64, f64) {
    let k = m.len();
    let mut delta: f64 = 0.0;
    let mut eps: f64 = 0.0;
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            delta = delta.max((m[a][a] - m[b][b]).norm());
            eps = eps.max(m[a][b].norm());
        }
    }
    (delta, eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectableAngle {
    /// Allowed `|Θ|` for the product `T = R^{-1}R'`.
    pub t_budget: f64,
    /// Allowed `|Θ|` for a single error: half of `t_budget`.
    pub single: f64,
    pub no_budget: bool,
}

/// `2π/d − arccos(2ε^{1/j} − 1)`; for `d = 2` this equals the antipodal
/// bound `arccos(1 − 2ε^{1/j})`.
pub fn correctable_angle(j: HalfInt, d: usize, eps: f64) -> Result<CorrectableAngle> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if d < 2 || j.twice() <= 0 {
        return Err(Error::InvalidParameter(format!("need d >= 2 and j > 0, got d = {d}, j = {j}")));
    }
    let arg = 2.0 * eps.powf(1.0 / j.value()) - 1.0;
    let budget = TAU / d as f64 - arg.clamp(-1.0, 1.0).acos();
    if budget <= 0.0 {
        return Ok(CorrectableAngle {
            t_budget: 0.0,
            single: 0.0,
            no_budget: true,
        });
    }
    Ok(CorrectableAngle {
        t_budget: budget,
        single: 0.5 * budget,
        no_budget: false,
    })
}

/// `((1 − cos 2θ0)/2)^j`, the antipodal off-diagonal bound for
/// conjugated-y errors with `|θ| ≤ θ0`.
pub fn antipodal_offdiag_bound(j: HalfInt, theta0: f64) -> f64 {
    ((1.0 - (2.0 * theta0).cos()) / 2.0).powf(j.value())
}

/// `((1 + cos(2π/d − Θ_T))/2)^j` for equatorial errors whose product angle
/// is at most `theta_t_max`.
pub fn equatorial_offdiag_bound(j: HalfInt, d: usize, theta_t_max: f64) -> f64 {
    let gap = (TAU / d as f64 - theta_t_max).max(0.0);
    ((1.0 + gap.cos()) / 2.0).powf(j.value())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalRow {
    pub t: EulerAngles,
    pub sign: Sign,
    pub entries: Vec<(f64, f64)>,
}

impl DiagonalRow {
    pub fn entry(&self, k: usize) -> Complex64 {
        Complex64::new(self.entries[k].0, self.entries[k].1)
    }
}

/// `<k̄| X_T |k̄>` over the sampled products of an error set.
pub fn diagonal_scan(code: &Codewords, errs: &ErrorSet, seed: u64) -> Vec<DiagonalRow> {
    let members = errs.members(seed);
    pair_indices(members.len(), seed)
        .par_iter()
        .map(|&(i, l)| {
            let t = members[i].inverse() * members[l];
            let (euler, sign) = t.to_euler();
            DiagonalRow {
                t: euler,
                sign,
                entries: (0..code.dim())
                    .map(|k| {
                        let v = code.matrix_element(k, &t, k);
                        (v.re, v.im)
                    })
                    .collect(),
            }
        })
        .collect()
}

/// The two `d = 2` diagonal entries
/// `(cos((α+γ)/2) cos(β/2) ± i sin((α−γ)/2) sin(β/2))^{2j}`, times the
/// SU(2) sign of the triple in the spin-j irrep.
pub fn d2_diagonal_formula(j: HalfInt, t: &EulerAngles, sign: Sign) -> (Complex64, Complex64) {
    let re = (0.5 * (t.alpha + t.gamma)).cos() * (0.5 * t.beta).cos();
    let im = (0.5 * (t.alpha - t.gamma)).sin() * (0.5 * t.beta).sin();
    let s = sign.in_irrep(j);
    (
        pow_2j(Complex64::new(re, im), j).value * s,
        pow_2j(Complex64::new(re, -im), j).value * s,
    )
}

/// Rotations by `|angle| ≤ max_angle` about an axis tilted by `tilt` from
/// `z` toward `x`, as an explicit error list.
pub fn tilted_axis_errors(tilt: f64, max_angle: f64, samples: usize) -> ErrorSet {
    let n = samples.max(2);
    let (st, ct) = tilt.sin_cos();
    let rotations = (0..n)
        .map(|i| {
            let angle = -max_angle + 2.0 * max_angle * i as f64 / (n - 1) as f64;
            let (s, c) = (0.5 * angle).sin_cos();
            // exp(-i angle n·σ/2) with n = (sin tilt, 0, cos tilt).
            let u = Su2Element::new(Complex64::new(c, -s * ct), Complex64::new(0.0, -s * st))
                .expect("unit determinant");
            u.to_euler().0
        })
        .collect();
    ErrorSet::new(ErrorKind::ExplicitList { rotations }, n)
}

/// Bisection for `|Θ|` where `((1 − cos Θ)/2)^j = ε` on `[0, π]`.
pub fn antipodal_angle_by_root(j: HalfInt, eps: f64) -> f64 {
    let f = |x: f64| ((1.0 - x.cos()) / 2.0).powf(j.value()) - eps;
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
