//! Finite GKP codes: a `K`-level logical qudit in `C^N`, `N = K r1 r2`.
//!
//! Clock and shift act as `X|x> = |x+1>` and `Z|x> = ω^x |x>` with
//! `ω = e^{2πi/N}`, so `ZX = ωXZ`. Pauli words keep their phase as an
//! integer exponent of `e^{iπ/N}`; floating point enters only when a word
//! acts on a state. Qudit states reuse [`StateVec`] with `2j + 1 = N`,
//! index `x` holding the amplitude of `|x>`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, HalfInt, Operator, Result, StateVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GkpParams {
    pub k: usize,
    pub r1: usize,
    pub r2: usize,
}

impl GkpParams {
    pub fn new(k: usize, r1: usize, r2: usize) -> Result<Self> {
        if k < 2 || r1 < 1 || r2 < 1 {
            return Err(Error::InvalidParameter(format!("need K >= 2, r1, r2 >= 1; got ({k}, {r1}, {r2})")));
        }
        Ok(GkpParams { k, r1, r2 })
    }

    /// Physical dimension `K r1 r2`.
    pub fn n(&self) -> usize {
        self.k * self.r1 * self.r2
    }

    /// Both `r1` and `r2` odd: the correctable errors tile `C^N` exactly.
    pub fn perfect(&self) -> bool {
        self.r1 % 2 == 1 && self.r2 % 2 == 1
    }

    /// `|a| < r1/2` and `|b| < r2/2`.
    pub fn in_window(&self, a: i64, b: i64) -> bool {
        2 * a.unsigned_abs() < self.r1 as u64 && 2 * b.unsigned_abs() < self.r2 as u64
    }

    /// Every error inside the correctable window.
    pub fn window(&self) -> Vec<(i64, i64)> {
        let ra = (self.r1 as i64 - 1) / 2;
        let rb = (self.r2 as i64 - 1) / 2;
        (-ra..=ra).flat_map(|a| (-rb..=rb).map(move |b| (a, b))).collect()
    }

    /// All parameter sets with `K r1 r2 <= max_n`.
    pub fn all_up_to(max_n: usize) -> Vec<GkpParams> {
        let mut out = Vec::new();
        for k in 2..=max_n {
            for r1 in 1..=max_n / k {
                for r2 in 1..=max_n / (k * r1) {
                    out.push(GkpParams { k, r1, r2 });
                }
            }
        }
        out
    }
}

/// `e^{iπ phase/N} X^a Z^b` on `C^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliWord {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub phase: usize,
}

impl PauliWord {
    pub fn new(n: usize, a: i64, b: i64) -> Self {
        Self::with_phase(n, a, b, 0)
    }

    pub fn with_phase(n: usize, a: i64, b: i64, phase: i64) -> Self {
        let ni = n as i64;
        PauliWord {
            n,
            a: a.rem_euclid(ni) as usize,
            b: b.rem_euclid(ni) as usize,
            phase: phase.rem_euclid(2 * ni) as usize,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, 0, 0)
    }

    /// `ω^c` as a word: phase exponent `2c`.
    pub fn omega_power(n: usize, c: i64) -> Self {
        Self::with_phase(n, 0, 0, 2 * c)
    }

    /// `(X^a Z^b)(X^a' Z^b') = ω^{a'b} X^{a+a'} Z^{b+b'}`.
    pub fn mul(&self, other: &PauliWord) -> PauliWord {
        assert_eq!(self.n, other.n, "Pauli words on different dimensions");
        let phase = self.phase as i64 + other.phase as i64 + 2 * (other.a as i64 * self.b as i64);
        Self::with_phase(self.n, (self.a + other.a) as i64, (self.b + other.b) as i64, phase)
    }

    /// `(X^a Z^b)^{-1} = ω^{ab} X^{-a} Z^{-b}`.
    pub fn inverse(&self) -> PauliWord {
        let phase = -(self.phase as i64) + 2 * (self.a as i64 * self.b as i64);
        Self::with_phase(self.n, -(self.a as i64), -(self.b as i64), phase)
    }

    pub fn pow(&self, k: u64) -> PauliWord {
        (0..k).fold(Self::identity(self.n), |acc, _| acc.mul(self))
    }

    pub fn is_identity(&self) -> bool {
        self.a == 0 && self.b == 0 && self.phase == 0
    }

    /// Equal as operators up to a global phase.
    pub fn same_up_to_phase(&self, other: &PauliWord) -> bool {
        self.n == other.n && self.a == other.a && self.b == other.b
    }

    pub fn phase_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, PI * self.phase as f64 / self.n as f64)
    }

    /// `(W ψ)[x] = e^{iπ p/N} ω^{b(x−a)} ψ[x−a]`.
    pub fn apply(&self, v: &StateVec) -> StateVec {
        let n = self.n;
        assert_eq!(v.j().dim(), n, "state dimension does not match the word");
        let amps = v.amps();
        let global = self.phase_factor();
        let mut out = amps.clone();
        for x in 0..n {
            let src = (x + n - self.a) % n;
            let e = (self.b * src) % n;
            out[x] = global * Complex64::from_polar(1.0, TAU * e as f64 / n as f64) * amps[src];
        }
        StateVec::new(v.j(), out).expect("same dimension")
    }

    pub fn to_operator(&self) -> Operator {
        let n = self.n;
        let j = qudit_spin(n);
        let mut m = DMatrix::zeros(n, n);
        for x in 0..n {
            let e = (self.b * x) % n;
            m[((x + self.a) % n, x)] = self.phase_factor() * Complex64::from_polar(1.0, TAU * e as f64 / n as f64);
        }
        Operator::new(j, m).expect("square matrix of the qudit dimension")
    }
}

fn qudit_spin(n: usize) -> HalfInt {
    HalfInt::from_twice(n as i64 - 1)
}

/// Clock and shift matrices `(X, Z)` on `C^N`.
pub fn clock_shift(n: usize) -> Result<(Operator, Operator)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("qudit dimension must be at least 2, got {n}")));
    }
    Ok((PauliWord::new(n, 1, 0).to_operator(), PauliWord::new(n, 0, 1).to_operator()))
}

/// `|x>` in `C^N`.
pub fn position_ket(n: usize, x: usize) -> StateVec {
    let j = qudit_spin(n);
    StateVec::from_fn(j, |m| {
        if j.index_of(m) == Some(x % n) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `|p> = N^{-1/2} Σ_x ω^{xp} |x>`.
pub fn momentum_ket(n: usize, p: usize) -> StateVec {
    let j = qudit_spin(n);
    let scale = 1.0 / (n as f64).sqrt();
    StateVec::from_fn(j, |m| {
        let x = j.index_of(m).expect("m in range");
        Complex64::from_polar(scale, TAU * ((x * p) % n) as f64 / n as f64)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GkpCode {
    pub params: GkpParams,
    /// `|x̄ = j> = r2^{-1/2} Σ_n |(Kn + j) r1>`.
    pub position: Vec<StateVec>,
    /// `|p̄ = j> = r1^{-1/2} Σ_n |p = (Kn + j) r2>`.
    pub momentum: Vec<StateVec>,
    pub xbar: PauliWord,
    pub zbar: PauliWord,
    /// `X^{K r1}` and `Z^{K r2}`.
    pub stabilizers: [PauliWord; 2],
}

pub fn build_gkp_code(p: GkpParams) -> GkpCode {
    let n = p.n();
    let position = (0..p.k)
        .map(|l| {
            let support = position_support(&p, l);
            let c = 1.0 / (p.r2 as f64).sqrt();
            let mut v = position_ket(n, 0).amps().clone();
            v.fill(Complex64::new(0.0, 0.0));
            for x in support {
                v[x] = Complex64::new(c, 0.0);
            }
            StateVec::new(qudit_spin(n), v).expect("qudit dimension")
        })
        .collect();
    let momentum = (0..p.k)
        .map(|l| {
            let c = Complex64::new(1.0 / (p.r1 as f64).sqrt(), 0.0);
            (0..p.r1).fold(StateVec::zeros(qudit_spin(n)), |acc, m| {
                acc.add_scaled(c, &momentum_ket(n, (p.k * m + l) * p.r2))
            })
        })
        .collect();
    GkpCode {
        params: p,
        position,
        momentum,
        xbar: PauliWord::new(n, p.r1 as i64, 0),
        zbar: PauliWord::new(n, 0, p.r2 as i64),
        stabilizers: [
            PauliWord::new(n, (p.k * p.r1) as i64, 0),
            PauliWord::new(n, 0, (p.k * p.r2) as i64),
        ],
    }
}

/// Positions `(Kn + j) r1`, `n = 0..r2`.
pub fn position_support(p: &GkpParams, j: usize) -> Vec<usize> {
    (0..p.r2).map(|m| (p.k * m + j) * p.r1).collect()
}

impl GkpCode {
    pub fn n(&self) -> usize {
        self.params.n()
    }

    /// `Z̄X̄ (X̄Z̄)^{-1}` as an exact word; equals `e^{2πi/K}` for every code.
    pub fn logical_commutator(&self) -> PauliWord {
        self.zbar.mul(&self.xbar).mul(&self.xbar.mul(&self.zbar).inverse())
    }

    /// Max deviation of `|p̄>` from `K^{-1/2} Σ_x e^{2πi xp/K} |x̄>`.
    pub fn fourier_residual(&self) -> f64 {
        let k = self.params.k;
        let scale = 1.0 / (k as f64).sqrt();
        (0..k)
            .map(|p| {
                let built = (0..k).fold(StateVec::zeros(qudit_spin(self.n())), |acc, x| {
                    acc.add_scaled(
                        Complex64::from_polar(scale, TAU * ((x * p) % k) as f64 / k as f64),
                        &self.position[x],
                    )
                });
                built.max_abs_diff(&self.momentum[p])
            })
            .fold(0.0, f64::max)
    }

    /// Normalized `Σ_j c_j |x̄ = j>`.
    pub fn logical_state(&self, coeffs: &[Complex64]) -> StateVec {
        coeffs
            .iter()
            .zip(&self.position)
            .fold(StateVec::zeros(qudit_spin(self.n())), |acc, (c, v)| acc.add_scaled(*c, v))
            .normalized()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryOutcome {
    /// The residual after correction is a stabilizer.
    Corrected,
    /// The residual is a nontrivial logical operator.
    LogicalError,
    /// A syndrome sits exactly on `r/2` (even `r`); no correction is assigned.
    Ambiguous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recovery {
    pub error: PauliWord,
    pub syndrome_a: usize,
    pub syndrome_b: usize,
    /// Probability of the observed joint outcome (1 for a single Pauli error).
    pub syndrome_probability: f64,
    pub correction: Option<PauliWord>,
    /// Correction times error.
    pub residual: PauliWord,
    pub outcome: RecoveryOutcome,
    pub fidelity: f64,
    pub state: StateVec,
}

/// Centered representative of `s mod r` in `(−r/2, r/2)`; `None` at `r/2`.
fn centered(s: usize, r: usize) -> Option<i64> {
    match (2 * s).cmp(&r) {
        std::cmp::Ordering::Less => Some(s as i64),
        std::cmp::Ordering::Greater => Some(s as i64 - r as i64),
        std::cmp::Ordering::Equal => None,
    }
}

/// Apply `X^a Z^b` to `state`, measure both stabilizers projectively and
/// undo the inferred shift.
pub fn syndrome_and_recover(code: &GkpCode, a: i64, b: i64, state: &StateVec) -> Result<Recovery> {
    let p = code.params;
    let n = p.n();
    if state.j().dim() != n {
        return Err(Error::InvalidParameter(format!("state dimension {} differs from N = {n}", state.j().dim())));
    }
    let error = PauliWord::new(n, a, b);
    let corrupted = error.apply(state);
    let [sx, sz] = code.stabilizers;

    // Z^{K r2} has eigenvalues e^{2πi s_a/r1}; X^{K r1} has e^{−2πi s_b/r2}.
    let z_powers: Vec<StateVec> = (0..p.r1).map(|k| sz.pow(k as u64).apply(&corrupted)).collect();
    let mut best: Option<(f64, usize, usize, StateVec)> = None;
    for s_a in 0..p.r1 {
        let pa = z_powers.iter().enumerate().fold(StateVec::zeros(corrupted.j()), |acc, (k, v)| {
            acc.add_scaled(Complex64::from_polar(1.0 / p.r1 as f64, -TAU * (s_a * k % p.r1) as f64 / p.r1 as f64), v)
        });
        if pa.norm() < 1e-14 {
            continue;
        }
        let x_powers: Vec<StateVec> = (0..p.r2).map(|l| sx.pow(l as u64).apply(&pa)).collect();
        for s_b in 0..p.r2 {
            let pb = x_powers.iter().enumerate().fold(StateVec::zeros(corrupted.j()), |acc, (l, v)| {
                acc.add_scaled(Complex64::from_polar(1.0 / p.r2 as f64, TAU * (s_b * l % p.r2) as f64 / p.r2 as f64), v)
            });
            let prob = pb.norm().powi(2);
            if best.as_ref().is_none_or(|(bp, ..)| prob > *bp) {
                best = Some((prob, s_a, s_b, pb));
            }
        }
    }
    let (prob, s_a, s_b, projected) = best.expect("the joint eigenspaces resolve the identity");
    let projected = projected.normalized();
    let shift = centered(s_a, p.r1).zip(centered(s_b, p.r2));
    let (correction, residual, recovered) = match shift {
        Some((ca, cb)) => {
            let c = PauliWord::new(n, ca, cb).inverse();
            (Some(c), c.mul(&error), c.apply(&projected))
        }
        None => (None, error, projected),
    };
    let outcome = if correction.is_none() {
        RecoveryOutcome::Ambiguous
    } else if residual.a % (p.k * p.r1) == 0 && residual.b % (p.k * p.r2) == 0 {
        RecoveryOutcome::Corrected
    } else {
        RecoveryOutcome::LogicalError
    };
    Ok(Recovery {
        error,
        syndrome_a: s_a,
        syndrome_b: s_b,
        syndrome_probability: prob / corrupted.norm().powi(2),
        correction,
        residual,
        outcome,
        fidelity: state.inner(&recovered).norm_sqr() / state.norm().powi(2),
        state: recovered,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveRow {
    pub params: GkpParams,
    pub errors: usize,
    pub states: usize,
    pub min_fidelity: f64,
    pub all_corrected: bool,
}

/// Every in-window error on every logical basis state and on the uniform
/// superposition.
pub fn exhaustive_check(p: GkpParams) -> ExhaustiveRow {
    let code = build_gkp_code(p);
    let mut states = code.position.clone();
    states.push(code.logical_state(&vec![Complex64::new(1.0, 0.0); p.k]));
    let window = p.window();
    let results: Vec<(f64, bool)> = window
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            let code = &code;
            states.iter().map(move |s| {
                let r = syndrome_and_recover(code, a, b, s).expect("state built for this code");
                (r.fidelity, r.outcome == RecoveryOutcome::Corrected)
            })
        })
        .collect();
    ExhaustiveRow {
        params: p,
        errors: window.len(),
        states: states.len(),
        min_fidelity: results.iter().map(|r| r.0).fold(1.0, f64::min),
        all_corrected: results.iter().all(|r| r.1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingReport {
    pub vectors: usize,
    pub n: usize,
    /// `max |G − I|` for the Gram matrix of `X^a Z^b |x̄ = j>` over the window.
    pub max_gram_deviation: f64,
    /// Orthonormal and spanning: the errors tile `C^N`.
    pub tiles: bool,
}

pub fn error_tiling(code: &GkpCode) -> TilingReport {
    let n = code.n();
    let vecs: Vec<StateVec> = code
        .params
        .window()
        .into_iter()
        .flat_map(|(a, b)| code.position.iter().map(move |v| PauliWord::new(n, a, b).apply(v)))
        .collect();
    let mut dev: f64 = 0.0;
    for (i, u) in vecs.iter().enumerate() {
        for (k, v) in vecs.iter().enumerate() {
            let target = if i == k { 1.0 } else { 0.0 };
            dev = dev.max((u.inner(v) - Complex64::new(target, 0.0)).norm());
        }
    }
    TilingReport {
        vectors: vecs.len(),
        n,
        max_gram_deviation: dev,
        tiles: vecs.len() == n && dev < 1e-12,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeRow {
    pub a: i64,
    pub b: i64,
    pub syndrome_a: usize,
    pub syndrome_b: usize,
    pub outcome: RecoveryOutcome,
}

impl SyndromeRow {
    pub fn corrected(&self) -> bool {
        self.outcome == RecoveryOutcome::Corrected
    }
}

/// Syndromes and outcomes for every in-window error acting on `|x̄ = 0>`.
pub fn syndrome_table(code: &GkpCode) -> Vec<SyndromeRow> {
    syndrome_table_for(code, &code.params.window())
}

pub fn syndrome_table_for(code: &GkpCode, errors: &[(i64, i64)]) -> Vec<SyndromeRow> {
    errors
        .par_iter()
        .map(|&(a, b)| {
            let r = syndrome_and_recover(code, a, b, &code.position[0]).expect("codeword of this code");
            SyndromeRow { a, b, syndrome_a: r.syndrome_a, syndrome_b: r.syndrome_b, outcome: r.outcome }
        })
        .collect()
}

/// CSV with header `a,b,syndrome_a,syndrome_b,corrected`.
pub fn syndrome_csv(rows: &[SyndromeRow]) -> String {
    let mut out = String::from("a,b,syndrome_a,syndrome_b,corrected\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.a, r.b, r.syndrome_a, r.syndrome_b, r.corrected());
    }
    out
}
