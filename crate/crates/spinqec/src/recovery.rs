//! Ancilla-based syndrome extraction for equatorial qudit codes.
//!
//! The data state `ψ = e^{-iδφ L3}|k̄>` is coupled to a `Z_d`-invariant
//! ancilla by the approximate controlled rotation and the ancilla is read
//! out at azimuth `φ_m`. With the coherent-state integrals localized to the
//! equator, the unnormalized post-measurement data state is `u = M(φ_m) ψ`
//! with
//!
//! `M_{mn} = d f_m f_n w(n−m) e^{i(n−m)φ_m}` when `d | (n−m)`, zero otherwise,
//!
//! where `f_m = |<j,m|π/2, φ>|` and `w ≡ 1` for the ideal ancilla. A spin
//! `j_anc` coherent-state ancilla gives `w(s) = C(2j_anc, j_anc+s)/C(2j_anc, j_anc)`.
//! The density of `φ_m` is `‖u‖²`; for the ideal ancilla this is the double
//! sum over peak pairs, and dropping the cross terms leaves the sum of
//! single peaks.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::{coherent_modulus, overlap_points, SphPoint, SphereQuadrature, theta_nodes_for};
use crate::lll_codes::{build_codewords, CodeSpec, Codewords};
use crate::special::{integrate_adaptive, ln_binomial};
use crate::{Error, HalfInt, Result, StateVec};

pub const DEFAULT_GRID: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityMode {
    /// Keep only the `k = ℓ` terms.
    LeadingTerm,
    /// All `(k, ℓ)` terms, including the cross terms.
    Full,
}

/// The syndrome density for `ψ = e^{-iδφL3}|k̄>` with an ideal ancilla.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyndromeDensity {
    pub j: HalfInt,
    pub d: usize,
    /// Azimuth of the noisy codeword, `2πk/d + δφ`.
    pub phi: f64,
    pub mode: DensityMode,
}

pub fn syndrome_density(j: HalfInt, d: usize, k: usize, delta_phi: f64, mode: DensityMode) -> Result<SyndromeDensity> {
    check_code_params(j, d)?;
    Ok(SyndromeDensity {
        j,
        d,
        phi: TAU * (k % d) as f64 / d as f64 + delta_phi,
        mode,
    })
}

fn check_code_params(j: HalfInt, d: usize) -> Result<()> {
    if !j.is_integer() || j.twice() <= 0 {
        return Err(Error::InvalidParameter(format!("syndrome extraction needs integer j > 0, got {j}")));
    }
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d must be at least 2, got {d}")));
    }
    Ok(())
}

impl SyndromeDensity {
    pub fn eval(&self, phi_m: f64) -> f64 {
        match self.mode {
            DensityMode::LeadingTerm => self.leading(phi_m),
            DensityMode::Full => self.leading(phi_m) + self.cross_terms(phi_m),
        }
    }

    fn peak_point(&self, phi_m: f64, k: usize) -> SphPoint {
        SphPoint::equator(phi_m - TAU * k as f64 / self.d as f64)
    }

    /// `Σ_k ((1 + cos(φ_m − 2πk/d − φ))/2)^{2j}`.
    pub fn leading(&self, phi_m: f64) -> f64 {
        let two_j = self.j.twice() as i32;
        (0..self.d)
            .map(|k| ((1.0 + (phi_m - TAU * k as f64 / self.d as f64 - self.phi).cos()) / 2.0).powi(two_j))
            .sum()
    }

    /// `Σ_{k≠ℓ} A_k conj(A_ℓ) <p_ℓ|p_k>` with `A_k = <p_k|π/2, φ>`.
    pub fn cross_terms(&self, phi_m: f64) -> f64 {
        let j = self.j;
        let src = SphPoint::equator(self.phi);
        let amps: Vec<Complex64> = (0..self.d)
            .map(|k| overlap_points(j, &self.peak_point(phi_m, k), &src))
            .collect();
        let mut total = 0.0;
        for k in 0..self.d {
            for l in 0..self.d {
                if k != l {
                    let g = overlap_points(j, &self.peak_point(phi_m, l), &self.peak_point(phi_m, k));
                    total += (amps[k] * amps[l].conj() * g).re;
                }
            }
        }
        total
    }

    /// Bound on the cross terms: `d(d−1) ((1 + cos(2π/d))/2)^j`.
    pub fn cross_term_bound(&self) -> f64 {
        let d = self.d as f64;
        d * (d - 1.0) * ((1.0 + (TAU / d).cos()) / 2.0).powf(self.j.value())
    }

    /// Full width at half maximum of the peak at `φ`, by bisection.
    pub fn fwhm(&self) -> f64 {
        let peak = self.eval(self.phi);
        let (mut lo, mut hi) = (0.0, PI / self.d as f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(self.phi + mid) > 0.5 * peak {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo + hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub j: HalfInt,
    pub epsilon: f64,
    pub numeric_tail: f64,
    pub laplace_tail: f64,
    pub ratio: f64,
    /// `∫ P dφ_m / sqrt(2π/j)` for the single peak.
    pub mass_ratio: f64,
}

/// `sqrt(2/(πj)) e^{-jε²/2} / ε`.
pub fn laplace_tail(j: HalfInt, epsilon: f64) -> f64 {
    let jv = j.value();
    (2.0 / (PI * jv)).sqrt() * (-jv * epsilon * epsilon / 2.0).exp() / epsilon
}

/// Failure probability of a window of radius `ε` about a single peak
/// `((1 + cos x)/2)^{2j}`, against the Laplace estimate.
pub fn tail_failure(j: HalfInt, d: usize, epsilon: f64) -> Result<TailEstimate> {
    if j.twice() <= 0 || d == 0 {
        return Err(Error::InvalidParameter(format!("need j > 0 and d >= 1, got j = {j}, d = {d}")));
    }
    if epsilon.is_nan() || epsilon <= 0.0 || epsilon > PI / d as f64 {
        return Err(Error::InvalidParameter(format!(
            "window radius {epsilon} must lie in (0, π/d] = (0, {}]",
            PI / d as f64
        )));
    }
    let two_j = j.twice() as f64;
    let density = |x: f64| {
        let c = (0.5 * x).cos();
        if c <= 0.0 {
            0.0
        } else {
            (2.0 * two_j * c.ln()).exp()
        }
    };
    let inside = integrate_adaptive(density, 0.0, epsilon, 0.0, 1e-13);
    let outside = if epsilon >= PI {
        0.0
    } else {
        integrate_adaptive(density, epsilon, PI, 0.0, 1e-13)
    };
    let total = inside + outside;
    let numeric_tail = outside / total;
    let laplace = laplace_tail(j, epsilon);
    Ok(TailEstimate {
        j,
        epsilon,
        numeric_tail,
        laplace_tail: laplace,
        ratio: numeric_tail / laplace,
        mass_ratio: 2.0 * total / (TAU / j.value()).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ancilla {
    /// Orthonormal position states on the ancilla circle.
    Ideal,
    /// A spin-`j_anc` ancilla read out in equatorial coherent states.
    Coherent { j_anc: HalfInt },
}

/// How the coherent-state integrals over the polar angle are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolarModel {
    /// Localized to `θ' = π/2`.
    #[default]
    Equator,
    /// Integrated over the full meridian (validation at small j).
    Meridian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyndromeRun {
    pub j: HalfInt,
    pub d: usize,
    pub input_k: usize,
    pub delta_phi: f64,
    pub measured_phi: f64,
    pub recovered_k: usize,
    pub fidelity: f64,
    /// `|δφ| ≥ π/d`: a logical error is expected.
    pub out_of_cell: bool,
    pub seed: u64,
}

/// Everything needed to sample syndrome runs for one configuration.
#[derive(Clone, Debug)]
pub struct RecoveryExperiment {
    pub j: HalfInt,
    pub d: usize,
    pub input_k: usize,
    pub delta_phi: f64,
    pub ancilla: Ancilla,
    pub model: PolarModel,
    code: Codewords,
    psi: StateVec,
    /// Polar factor of `M_{mn}` (`f_m f_n` or the meridian integral).
    polar: Vec<Vec<f64>>,
    /// Ancilla weight `w(s)` indexed by `s + 2j`.
    weights: Vec<f64>,
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl RecoveryExperiment {
    pub fn new(j: HalfInt, d: usize, input_k: usize, delta_phi: f64, ancilla: Ancilla) -> Result<Self> {
        Self::with_options(j, d, input_k, delta_phi, ancilla, PolarModel::Equator, DEFAULT_GRID)
    }

    pub fn with_options(
        j: HalfInt,
        d: usize,
        input_k: usize,
        delta_phi: f64,
        ancilla: Ancilla,
        model: PolarModel,
        grid_size: usize,
    ) -> Result<Self> {
        check_code_params(j, d)?;
        if input_k >= d {
            return Err(Error::InvalidParameter(format!("logical index {input_k} >= d = {d}")));
        }
        if grid_size < 16 {
            return Err(Error::InvalidParameter("sampling grid needs at least 16 points".into()));
        }
        if let Ancilla::Coherent { j_anc } = ancilla {
            if !j_anc.is_integer() || j_anc.twice() <= 0 {
                return Err(Error::InvalidParameter(format!("ancilla spin must be a positive integer, got {j_anc}")));
            }
        }
        let code = build_codewords(&CodeSpec::equatorial(j, d))?;
        let psi = z_rotate(&code.basis[input_k], delta_phi);
        let polar = polar_factors(j, model);
        let weights = ancilla_weights(j, ancilla);
        let mut exp = RecoveryExperiment {
            j,
            d,
            input_k,
            delta_phi,
            ancilla,
            model,
            code,
            psi,
            polar,
            weights,
            grid: Vec::new(),
            cdf: Vec::new(),
        };
        exp.grid = (0..=grid_size).map(|i| TAU * i as f64 / grid_size as f64).collect();
        let dens: Vec<f64> = exp.grid.par_iter().map(|&phi| exp.density(phi)).collect();
        let mut cdf = vec![0.0; dens.len()];
        for i in 1..dens.len() {
            cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (exp.grid[i] - exp.grid[i - 1]);
        }
        let total = *cdf.last().expect("non-empty grid");
        cdf.iter_mut().for_each(|c| *c /= total);
        exp.cdf = cdf;
        Ok(exp)
    }

    pub fn code(&self) -> &Codewords {
        &self.code
    }

    /// The unnormalized post-measurement data state `u = M(φ_m) ψ`.
    pub fn post_measurement(&self, phi_m: f64) -> StateVec {
        let j = self.j;
        let dim = j.dim();
        let tj = j.twice();
        let d = self.d as i64;
        let amps = self.psi.amps();
        StateVec::from_fn(j, |m| {
            let r = j.index_of(m).expect("m in range");
            let mut acc = Complex64::new(0.0, 0.0);
            // n − m = r − c in index units; step over columns in the same residue class.
            let start = r % self.d;
            for c in (start..dim).step_by(self.d) {
                let s = r as i64 - c as i64;
                debug_assert_eq!(s.rem_euclid(d), 0);
                let w = self.weights[(s + tj) as usize];
                if w == 0.0 {
                    continue;
                }
                acc += amps[c] * Complex64::from_polar(self.polar[r][c] * w, s as f64 * phi_m);
            }
            acc * self.d as f64
        })
    }

    /// Unnormalized density `‖u(φ_m)‖²`.
    pub fn density(&self, phi_m: f64) -> f64 {
        self.post_measurement(phi_m).norm().powi(2)
    }

    /// Inverse-CDF sample with linear interpolation inside grid cells.
    pub fn sample_phi(&self, u: f64) -> f64 {
        let idx = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[idx - 1] + frac * (self.grid[idx] - self.grid[idx - 1])
    }

    /// Correct and score a given measurement outcome.
    pub fn run_at(&self, phi_m: f64, seed: u64) -> SyndromeRun {
        let cell = TAU / self.d as f64;
        let nearest = (phi_m / cell).round() * cell;
        let offset = phi_m - nearest;
        let u = self.post_measurement(phi_m);
        let corrected = z_rotate(&u, -offset).normalized();
        let overlaps: Vec<f64> = self
            .code
            .basis
            .iter()
            .map(|b| b.inner(&corrected).norm_sqr())
            .collect();
        let recovered_k = overlaps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        SyndromeRun {
            j: self.j,
            d: self.d,
            input_k: self.input_k,
            delta_phi: self.delta_phi,
            measured_phi: phi_m,
            recovered_k,
            fidelity: overlaps[self.input_k].min(1.0),
            out_of_cell: self.delta_phi.abs() >= PI / self.d as f64,
            seed,
        }
    }

    pub fn run(&self, seed: u64) -> SyndromeRun {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi_m = self.sample_phi(rng.gen::<f64>());
        self.run_at(phi_m, seed)
    }

    /// `count` runs with seeds derived from `seed`, in parallel; the output
    /// order follows the run index.
    pub fn runs(&self, count: usize, seed: u64) -> Vec<SyndromeRun> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.run(run_seed(seed, i)))
            .collect()
    }
}

/// `e^{-iα L3} v`.
fn z_rotate(v: &StateVec, alpha: f64) -> StateVec {
    let j = v.j();
    let amps = v.amps();
    StateVec::from_fn(j, |m| {
        amps[j.index_of(m).expect("m in range")] * Complex64::from_polar(1.0, -alpha * m.value())
    })
}

/// Seed of the `i`-th run of a batch.
pub fn run_seed(seed: u64, i: u64) -> u64 {
    seed ^ i.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn polar_factors(j: HalfInt, model: PolarModel) -> Vec<Vec<f64>> {
    let ms: Vec<HalfInt> = j.ms().collect();
    match model {
        PolarModel::Equator => {
            let f: Vec<f64> = ms.iter().map(|&m| coherent_modulus(j, m, PI / 2.0)).collect();
            f.iter().map(|a| f.iter().map(|b| a * b).collect()).collect()
        }
        PolarModel::Meridian => {
            // ∫ sin θ f_m(θ) f_n(θ) dθ on the half-angle rule.
            let tj = j.twice() as usize;
            let quad = SphereQuadrature::with_sizes(theta_nodes_for(2 * tj + 2), 1);
            let mut out = vec![vec![0.0; ms.len()]; ms.len()];
            for (theta, w) in quad.thetas.iter().zip(&quad.ring_weights) {
                let f: Vec<f64> = ms.iter().map(|&m| coherent_modulus(j, m, *theta)).collect();
                for r in 0..ms.len() {
                    for c in 0..ms.len() {
                        out[r][c] += w * f[r] * f[c];
                    }
                }
            }
            out
        }
    }
}

fn ancilla_weights(j: HalfInt, ancilla: Ancilla) -> Vec<f64> {
    let tj = j.twice();
    (-tj..=tj)
        .map(|s| match ancilla {
            Ancilla::Ideal => 1.0,
            Ancilla::Coherent { j_anc } => {
                let ja = j_anc.twice() / 2;
                if s.abs() > ja {
                    0.0
                } else {
                    let n = 2 * ja as u64;
                    (ln_binomial(n, (ja + s) as u64) - ln_binomial(n, ja as u64)).exp()
                }
            }
        })
        .collect()
}

/// Sample one run.
pub fn recover(j: HalfInt, d: usize, k: usize, delta_phi: f64, seed: u64) -> Result<SyndromeRun> {
    Ok(RecoveryExperiment::new(j, d, k, delta_phi, Ancilla::Ideal)?.run(seed))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FidelityStats {
    pub runs: usize,
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
    pub correct_fraction: f64,
}

pub fn summarize(runs: &[SyndromeRun]) -> FidelityStats {
    if runs.is_empty() {
        return FidelityStats::default();
    }
    let n = runs.len() as f64;
    FidelityStats {
        runs: runs.len(),
        mean_fidelity: runs.iter().map(|r| r.fidelity).sum::<f64>() / n,
        min_fidelity: runs.iter().map(|r| r.fidelity).fold(1.0, f64::min),
        correct_fraction: runs.iter().filter(|r| r.recovered_k == r.input_k).count() as f64 / n,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteAncillaReport {
    pub j: HalfInt,
    pub j_anc: HalfInt,
    pub d: usize,
    pub delta_phi: f64,
    pub ideal: FidelityStats,
    pub finite: FidelityStats,
    /// `ideal.mean_fidelity − finite.mean_fidelity`.
    pub gap: f64,
}

/// Compare the ideal ancilla with a spin-`j_anc` coherent-state ancilla on
/// the same seeds.
pub fn finite_ancilla_note(
    j: HalfInt,
    j_anc: HalfInt,
    d: usize,
    delta_phi: f64,
    runs: usize,
    seed: u64,
) -> Result<FiniteAncillaReport> {
    let ideal = summarize(&RecoveryExperiment::new(j, d, 0, delta_phi, Ancilla::Ideal)?.runs(runs, seed));
    let finite = summarize(&RecoveryExperiment::new(j, d, 0, delta_phi, Ancilla::Coherent { j_anc })?.runs(runs, seed));
    Ok(FiniteAncillaReport {
        j,
        j_anc,
        d,
        delta_phi,
        ideal,
        finite,
        gap: ideal.mean_fidelity - finite.mean_fidelity,
    })
}
