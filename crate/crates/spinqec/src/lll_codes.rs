//! Codes in the spin-j space built from coherent states: the antipodal
//! qubit, the equatorial qudit and the cyclic `Z_N ⊂ Z_2N` qubit, with their
//! logical and check operators.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::coherent::{
    coherent_state, diagonal_operator, su2_matrix_element, DiagonalOp, SphPoint, SymbolBand,
};
use crate::rotations::Su2Element;
use crate::special::binomial;
use crate::{Error, HalfInt, Operator, Result, StateVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodeFamily {
    Antipodal,
    EquatorialQudit { d: usize },
    CyclicQubit { n: usize },
}

/// Phase choice for equatorial codewords: `Option1` multiplies `|k̄>` by
/// `e^{-2πijk/d}`, `Option2` uses bare coherent states and needs `d | j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseConvention {
    #[default]
    Option1,
    Option2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub j: HalfInt,
    pub family: CodeFamily,
    #[serde(default)]
    pub phase_convention: PhaseConvention,
    /// Reference azimuth of the antipodal code.
    #[serde(default)]
    pub phi0: f64,
}

impl CodeSpec {
    pub fn antipodal(j: HalfInt, phi0: f64) -> Self {
        CodeSpec {
            j,
            family: CodeFamily::Antipodal,
            phase_convention: PhaseConvention::Option1,
            phi0,
        }
    }

    pub fn equatorial(j: HalfInt, d: usize) -> Self {
        CodeSpec {
            j,
            family: CodeFamily::EquatorialQudit { d },
            phase_convention: PhaseConvention::Option1,
            phi0: 0.0,
        }
    }

    pub fn cyclic(j: HalfInt, n: usize) -> Self {
        CodeSpec {
            j,
            family: CodeFamily::CyclicQubit { n },
            phase_convention: PhaseConvention::Option1,
            phi0: 0.0,
        }
    }

    pub fn with_convention(mut self, c: PhaseConvention) -> Self {
        self.phase_convention = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.j.twice() < 0 {
            return Err(Error::InvalidSpec(format!("negative spin {}", self.j)));
        }
        match self.family {
            CodeFamily::Antipodal if self.j.twice() == 0 => {
                Err(Error::InvalidSpec("antipodal code needs j >= 1/2".into()))
            }
            CodeFamily::Antipodal => Ok(()),
            CodeFamily::EquatorialQudit { d } => {
                if d < 2 {
                    return Err(Error::InvalidSpec(format!("qudit dimension {d} < 2")));
                }
                if !self.j.is_integer() {
                    return Err(Error::InvalidSpec(format!(
                        "equatorial qudit needs integer j, got {}",
                        self.j
                    )));
                }
                let jj = self.j.twice() / 2;
                if self.phase_convention == PhaseConvention::Option2 && jj % d as i64 != 0 {
                    return Err(Error::InvalidSpec(format!("Option2 needs d | j, got d = {d}, j = {jj}")));
                }
                Ok(())
            }
            CodeFamily::CyclicQubit { n } => {
                if n < 1 {
                    return Err(Error::InvalidSpec("cyclic code needs N >= 1".into()));
                }
                Ok(())
            }
        }
    }

    /// Number of logical levels.
    pub fn logical_dim(&self) -> usize {
        match self.family {
            CodeFamily::Antipodal | CodeFamily::CyclicQubit { .. } => 2,
            CodeFamily::EquatorialQudit { d } => d,
        }
    }
}

/// A codeword written as a superposition of coherent states.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentSum {
    pub terms: Vec<(Complex64, SphPoint)>,
}

impl CoherentSum {
    pub fn points(&self) -> impl Iterator<Item = &SphPoint> {
        self.terms.iter().map(|(_, p)| p)
    }
}

#[derive(Clone, Debug)]
pub struct Codewords {
    pub spec: CodeSpec,
    pub basis: Vec<StateVec>,
    pub gram: DMatrix<Complex64>,
    /// Coherent-state content of each codeword, used for closed-form matrix
    /// elements.
    pub components: Vec<CoherentSum>,
}

impl Codewords {
    pub fn j(&self) -> HalfInt {
        self.spec.j
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `<a| X_U |b>` from the coherent-state decomposition.
    pub fn matrix_element(&self, a: usize, u: &Su2Element, b: usize) -> Complex64 {
        let j = self.j();
        let mut total = Complex64::new(0.0, 0.0);
        for (ca, pa) in &self.components[a].terms {
            for (cb, pb) in &self.components[b].terms {
                total += ca.conj() * cb * su2_matrix_element(j, pa, u, pb).value;
            }
        }
        total
    }

    /// Largest off-diagonal gram magnitude.
    pub fn max_off_diagonal_overlap(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    worst = worst.max(self.gram[(r, c)].norm());
                }
            }
        }
        worst
    }
}

impl Serialize for Codewords {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let amps: Vec<Vec<(f64, f64)>> = self
            .basis
            .iter()
            .map(|v| v.amps().iter().map(|c| (c.re, c.im)).collect())
            .collect();
        let mut st = s.serialize_struct("Codewords", 2)?;
        st.serialize_field("spec", &self.spec)?;
        st.serialize_field("basis", &amps)?;
        st.end()
    }
}

/// `e^{-2πijk/d}` under Option1, 1 under Option2.
fn equatorial_phase(j: HalfInt, d: usize, k: usize, convention: PhaseConvention) -> Complex64 {
    match convention {
        PhaseConvention::Option1 => {
            let jj = (j.twice() / 2) as usize;
            root_of_unity(d, (d - (jj * k) % d) % d)
        }
        PhaseConvention::Option2 => Complex64::new(1.0, 0.0),
    }
}

/// `e^{2πi e/d}` evaluated once from a reduced exponent.
fn root_of_unity(d: usize, e: usize) -> Complex64 {
    let e = e % d;
    if e == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, TAU * e as f64 / d as f64)
    }
}

/// `𝒩 = N²/2^{2j} Σ_k C(2j, kN)`.
pub fn cyclic_normalization(j: HalfInt, n: usize) -> f64 {
    let tj = j.twice() as u64;
    let sum: f64 = (0..=tj / n as u64).map(|k| binomial(tj, k * n as u64)).sum();
    (n * n) as f64 * sum * 2f64.powi(-(tj as i32))
}

/// `<0̄| e^{-iΘL3} |1̄>` of the cyclic code from the binomial sum.
pub fn cyclic_overlap_closed_form(j: HalfInt, n: usize, theta: f64) -> Complex64 {
    let tj = j.twice() as u64;
    let norm = cyclic_normalization(j, n);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=tj / n as u64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += Complex64::from_polar(sign * binomial(tj, k * n as u64), (k * n as u64) as f64 * theta);
    }
    let pref = (n * n) as f64 * 2f64.powi(-(tj as i32)) / norm;
    sum * Complex64::from_polar(pref, -j.value() * theta)
}

pub fn build_codewords(spec: &CodeSpec) -> Result<Codewords> {
    spec.validate()?;
    let j = spec.j;
    let one = Complex64::new(1.0, 0.0);
    let components: Vec<CoherentSum> = match spec.family {
        CodeFamily::Antipodal => vec![
            CoherentSum {
                terms: vec![(one, SphPoint::NORTH)],
            },
            CoherentSum {
                terms: vec![(one, SphPoint::south(spec.phi0))],
            },
        ],
        CodeFamily::EquatorialQudit { d } => (0..d)
            .map(|k| CoherentSum {
                terms: vec![(
                    equatorial_phase(j, d, k, spec.phase_convention),
                    SphPoint::equator(TAU * k as f64 / d as f64),
                )],
            })
            .collect(),
        CodeFamily::CyclicQubit { n } => {
            let c = Complex64::new(cyclic_normalization(j, n).sqrt().recip(), 0.0);
            (0..2)
                .map(|r| CoherentSum {
                    terms: (0..n)
                        .map(|h| (c, SphPoint::equator((TAU * h as f64 + PI * r as f64) / n as f64)))
                        .collect(),
                })
                .collect()
        }
    };
    let basis: Vec<StateVec> = components
        .iter()
        .map(|sum| {
            sum.terms.iter().fold(StateVec::zeros(j), |acc, (c, p)| {
                acc.add_scaled(*c, &coherent_state(j, *p).vec)
            })
        })
        .collect();
    let gram = DMatrix::from_fn(basis.len(), basis.len(), |r, c| basis[r].inner(&basis[c]));
    Ok(Codewords {
        spec: *spec,
        basis,
        gram,
        components,
    })
}

/// A diagonal unitary whose entries are `d`-th roots of unity, stored by
/// integer exponent so powers are exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootOfUnityDiag {
    pub j: HalfInt,
    pub d: usize,
    /// Entry `i` is `e^{2πi exponents[i]/d}`.
    pub exponents: Vec<usize>,
}

impl RootOfUnityDiag {
    pub fn pow(&self, n: usize) -> RootOfUnityDiag {
        RootOfUnityDiag {
            j: self.j,
            d: self.d,
            exponents: self.exponents.iter().map(|e| (e * n) % self.d).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn to_operator(&self) -> Operator {
        Operator::from_diagonal(self.j, |m| {
            let i = self.j.index_of(m).expect("m in range");
            root_of_unity(self.d, self.exponents[i])
        })
    }
}

/// `X̄ = e^{-i(2π/d)L3}` for integer `j`.
pub fn logical_x_exact(j: HalfInt, d: usize) -> Result<RootOfUnityDiag> {
    if !j.is_integer() || d == 0 {
        return Err(Error::InvalidSpec(format!("X̄ needs integer j and d >= 1, got j = {j}, d = {d}")));
    }
    let exponents = j
        .ms()
        .map(|m| (-(m.twice() / 2)).rem_euclid(d as i64) as usize)
        .collect();
    Ok(RootOfUnityDiag { j, d, exponents })
}

#[derive(Clone, Debug)]
pub struct LogicalSet {
    pub xbar: Operator,
    pub xbar_exact: RootOfUnityDiag,
    pub zbar: Operator,
    pub zcheck: Operator,
}

/// `(2j+1)/4π ∫ e^{ikφ} |Ω><Ω| dΩ`.
pub fn azimuthal_kick(j: HalfInt, k: usize) -> DiagonalOp {
    diagonal_operator(
        j,
        move |p: &SphPoint| Complex64::from_polar(1.0, k as f64 * p.phi),
        Some(SymbolBand::azimuthal(k)),
    )
}

/// `X̄`, `Z̄` and the check `Z̄_d` of an equatorial qudit code.
pub fn logical_operators(spec: &CodeSpec) -> Result<LogicalSet> {
    spec.validate()?;
    let CodeFamily::EquatorialQudit { d } = spec.family else {
        return Err(Error::WrongFamily(
            "logical operators are defined for the equatorial qudit code".into(),
        ));
    };
    let xbar_exact = logical_x_exact(spec.j, d)?;
    Ok(LogicalSet {
        xbar: xbar_exact.to_operator(),
        xbar_exact,
        zbar: azimuthal_kick(spec.j, 1).realized,
        zcheck: azimuthal_kick(spec.j, d).realized,
    })
}

/// `X_{R(φ0, π, -φ0)}`, built from `d^j_{m,-m}(π) = (-1)^{j+m}`.
pub fn antipodal_logical_x(j: HalfInt, phi0: f64) -> Operator {
    let dim = j.dim();
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    for (row, m) in j.ms().enumerate() {
        let col = dim - 1 - row;
        let sign = if ((j + m).twice() / 2) % 2 == 0 { 1.0 } else { -1.0 };
        // e^{-iφ0 m} e^{iφ0 (-m)} = e^{-2iφ0 m}
        let phase = -2.0 * phi0 * m.value();
        mat[(row, col)] = if phase == 0.0 {
            Complex64::new(sign, 0.0)
        } else {
            Complex64::from_polar(sign, phase)
        };
    }
    Operator::new(j, mat).expect("square by construction")
}

/// Hermitian substitutes for the qudit `Z` operators.
#[derive(Clone, Debug)]
pub struct HermitianChecks {
    /// `∫ cos φ |Ω><Ω|`, the real part of `Z̄`.
    pub cos_phi: Operator,
    /// `∫ sin φ |Ω><Ω|`, the imaginary part of `Z̄`.
    pub sin_phi: Operator,
    /// `∫ cos²(dφ/2) |Ω><Ω|`: equal to 1 at every codeword point, with
    /// spectrum in `[0, 1]`. For `d = 2` this is the `cos² φ` check.
    pub check: Operator,
}

impl HermitianChecks {
    /// Largest entry of `[cos φ, sin φ]`. This stays of order one because
    /// both symbols are singular at the poles.
    pub fn commutator_norm(&self) -> f64 {
        self.cos_phi.commutator(&self.sin_phi).max_abs()
    }

    /// `‖[cos φ, sin φ] v‖`, small for states supported near the equator.
    pub fn commutator_on(&self, v: &StateVec) -> f64 {
        self.cos_phi.commutator(&self.sin_phi).apply(v).norm()
    }
}

pub fn hermitian_check_ops(j: HalfInt, d: usize) -> Result<HermitianChecks> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let band1 = Some(SymbolBand::azimuthal(1));
    let cos_phi = diagonal_operator(j, |p: &SphPoint| Complex64::new(p.phi.cos(), 0.0), band1);
    let sin_phi = diagonal_operator(j, |p: &SphPoint| Complex64::new(p.phi.sin(), 0.0), band1);
    let check = diagonal_operator(
        j,
        move |p: &SphPoint| Complex64::new(0.5 * (1.0 + (d as f64 * p.phi).cos()), 0.0),
        Some(SymbolBand::azimuthal(d)),
    );
    Ok(HermitianChecks {
        cos_phi: cos_phi.realized.symmetrized()?,
        sin_phi: sin_phi.realized.symmetrized()?,
        check: check.realized.symmetrized()?,
    })
}

/// `‖Z̄|k̄> - e^{2πik/d}|k̄>‖` for each codeword.
pub fn zbar_residuals(code: &Codewords, zbar: &Operator) -> Vec<f64> {
    let d = code.dim();
    code.basis
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let target = v.scale(root_of_unity(d, k));
            (zbar.apply(v).amps() - target.amps()).norm()
        })
        .collect()
}

/// Norm of the part of `op|k̄>` outside the code space.
pub fn leakage(code: &Codewords, op: &Operator) -> Vec<f64> {
    let q = orthonormal_basis(&code.basis);
    code.basis
        .iter()
        .map(|v| {
            let w = op.apply(v);
            let mut rest = w.amps().clone();
            for e in &q {
                let c = e.inner(&w);
                rest -= e.amps() * c;
            }
            rest.norm()
        })
        .collect()
}

fn orthonormal_basis(vs: &[StateVec]) -> Vec<StateVec> {
    let mut out: Vec<StateVec> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for e in &out {
            w = w.add_scaled(-e.inner(&w), e);
        }
        if w.norm() > 1e-12 {
            out.push(w.normalized());
        }
    }
    out
}
