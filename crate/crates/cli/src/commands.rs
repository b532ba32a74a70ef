//! The subcommand runners. Each returns the rendered output and whether the
//! run met its thresholds.

use std::f64::consts::PI;

use serde::Serialize;
use spinqec::coherent::SphPoint;
use spinqec::finite_gkp::{build_gkp_code, syndrome_table, GkpParams};
use spinqec::lll_codes::{build_codewords, CodeSpec, Codewords};
use spinqec::monopole::harmonic_table;
use spinqec::qec_check::{kl_check, ErrorKind, ErrorSet};
use spinqec::recovery::{summarize, tail_failure, Ancilla, RecoveryExperiment};
use spinqec::rotations::EulerAngles;
use spinqec::HalfInt;

use crate::config::{need, ErrorFamily, Family, Format, RunConfig, Settings};
use crate::output::{json_document, json_line, num, Csv};
use crate::CliError;

pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }
}

fn linspace(a: f64, b: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..steps).map(|i| a + (b - a) * i as f64 / (steps - 1) as f64).collect(),
    }
}

/// Fill the family-specific size only when that family is selected.
fn family_defaults(mut s: Settings) -> Settings {
    match s.family {
        Some(Family::Equatorial) => s.d = s.d.or(Some(2)),
        Some(Family::Cyclic) => s.n = s.n.or(Some(3)),
        _ => {}
    }
    s
}

fn build_code(s: &Settings) -> Result<Codewords, CliError> {
    let j = need(s.j, "j")?;
    let spec = match need(s.family, "family")? {
        Family::Antipodal => CodeSpec::antipodal(j, s.phi0.unwrap_or(0.0)),
        Family::Equatorial => CodeSpec::equatorial(j, need(s.d, "d")?),
        Family::Cyclic => CodeSpec::cyclic(j, need(s.n, "N")?),
    };
    Ok(build_codewords(&spec)?)
}

fn nonnegative(x: f64, name: &str) -> Result<f64, CliError> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(CliError::Invalid(format!("--{name} must be a finite non-negative number, got {x}")))
    }
}

pub fn kl_scan(flags: Settings) -> Result<Outcome, CliError> {
    let mut s = flags.resolve(Settings {
        j: Some(HalfInt::integer(8)),
        family: Some(Family::Antipodal),
        theta_max: Some(0.2),
        epsilon: Some(1e-6),
        delta: Some(1e-9),
        samples: Some(16),
        seed: Some(0),
        phi0: Some(0.0),
        format: Some(Format::Json),
        ..Default::default()
    })?;
    s = family_defaults(s);
    let family = need(s.family, "family")?;
    s.errors = s.errors.or(Some(match family {
        Family::Antipodal => ErrorFamily::ConjugatedY,
        Family::Equatorial | Family::Cyclic => ErrorFamily::EquatorialZ,
    }));
    let theta_max = nonnegative(need(s.theta_max, "theta-max")?, "theta-max")?;
    let eps = nonnegative(need(s.epsilon, "epsilon")?, "epsilon")?;
    let delta = nonnegative(need(s.delta, "delta")?, "delta")?;
    let samples = need(s.samples, "samples")?;
    if samples == 0 {
        return Err(CliError::Invalid("--samples must be positive".into()));
    }
    let code = build_code(&s)?;
    let errs = match need(s.errors, "errors")? {
        ErrorFamily::EquatorialZ => ErrorSet::new(ErrorKind::EquatorialZ { theta_max }, samples),
        ErrorFamily::ConjugatedY => {
            ErrorSet::new(ErrorKind::ConjugatedY { phi0: s.phi0.unwrap_or(0.0), theta_max }, samples)
        }
        ErrorFamily::Identity => ErrorSet::identity_only(),
    };
    let report = kl_check(&code, &errs, need(s.seed, "seed")?)?;
    let passed = report.delta_star <= delta && report.eps_star <= eps;
    let cfg = RunConfig::new("kl-scan", s.clone());
    let text = match need(s.format, "format")? {
        Format::Json => json_document(&cfg, "report", &report)?,
        Format::Csv => {
            let mut csv = Csv::new(&cfg, &["t_alpha", "t_beta", "t_gamma", "delta", "eps"])?;
            for p in &report.pairs {
                csv.row(&[num(p.t.alpha), num(p.t.beta), num(p.t.gamma), num(p.delta), num(p.eps)]);
            }
            csv.finish()
        }
    };
    Ok(Outcome { text, passed })
}

pub fn overlap_curve(flags: Settings) -> Result<Outcome, CliError> {
    let s = flags.resolve(Settings {
        j: Some(HalfInt::integer(8)),
        family: Some(Family::Antipodal),
        phi0: Some(0.0),
        steps: Some(65),
        format: Some(Format::Csv),
        ..Default::default()
    })?;
    let s = family_defaults(s);
    let code = build_code(&s)?;
    let phi0 = s.phi0.unwrap_or(0.0);
    let family = need(s.family, "family")?;
    let points: Vec<(f64, f64)> = linspace(0.0, PI, need(s.steps, "steps")?)
        .into_iter()
        .map(|theta| {
            // Antipodal: tilt about the axis at phi0. Others: rotate about z.
            let r = match family {
                Family::Antipodal => EulerAngles::new(phi0, theta, -phi0),
                Family::Equatorial | Family::Cyclic => EulerAngles::z(theta),
            };
            (theta, code.matrix_element(0, &r.to_su2(), 1).norm())
        })
        .collect();
    let cfg = RunConfig::new("overlap-curve", s.clone());
    let text = match need(s.format, "format")? {
        Format::Csv => {
            let mut csv = Csv::new(&cfg, &["theta", "magnitude"])?;
            for (t, m) in &points {
                csv.row(&[num(*t), num(*m)]);
            }
            csv.finish()
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Point {
                theta: f64,
                magnitude: f64,
            }
            let body: Vec<Point> = points.iter().map(|&(theta, magnitude)| Point { theta, magnitude }).collect();
            json_document(&cfg, "curve", &body)?
        }
    };
    Ok(Outcome::ok(text))
}

pub fn recovery_sweep(flags: Settings) -> Result<Outcome, CliError> {
    let s = flags.resolve(Settings {
        j: Some(HalfInt::integer(16)),
        d: Some(2),
        theta_max: Some(0.5),
        steps: Some(6),
        samples: Some(100),
        seed: Some(0),
        format: Some(Format::Json),
        ..Default::default()
    })?;
    let j = need(s.j, "j")?;
    let d = need(s.d, "d")?;
    let theta_max = need(s.theta_max, "theta-max")?;
    if !theta_max.is_finite() {
        return Err(CliError::Invalid("--theta-max must be finite".into()));
    }
    let samples = need(s.samples, "samples")?;
    let seed = need(s.seed, "seed")?;
    let ancilla = match s.j_anc {
        Some(j_anc) => Ancilla::Coherent { j_anc },
        None => Ancilla::Ideal,
    };
    let mut runs = Vec::new();
    for dphi in linspace(0.0, theta_max, need(s.steps, "steps")?) {
        let batch = RecoveryExperiment::new(j, d, 0, dphi, ancilla)?.runs(samples, seed);
        let st = summarize(&batch);
        eprintln!(
            "delta_phi={} mean_fidelity={} correct_fraction={}",
            num(dphi),
            num(st.mean_fidelity),
            num(st.correct_fraction)
        );
        runs.extend(batch);
    }
    let cfg = RunConfig::new("recovery-sweep", s.clone());
    let text = match need(s.format, "format")? {
        Format::Json => {
            let mut text = json_line(&serde_json::json!({ "config": cfg }))? + "\n";
            for r in &runs {
                text.push_str(&json_line(r)?);
                text.push('\n');
            }
            text
        }
        Format::Csv => {
            let header = ["delta_phi", "measured_phi", "recovered_k", "fidelity", "out_of_cell", "seed"];
            let mut csv = Csv::new(&cfg, &header)?;
            for r in &runs {
                csv.row(&[
                    num(r.delta_phi),
                    num(r.measured_phi),
                    r.recovered_k.to_string(),
                    num(r.fidelity),
                    r.out_of_cell.to_string(),
                    r.seed.to_string(),
                ]);
            }
            csv.finish()
        }
    };
    Ok(Outcome::ok(text))
}

pub fn gkp_table(flags: Settings) -> Result<Outcome, CliError> {
    let s = flags.resolve(Settings {
        k: Some(2),
        r1: Some(3),
        r2: Some(3),
        format: Some(Format::Csv),
        ..Default::default()
    })?;
    let params = GkpParams::new(need(s.k, "K")?, need(s.r1, "r1")?, need(s.r2, "r2")?)?;
    let rows = syndrome_table(&build_gkp_code(params));
    let passed = rows.iter().all(|r| r.corrected());
    let cfg = RunConfig::new("gkp-table", s.clone());
    let text = match need(s.format, "format")? {
        Format::Csv => {
            let mut csv = Csv::new(&cfg, &["a", "b", "syndrome_a", "syndrome_b", "corrected"])?;
            for r in &rows {
                csv.row(&[
                    r.a.to_string(),
                    r.b.to_string(),
                    r.syndrome_a.to_string(),
                    r.syndrome_b.to_string(),
                    r.corrected().to_string(),
                ]);
            }
            csv.finish()
        }
        Format::Json => json_document(&cfg, "rows", &rows)?,
    };
    Ok(Outcome { text, passed })
}

pub fn harmonics(flags: Settings) -> Result<Outcome, CliError> {
    let mut s = flags.resolve(Settings {
        j: Some(HalfInt::ZERO),
        steps: Some(9),
        phi: Some(0.0),
        format: Some(Format::Csv),
        ..Default::default()
    })?;
    let j = need(s.j, "j")?;
    let l_min = j.abs();
    s.lmax = s.lmax.or(Some(l_min + HalfInt::integer(2)));
    let l_max = need(s.lmax, "lmax")?;
    if l_max.twice() < l_min.twice() || (l_max.twice() - l_min.twice()) % 2 != 0 {
        return Err(CliError::Invalid(format!("--lmax must be |j| plus a non-negative integer, got {l_max}")));
    }
    let phi = need(s.phi, "phi")?;
    let points: Vec<SphPoint> =
        linspace(0.0, PI, need(s.steps, "steps")?).into_iter().map(|t| SphPoint::new(t, phi)).collect();
    let mut lms = Vec::new();
    let mut l = l_min;
    while l.twice() <= l_max.twice() {
        lms.extend(l.ms().collect::<Vec<_>>().into_iter().rev().map(|m| (l, m)));
        l = l + HalfInt::integer(1);
    }
    let rows = harmonic_table(j, &lms, &points)?;
    let cfg = RunConfig::new("harmonics", s.clone());
    let text = match need(s.format, "format")? {
        Format::Csv => {
            let mut csv = Csv::new(&cfg, &["l", "m", "theta", "phi", "re", "im"])?;
            for r in &rows {
                csv.row(&[
                    r.l.to_string(),
                    r.m.to_string(),
                    num(r.theta),
                    num(r.phi),
                    num(r.value.re),
                    num(r.value.im),
                ]);
            }
            csv.finish()
        }
        Format::Json => json_document(&cfg, "rows", &rows)?,
    };
    Ok(Outcome::ok(text))
}

pub fn tail_check(flags: Settings) -> Result<Outcome, CliError> {
    let s = flags.resolve(Settings {
        j: Some(HalfInt::integer(100)),
        d: Some(2),
        epsilon: Some(0.3),
        delta: Some(0.25),
        steps: Some(2),
        format: Some(Format::Csv),
        ..Default::default()
    })?;
    let j = need(s.j, "j")?;
    let d = need(s.d, "d")?;
    let eps = need(s.epsilon, "epsilon")?;
    let tol = need(s.delta, "delta")?;
    let mut rows = Vec::new();
    let mut spin = j;
    for _ in 0..need(s.steps, "steps")? {
        rows.push(tail_failure(spin, d, eps)?);
        spin = HalfInt::from_twice(spin.twice() * 4);
    }
    let dev: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    let passed = dev.first().is_some_and(|&e| e <= tol) && dev.windows(2).all(|w| w[1] < w[0]);
    let cfg = RunConfig::new("tail-check", s.clone());
    let text = match need(s.format, "format")? {
        Format::Csv => {
            let mut csv = Csv::new(&cfg, &["j", "epsilon", "numeric", "laplace", "ratio"])?;
            for r in &rows {
                csv.row(&[r.j.to_string(), num(r.epsilon), num(r.numeric_tail), num(r.laplace_tail), num(r.ratio)]);
            }
            csv.finish()
        }
        Format::Json => json_document(&cfg, "rows", &rows)?,
    };
    Ok(Outcome { text, passed })
}
