//! Acceptance gate: one PASS/FAIL line per criterion. Runs without the test
//! harness so the report is always printed; exits non-zero on any failure.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinqec::coherent::{diagonal_operator, overlap_points, rotation_matrix_element, SphPoint, SphereQuadrature, SymbolBand};
use spinqec::finite_gkp::{build_gkp_code, error_tiling, exhaustive_check, GkpParams};
use spinqec::lll_codes::{
    build_codewords, cyclic_overlap_closed_form, logical_operators, logical_x_exact, zbar_residuals, CodeSpec,
};
use spinqec::monopole::{build_full_landau_code, momentum_shift_analysis, monopole_y, MonopoleHarmonic};
use spinqec::qec_check::{kl_check, ErrorKind, ErrorSet};
use spinqec::recovery::tail_failure;
use spinqec::reference;
use spinqec::rotations::{haar_random_with, wigner_d_matrix, EulerAngles};
use spinqec::{HalfInt, Operator};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn int(n: i64) -> HalfInt {
    HalfInt::integer(n)
}

fn uniform_point(rng: &mut ChaCha8Rng) -> SphPoint {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    SphPoint::new(z.acos(), rng.gen_range(0.0..TAU))
}

fn closed_form_vs_sandwich() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for tj in 1..=40 {
        let j = HalfInt::from_twice(tj);
        for _ in 0..50 {
            let r = haar_random_with(&mut rng);
            let (out, inp) = (uniform_point(&mut rng), uniform_point(&mut rng));
            let fast = rotation_matrix_element(j, &out, &r, &inp);
            let slow = reference::sandwich(j, &out, &r, &inp);
            let err = (fast - slow).norm();
            let ok = if slow.norm() < 1e-12 { err < 1e-12 } else { err / slow.norm() < 1e-9 };
            if slow.norm() >= 1e-12 {
                worst = worst.max(err / slow.norm());
            }
            failures += usize::from(!ok);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        failures == 0 && elapsed < Duration::from_secs(30),
        format!("2000 triples, worst relative {worst:.2e}, {failures} failures, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn overlap_law() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let j = HalfInt::from_twice(rng.gen_range(1..=40));
        let (a, b) = (uniform_point(&mut rng), uniform_point(&mut rng));
        let law = ((1.0 + a.dot(&b)) / 2.0).powf(2.0 * j.value()).sqrt();
        worst = worst.max((overlap_points(j, &a, &b).norm() - law).abs());
    }
    verdict(worst < 1e-12, format!("1000 pairs, worst {worst:.2e}"))
}

fn resolution_of_identity() -> Verdict {
    let worst = (0..=30)
        .map(|tj| {
            let j = HalfInt::from_twice(tj);
            let one = diagonal_operator(j, |_| Complex64::new(1.0, 0.0), Some(SymbolBand::azimuthal(0)));
            one.realized.max_abs_diff(&Operator::identity(j))
        })
        .fold(0.0, f64::max);
    verdict(worst < 1e-10, format!("j <= 15, worst entry {worst:.2e}"))
}

fn antipodal_kl() -> Verdict {
    let mut worst_delta: f64 = 0.0;
    let mut worst_margin = f64::NEG_INFINITY;
    for theta0 in [0.1, 0.2, 0.4] {
        for jv in [4, 8, 16] {
            let code = build_codewords(&CodeSpec::antipodal(int(jv), 0.6)).unwrap();
            let errs = ErrorSet::new(ErrorKind::ConjugatedY { phi0: 0.6, theta_max: theta0 }, 21);
            let rep = kl_check(&code, &errs, 3).unwrap();
            let bound = ((1.0 - (2.0 * theta0).cos()) / 2.0).powi(jv as i32);
            worst_delta = worst_delta.max(rep.delta_star);
            worst_margin = worst_margin.max(rep.eps_star - bound);
        }
    }
    verdict(
        worst_delta <= 1e-12 && worst_margin <= 1e-12,
        format!("delta* max {worst_delta:.2e}, eps* - bound max {worst_margin:.2e}"),
    )
}

fn equatorial_suite() -> Verdict {
    let mut exact = true;
    let mut worst_comm: f64 = 0.0;
    for d in 2..=5 {
        for jv in 1..=12 {
            exact &= logical_x_exact(int(jv), d).unwrap().pow(d).is_identity();
            let ops = logical_operators(&CodeSpec::equatorial(int(jv), d)).unwrap();
            let w = Complex64::from_polar(1.0, TAU / d as f64);
            let diff = &(&ops.zbar * &ops.xbar) - &(&ops.xbar * &ops.zbar).scale(w);
            worst_comm = worst_comm.max(diff.max_abs());
        }
    }
    let mut decreasing = true;
    for d in 2..=5 {
        let res: Vec<f64> = [4, 8, 16, 32]
            .iter()
            .map(|&jv| {
                let spec = CodeSpec::equatorial(int(jv), d);
                let code = build_codewords(&spec).unwrap();
                zbar_residuals(&code, &logical_operators(&spec).unwrap().zbar).into_iter().fold(0.0, f64::max)
            })
            .collect();
        decreasing &= res.windows(2).all(|w| w[1] < w[0]);
    }
    verdict(
        exact && worst_comm < 1e-10 && decreasing,
        format!("X^d = I exact: {exact}, commutator max {worst_comm:.2e}, residuals decreasing: {decreasing}"),
    )
}

fn finite_gkp() -> Verdict {
    let start = Instant::now();
    let params = GkpParams::all_up_to(60);
    let rows: Vec<_> = params.iter().map(|&p| exhaustive_check(p)).collect();
    let min_fid = rows.iter().map(|r| r.min_fidelity).fold(1.0, f64::min);
    let all = rows.iter().all(|r| r.all_corrected);
    let tiling = error_tiling(&build_gkp_code(GkpParams::new(2, 3, 3).unwrap()));
    let elapsed = start.elapsed();
    verdict(
        all && min_fid >= 1.0 - 1e-12 && tiling.tiles && tiling.vectors == 18 && elapsed < Duration::from_secs(60),
        format!(
            "{} parameter sets, min fidelity {min_fid:.15}, tiling deviation {:.1e}, {:.1} s",
            rows.len(),
            tiling.max_gram_deviation,
            elapsed.as_secs_f64()
        ),
    )
}

fn laplace_tail() -> Verdict {
    let r100 = tail_failure(int(100), 2, 0.3).unwrap().ratio;
    let r400 = tail_failure(int(400), 2, 0.3).unwrap().ratio;
    verdict(
        (0.75..=1.25).contains(&r100) && (r400 - 1.0).abs() < (r100 - 1.0).abs(),
        format!("ratio {r100:.4} at j=100, {r400:.4} at j=400"),
    )
}

fn cyclic_limits() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for tj in 1..=40 {
        let j = HalfInt::from_twice(tj);
        for n in 1..=5 {
            let code = build_codewords(&CodeSpec::cyclic(j, n)).unwrap();
            for _ in 0..20 {
                let theta = rng.gen_range(-PI..PI);
                let direct = wigner_d_matrix(j, &EulerAngles::z(theta)).sandwich(&code.basis[0], &code.basis[1]);
                worst = worst.max((direct - cyclic_overlap_closed_form(j, n, theta)).norm());
            }
        }
    }
    // Aligned angles Θ = π/N climb to 1; misaligned ones fall to 0.
    let mut trends = true;
    for n in 1..=5usize {
        let cell = TAU / n as f64;
        let curve = |theta: f64| -> Vec<f64> {
            [8, 16, 32, 64].iter().map(|&jv| cyclic_overlap_closed_form(int(jv), n, theta).norm()).collect()
        };
        let aligned = curve(PI / n as f64);
        trends &= aligned.windows(2).all(|w| w[1] >= w[0] - 1e-12) && (aligned[3] - 1.0).abs() < 1e-6;
        for frac in [0.125, 0.25, 0.375] {
            let off = curve(PI / n as f64 + frac * cell);
            trends &= off.windows(2).all(|w| w[1] < w[0]);
        }
    }
    verdict(worst < 1e-10 && trends, format!("closed form worst {worst:.2e}, trends: {trends}"))
}

fn monopole() -> Verdict {
    let mut path_gap: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    let quad = SphereQuadrature::for_degree(2 * 2 * 8 + 2, 40);
    let nodes = quad.nodes();
    for j2 in 0..=6 {
        let j = HalfInt::from_twice(j2);
        let mut harmonics: Vec<MonopoleHarmonic> = Vec::new();
        let mut l = j;
        while l.twice() <= 16 {
            harmonics.extend(l.ms().map(|m| monopole_y(j, l, m).unwrap()));
            l = l + int(1);
        }
        for y in &harmonics {
            for (theta, phi) in [(0.0, 0.0), (0.3, 0.2), (1.2, 2.0), (2.7, -1.1), (PI, 0.5)] {
                path_gap = path_gap.max((y.eval(theta, phi) - y.eval_wigner(theta, phi)).norm());
            }
        }
        let values: Vec<Vec<Complex64>> = harmonics.iter().map(|y| nodes.iter().map(|(p, _)| y.at(p)).collect()).collect();
        for a in 0..harmonics.len() {
            for b in a..harmonics.len() {
                let ip: Complex64 = nodes.iter().enumerate().map(|(i, (_, w))| values[a][i].conj() * values[b][i] * *w).sum();
                ortho = ortho.max((ip - if a == b { 1.0 } else { 0.0 }).norm());
            }
        }
    }
    let mut lattice = true;
    let mut verdicts = true;
    for n in 1..=12usize {
        for j2 in 0..=6 {
            let j = HalfInt::from_twice(j2);
            let code = build_full_landau_code(n, j, j + int(6)).unwrap();
            lattice &= code.support_residues() == vec![0];
            let mut l = j;
            while l.twice() <= code.l_max.twice() {
                for m in l.ms() {
                    let v = momentum_shift_analysis(&code, l, m).unwrap();
                    verdicts &= v.correctable == (2.0 * (l.value() + j.value()) < n as f64);
                }
                l = l + int(1);
            }
        }
    }
    verdict(
        path_gap < 1e-10 && ortho < 1e-10 && lattice && verdicts,
        format!("paths {path_gap:.2e}, orthonormality {ortho:.2e}, lattice: {lattice}, verdicts: {verdicts}"),
    )
}

fn run_cli(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_spinqec"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .stderr(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    assert!(status.code().is_some_and(|c| c <= 1), "{args:?}: {status}");
    std::fs::read(out).expect("output written")
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["kl-scan", "--j", "6", "--seed", "5"],
        &["overlap-curve", "--j", "5", "--steps", "17"],
        &["recovery-sweep", "--j", "12", "--steps", "3", "--samples", "20", "--seed", "9"],
        &["gkp-table", "--K", "3", "--r1", "3", "--r2", "5"],
        &["harmonics", "--j", "1/2", "--steps", "7"],
        &["tail-check", "--j", "50"],
    ];
    let mut same = 0;
    for (i, args) in cases.iter().enumerate() {
        let a = run_cli(dir.path(), &format!("{i}a"), args);
        let b = run_cli(dir.path(), &format!("{i}b"), args);
        same += usize::from(!a.is_empty() && a == b);
    }
    verdict(same == cases.len(), format!("{same}/{} subcommands byte-identical", cases.len()))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed-form matrix element vs sandwich", closed_form_vs_sandwich),
        ("coherent overlap law", overlap_law),
        ("resolution of identity", resolution_of_identity),
        ("antipodal KL suite", antipodal_kl),
        ("equatorial qudit suite", equatorial_suite),
        ("finite GKP exactness", finite_gkp),
        ("Laplace tail", laplace_tail),
        ("cyclic-code limits", cyclic_limits),
        ("monopole harmonics", monopole),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        println!("{} {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
