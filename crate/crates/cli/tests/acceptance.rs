//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use unidet::detectors::locc::locc_detector;
use unidet::detectors::su2::{
    bell_resolution, coherent_completeness, su2_default_ancilla, su2_factorize, su2_grid_povm, su2_numeric_processing,
    su2_unitary, SpinSystem, Su2Grid,
};
use unidet::detectors::sud::{sud_detector, sud_xi};
use unidet::detectors::weyl::{cocycle, weyl_bell_povm, weyl_detector, weyl_processing, weyl_unitary};
use unidet::estimation::estimate;
use unidet::operator::{haar_unitary, random_density_with_rng, random_hermitian, random_operator, seeded_rng};
use unidet::povm::{exact_expectation, generic_coefficients, is_universal};
use unidet::{Operator, State, UniversalDetector, C64};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_time(started: Instant, limit: Duration, detail: String) -> Outcome {
    let t = started.elapsed();
    if t > limit {
        return Err(format!(
            "{detail}; took {:.1} s, limit {} s",
            t.as_secs_f64(),
            limit.as_secs()
        ));
    }
    Ok(format!("{detail}; {:.1} s", t.as_secs_f64()))
}

fn identity_error(det: &UniversalDetector, cases: usize, seed: u64) -> Result<f64, String> {
    let d = det.dims().0;
    let mut worst = 0.0f64;
    for c in 0..cases {
        let mut rng = seeded_rng(seed, c as u64);
        let rho = random_density_with_rng(d, 1 + c % d, &mut rng).map_err(|e| e.to_string())?;
        let o = random_operator(d, &mut rng);
        let got = exact_expectation(det, &rho, &o).map_err(|e| e.to_string())?;
        let want = rho.op().trace_product(&o).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).norm());
    }
    Ok(worst)
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for d in 2..=5 {
        let det = weyl_detector(d).map_err(|e| format!("weyl d={d}: {e}"))?;
        worst = worst.max(identity_error(&det, 100, 100 + d as u64)?);
    }
    for d in 2..=3 {
        let det = locc_detector(d).map_err(|e| format!("locc d={d}: {e}"))?;
        worst = worst.max(identity_error(&det, 100, 200 + d as u64)?);
    }
    let detail = format!("weyl d=2..5, locc d=2,3, 100 pairs each, max error {worst:.2e}");
    if worst >= 1e-8 {
        return Err(detail);
    }
    within_time(started, Duration::from_secs(30), detail)
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for d in 2..=4 {
        let det = weyl_detector(d).map_err(|e| e.to_string())?;
        for c in 0..25 {
            let mut rng = seeded_rng(300 + d as u64, c);
            let o = random_operator(d, &mut rng);
            let closed = weyl_processing(d, det.ancilla(), &o).map_err(|e| e.to_string())?;
            let generic = generic_coefficients(det.measurement(), det.ancilla(), &o).map_err(|e| e.to_string())?;
            for (a, b) in closed.iter().zip(&generic) {
                worst = worst.max((a.re - b.re).abs()).max((a.im - b.im).abs());
            }
        }
    }
    ensure(
        worst < 1e-8,
        format!("d=2..4, 25 observables each, max componentwise gap {worst:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut composition = 0.0f64;
    let mut orthogonality = 0.0f64;
    let mut summation = 0.0f64;
    for d in 2..=6 {
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|m| (0..d).map(move |n| (m, n))).collect();
        let u: Vec<Operator> = pairs.iter().map(|&(m, n)| weyl_unitary(d, m, n).unwrap()).collect();
        for (a, ua) in pairs.iter().zip(&u) {
            for (b, ub) in pairs.iter().zip(&u) {
                let lhs = ua.matmul(ub).unwrap().matmul(&ua.adjoint()).unwrap();
                let rhs = ub.scale(C64::from_polar(1.0, cocycle(d, *a, *b)));
                composition = composition.max(lhs.max_abs_diff(&rhs).unwrap());
                let tr = ua.adjoint().matmul(ub).unwrap().trace().unwrap();
                let want = if a == b { d as f64 } else { 0.0 };
                orthogonality = orthogonality.max((tr - C64::new(want, 0.0)).norm());
            }
        }
        for g in &pairs {
            for b in &pairs {
                let s: C64 = pairs
                    .iter()
                    .map(|a| C64::from_polar(1.0, cocycle(d, *a, *g) + cocycle(d, *b, *a)))
                    .sum();
                let want = if g == b { (d * d) as f64 } else { 0.0 };
                summation = summation.max((s - C64::new(want, 0.0)).norm());
            }
        }
    }
    ensure(
        composition < 1e-12 && orthogonality < 1e-12 && summation < 1e-12,
        format!(
            "d=2..6 exhaustive: composition {composition:.1e}, orthogonality {orthogonality:.1e}, cocycle sum {summation:.1e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let started = Instant::now();
    let mut trace_gap = 0.0f64;
    let mut overlap_gap = 0.0f64;
    for d in 2..=4 {
        for c in 0..100 {
            let mut rng = seeded_rng(400 + d as u64, c);
            let phi = haar_unitary(d, &mut rng).matrix().column(0).into_owned();
            let psi = haar_unitary(d, &mut rng).matrix().column(0).into_owned();
            let xi = sud_xi(&phi, &psi).map_err(|e| e.to_string())?;
            let nu_t = Operator::projector(&phi);
            let df = d as f64;
            trace_gap = trace_gap.max((xi.trace().unwrap() - C64::new(df, 0.0)).norm());
            let t = nu_t.matmul(&xi.adjoint()).unwrap().trace().unwrap();
            overlap_gap = overlap_gap.max((t - C64::new(df * df, 0.0)).norm());
        }
    }
    if trace_gap >= 1e-10 || overlap_gap >= 1e-10 {
        return Err(format!("Tr ξ gap {trace_gap:.1e}, Tr[νᵀξ†] gap {overlap_gap:.1e}"));
    }
    let det = sud_detector(2).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for c in 0..10u64 {
        let mut rng = seeded_rng(450, c);
        let rho = random_density_with_rng(2, 1 + (c as usize) % 2, &mut rng).map_err(|e| e.to_string())?;
        let o = random_operator(2, &mut rng);
        let r = estimate(&det, &rho, &o, 200_000, 4500 + c).map_err(|e| e.to_string())?;
        let zr = (r.estimate.re - r.exact.re).abs() / r.stderr_re;
        let zi = (r.estimate.im - r.exact.im).abs() / r.stderr_im;
        worst = worst.max(zr).max(zi);
    }
    let detail = format!(
        "ξ gaps {trace_gap:.1e}/{overlap_gap:.1e} over 300 pairs; SU(2) Monte Carlo, 10 cases at N=2e5, largest componentwise z {worst:.2}"
    );
    if worst >= 4.0 {
        return Err(detail);
    }
    within_time(started, Duration::from_secs(120), detail)
}

fn criterion_5() -> Outcome {
    let grid = Su2Grid::default();
    let mut resolution = 0.0f64;
    let mut coherent = 0.0f64;
    for two_j in [1usize, 2] {
        let sys = SpinSystem::new(two_j);
        let d = sys.dim();
        let r = bell_resolution(&sys, &grid);
        resolution = resolution.max(r.max_abs_diff(&Operator::identity(d * d)).unwrap());
        for k in 0..d {
            let m = sys.j() - k as f64;
            let c = coherent_completeness(&sys, m, 40, 40).map_err(|e| e.to_string())?;
            coherent = coherent.max(c.max_abs_diff(&Operator::identity(d)).unwrap());
        }
    }
    let mut factorize = 0.0f64;
    for c in 0..100u64 {
        let mut rng = seeded_rng(500, c);
        let (psi, n) = unidet::detectors::su2::axis_angle(&haar_unitary(2, &mut rng));
        let sys = SpinSystem::new(1 + (c as usize) % 3);
        let f = su2_factorize(psi, n).map_err(|e| e.to_string())?;
        let want = su2_unitary(&sys, psi, n).map_err(|e| e.to_string())?;
        factorize = factorize.max(f.reconstruct(&sys).max_abs_diff(&want).unwrap());
    }
    let sys = SpinSystem::new(1);
    let nu = su2_default_ancilla(&sys);
    let povm = su2_grid_povm(&sys, &grid).map_err(|e| e.to_string())?;
    let mut processing = 0.0f64;
    for c in 0..10u64 {
        let mut rng = seeded_rng(550, c);
        let rho = random_density_with_rng(2, 1 + (c as usize) % 2, &mut rng).map_err(|e| e.to_string())?;
        let o = random_operator(2, &mut rng);
        let f = su2_numeric_processing(&sys, &nu, &grid, &o).map_err(|e| e.to_string())?;
        let p = povm.probabilities(&rho, &nu).map_err(|e| e.to_string())?;
        let got: C64 = f.iter().zip(&p).map(|(f, p)| f * *p).sum();
        processing = processing.max((got - rho.op().trace_product(&o).unwrap()).norm());
    }
    ensure(
        resolution < 1e-3 && coherent < 1e-3 && factorize < 1e-8 && processing < 1e-3,
        format!(
            "grid {grid}: resolution {resolution:.1e}, coherent completeness {coherent:.1e}, factorize {factorize:.1e}, numeric processing {processing:.1e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let det = weyl_detector(2).map_err(|e| e.to_string())?;
    let mut rng = seeded_rng(600, 0);
    let rho = random_density_with_rng(2, 2, &mut rng).map_err(|e| e.to_string())?;
    let o = random_hermitian(2, &mut rng);
    let mut dev = 0.0;
    let mut var = 0.0;
    for k in 0..200u64 {
        let r = estimate(&det, &rho, &o, 10_000, 6000 + k).map_err(|e| e.to_string())?;
        dev += r.estimate.re - r.exact.re;
        var += r.stderr_re * r.stderr_re;
    }
    let z = dev / var.sqrt();
    let small = estimate(&det, &rho, &o, 1_000, 601).map_err(|e| e.to_string())?;
    let large = estimate(&det, &rho, &o, 100_000, 602).map_err(|e| e.to_string())?;
    let ratio = small.stderr / large.stderr;
    ensure(
        z.abs() <= 4.0 && (5.0..=20.0).contains(&ratio),
        format!("200 runs at n=1e4: aggregate z {z:+.2}; stderr(1e3)/stderr(1e5) = {ratio:.2} (ideal 10)"),
    )
}

fn criterion_7() -> Outcome {
    let mut report = Vec::new();
    let mut ok = true;
    for d in 2..=5 {
        let p = weyl_bell_povm(d).map_err(|e| e.to_string())?;
        let u = is_universal(&p, &State::maximally_mixed(d)).map_err(|e| e.to_string())?;
        ok &= !u.universal && u.rank == 1;
        report.push(format!("weyl d={d} rank {}", u.rank));
    }
    for two_j in [1usize, 2] {
        let sys = SpinSystem::new(two_j);
        let p = su2_grid_povm(&sys, &Su2Grid::new(8, 6, 6).unwrap()).map_err(|e| e.to_string())?;
        let u = is_universal(&p.to_povm(), &State::maximally_mixed(sys.dim())).map_err(|e| e.to_string())?;
        ok &= !u.universal && u.rank == 1;
        report.push(format!("su2 2j={two_j} rank {}", u.rank));
    }
    ensure(ok, format!("ν = I/d: {}", report.join(", ")))
}

fn run_cli(args: &[&str], config: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_unidet"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!(
            "{args:?} exited with {}: {}",
            status.status,
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs = [
        (
            "estimate",
            r#"{"detector": "locc:d=3", "state": "random:rank=2:seed=5", "observable": "weyl:1,2", "n": 20000, "seed": 11}"#,
        ),
        (
            "scan",
            r#"{"detector": "weyl:d=2", "state": "random:rank=1:seed=3", "observable": "pauli:Z", "schedule": [100, 1000, 10000], "seed": 12}"#,
        ),
        (
            "estimate",
            r#"{"detector": "sud:d=2", "state": "basis:0", "observable": "pauli:X", "n": 5000, "seed": 13}"#,
        ),
        ("validate", r#"{"detector": "weyl:d=3", "seed": 14}"#),
    ];
    let mut compared = 0;
    for (i, (cmd, cfg)) in runs.iter().enumerate() {
        let config = dir.path().join(format!("config{i}.json"));
        fs::write(&config, cfg).map_err(|e| e.to_string())?;
        let a = dir.path().join(format!("a{i}"));
        let b = dir.path().join(format!("b{i}"));
        run_cli(&[cmd], &config, &a)?;
        run_cli(&[cmd], &config, &b)?;
        let mut names: Vec<_> = fs::read_dir(&a)
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        if names.is_empty() {
            return Err(format!("{cmd} wrote no files"));
        }
        for name in names {
            let x = fs::read(a.join(&name)).map_err(|e| e.to_string())?;
            let y = fs::read(b.join(&name)).map_err(|e| format!("{name:?}: {e}"))?;
            if x != y {
                return Err(format!("{cmd}: {name:?} differs between runs"));
            }
            compared += 1;
        }
    }
    Ok(format!(
        "{} runs repeated, {compared} output files byte-identical",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("exact universality identity", criterion_1),
        ("closed-form vs generic duals", criterion_2),
        ("Weyl group relations", criterion_3),
        ("SU(d) dual constraints and Monte Carlo", criterion_4),
        ("SU(2) continuous machinery", criterion_5),
        ("Monte Carlo unbiasedness and scaling", criterion_6),
        ("negative control", criterion_7),
        ("CLI determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
