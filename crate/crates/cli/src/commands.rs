//! `validate`, `estimate` and `scan`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use unidet::estimation::{convergence_scan_with, estimate_with, loglog_slope, EstimateOptions, EstimationReport};
use unidet::frames::is_spanning;
use unidet::operator::{random_density_with_rng, random_operator, seeded_rng};
use unidet::povm::{exact_expectation, Measurement};
use unidet::{DetectorSpec, State, UniversalDetector};

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::CliError;

/// Tolerance for exact (non-sampled) checks.
pub const EXACT_TOLERANCE: f64 = 1e-8;

/// Samples per case when a continuous detector is checked by Monte Carlo.
const CONTINUOUS_CHECK_SAMPLES: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    fn skip(name: &str, detail: &str) -> Self {
        Self {
            name: name.into(),
            status: Status::Skip,
            detail: detail.into(),
        }
    }
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    detector: String,
    seed: u64,
    passed: bool,
    checks: &'a [Check],
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    detector: String,
    d: usize,
    observable: &'a str,
    state: &'a str,
    report: &'a EstimationReport,
}

#[derive(Serialize)]
struct ScanOutput<'a> {
    detector: String,
    d: usize,
    observable: &'a str,
    state: &'a str,
    seed: u64,
    loglog_slope: Option<f64>,
    reports: &'a [EstimationReport],
}

fn format_of(cfg: &ExperimentConfig) -> OutputFormat {
    cfg.format.unwrap_or_default()
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_csv(dir: &Path, name: &str, rows: &[unidet::estimation::EstimateRecord]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(name))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn build(spec: &DetectorSpec, ancilla: Option<State>) -> Result<UniversalDetector, CliError> {
    spec.build(ancilla)
        .map_err(|e| CliError::Failed(format!("cannot build detector {spec}: {e}")))
}

/// POVM validity, universality rank, and the exact identity on a seeded
/// batch of random inputs. Returns whether every check passed.
pub fn validate(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let spec = cfg.detector_spec()?;
    let seed = cfg.require_seed()?;
    let cases = cfg.cases.unwrap_or(20);
    let nu = match cfg.ancilla(&spec)? {
        Some(nu) => nu,
        None => spec.default_ancilla()?,
    };
    let measurement = spec.measurement()?;
    let mut checks = Vec::new();

    checks.push(match measurement.validate(EXACT_TOLERANCE) {
        Ok(r) => Check::new(
            "povm",
            r.passed,
            format!(
                "min eigenvalue {:.3e}, completeness defect {:.3e} (trace norm {:.3e})",
                r.min_eigenvalue, r.completeness_defect, r.completeness_trace_defect
            ),
        ),
        Err(_) => Check::skip("povm", "continuous Bell density d|U⟩⟩⟨⟨U| over Haar measure"),
    });

    checks.push(match measurement.induced_family(&nu) {
        Ok(fam) => {
            let r = is_spanning(&fam);
            Check::new(
                "universality",
                r.spans,
                format!(
                    "induced family rank {} of {}, least singular value {:.3e}",
                    r.rank, r.dim, r.least_singular_value
                ),
            )
        }
        Err(_) => Check::skip(
            "universality",
            "continuous family; checked through the dual constraints",
        ),
    });

    let det = spec.build(Some(nu));
    match &det {
        Ok(_) => checks.push(Check::new("detector", true, format!("{spec} with its processing rule"))),
        Err(e) => checks.push(Check::new("detector", false, e.to_string())),
    }

    if let Ok(det) = &det {
        checks.push(identity_check(det, cases, seed)?);
    } else {
        checks.push(Check::skip("identity", "no detector"));
    }

    let passed = checks.iter().all(|c| c.status != Status::Fail);
    writeln!(out, "validate {spec} (seed {seed})")?;
    for c in &checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        writeln!(out, "  {tag}  {:<13} {}", c.name, c.detail)?;
    }
    writeln!(
        out,
        "{}",
        if passed {
            "all checks passed"
        } else {
            "some checks failed"
        }
    )?;
    if let Some(dir) = &cfg.out {
        write_json(
            dir,
            "validate.json",
            &ValidateOutput {
                detector: spec.to_string(),
                seed,
                passed,
                checks: &checks,
            },
        )?;
    }
    Ok(passed)
}

fn identity_check(det: &UniversalDetector, cases: usize, seed: u64) -> Result<Check, CliError> {
    let d = det.dims().0;
    let mut worst = 0.0f64;
    let continuous = matches!(det.measurement(), Measurement::Continuous(_));
    let cases = if continuous { cases.min(3) } else { cases };
    for c in 0..cases {
        let mut rng = seeded_rng(seed, c as u64);
        let rank = 1 + c % d;
        let rho = random_density_with_rng(d, rank, &mut rng)?;
        let o = random_operator(d, &mut rng);
        if continuous {
            let r = estimate_with(
                det,
                &rho,
                &o,
                CONTINUOUS_CHECK_SAMPLES,
                seed.wrapping_add(c as u64),
                EstimateOptions::default(),
            )?;
            worst = worst.max(r.z_score());
        } else {
            let got = exact_expectation(det, &rho, &o)?;
            worst = worst.max((got - rho.op().trace_product(&o)?).norm());
        }
    }
    Ok(if continuous {
        Check::new(
            "identity",
            worst < 5.0,
            format!("{cases} Monte Carlo cases at n = {CONTINUOUS_CHECK_SAMPLES}, largest |z| {worst:.2}"),
        )
    } else {
        Check::new(
            "identity",
            worst < EXACT_TOLERANCE,
            format!("{cases} random (ρ, O), largest error {worst:.3e}"),
        )
    })
}

fn options(cfg: &ExperimentConfig) -> EstimateOptions {
    EstimateOptions {
        timing: cfg.timing.unwrap_or(false),
        ..EstimateOptions::default()
    }
}

fn print_report(out: &mut dyn Write, r: &EstimationReport) -> Result<(), CliError> {
    writeln!(out, "  n          {}", r.samples)?;
    writeln!(
        out,
        "  estimate   {:.6} {:+.6}i ± {:.6}",
        r.estimate.re, r.estimate.im, r.stderr
    )?;
    writeln!(out, "  exact      {:.6} {:+.6}i", r.exact.re, r.exact.im)?;
    writeln!(out, "  |z|        {:.2}", r.z_score())?;
    if let Some(a) = r.acceptance_rate {
        writeln!(out, "  acceptance {a:.4}")?;
    }
    if let Some(t) = r.wall_s {
        writeln!(out, "  wall       {t:.3} s")?;
    }
    Ok(())
}

pub fn estimate(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<EstimationReport, CliError> {
    let spec = cfg.detector_spec()?;
    let seed = cfg.require_seed()?;
    let n = cfg.require_n()?;
    let d = spec.dim();
    let rho = cfg.state(d)?;
    let obs = cfg.observable(d)?;
    let ancilla = cfg.ancilla(&spec)?;
    let det = build(&spec, ancilla)?;
    let report = estimate_with(&det, &rho.value, &obs.value, n, seed, options(cfg))?;
    writeln!(out, "estimate {spec}  observable {obs}  state {rho}  seed {seed}")?;
    print_report(out, &report)?;
    if let Some(dir) = &cfg.out {
        let fmt = format_of(cfg);
        if fmt.json() {
            write_json(
                dir,
                "estimate.json",
                &EstimateOutput {
                    detector: spec.to_string(),
                    d,
                    observable: &obs.label,
                    state: &rho.label,
                    report: &report,
                },
            )?;
        }
        if fmt.csv() {
            write_csv(dir, "estimate.csv", &[report.record(&spec.to_string(), d, &obs.label)])?;
        }
    }
    Ok(report)
}

pub fn scan(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Vec<EstimationReport>, CliError> {
    let spec = cfg.detector_spec()?;
    let seed = cfg.require_seed()?;
    let schedule = cfg.schedule()?;
    let d = spec.dim();
    let rho = cfg.state(d)?;
    let obs = cfg.observable(d)?;
    let ancilla = cfg.ancilla(&spec)?;
    let det = build(&spec, ancilla)?;
    let reports = convergence_scan_with(&det, &rho.value, &obs.value, &schedule, seed, options(cfg))?;
    let slope = loglog_slope(&reports);
    let summary = summary_text(&reports, slope);
    writeln!(out, "scan {spec}  observable {obs}  state {rho}  seed {seed}")?;
    write!(out, "{summary}")?;
    if let Some(dir) = &cfg.out {
        let fmt = format_of(cfg);
        let name = spec.to_string();
        if fmt.csv() {
            let rows: Vec<_> = reports.iter().map(|r| r.record(&name, d, &obs.label)).collect();
            write_csv(dir, "scan.csv", &rows)?;
        }
        if fmt.json() {
            write_json(
                dir,
                "scan.json",
                &ScanOutput {
                    detector: name,
                    d,
                    observable: &obs.label,
                    state: &rho.label,
                    seed,
                    loglog_slope: slope,
                    reports: &reports,
                },
            )?;
        }
        fs::create_dir_all(dir)?;
        fs::write(dir.join("scan_summary.txt"), &summary)?;
    }
    Ok(reports)
}

/// Plain-text table of `log10 n` against `log10 stderr` with the fitted slope.
pub fn summary_text(reports: &[EstimationReport], slope: Option<f64>) -> String {
    let mut s = String::from("  n            stderr        log10 n   log10 stderr   estimate\n");
    for r in reports {
        let lse = if r.stderr > 0.0 {
            format!("{:>12.4}", r.stderr.log10())
        } else {
            format!("{:>12}", "-inf")
        };
        s.push_str(&format!(
            "  {:<12} {:<13.6e} {:>8.4}   {lse}   {:.6} {:+.6}i\n",
            r.samples,
            r.stderr,
            (r.samples as f64).log10(),
            r.estimate.re,
            r.estimate.im
        ));
    }
    match slope {
        Some(b) => s.push_str(&format!(
            "  log-log slope of stderr vs n: {b:.4} (1/sqrt(n) scaling gives -0.5)\n"
        )),
        None => s.push_str("  log-log slope of stderr vs n: undefined (zero spread)\n"),
    }
    s
}
