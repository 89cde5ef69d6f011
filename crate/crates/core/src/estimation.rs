//! Monte Carlo simulation of a universal detector: draw outcomes by the
//! Born rule and average the processing weights.
//!
//! Samples are produced in fixed-size chunks; chunk `c` draws from the
//! ChaCha stream `c` of the run seed, so results do not depend on how many
//! threads run the chunks.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::sud::{ContinuousBellPovm, GroupSampler};
use crate::error::{mismatch, Error, Result};
use crate::operator::{seeded_rng, Operator, State, C64};
use crate::povm::{bell_overlap, Measurement, UniversalDetector, Weights};

/// Samples per chunk.
pub const DEFAULT_CHUNK: usize = 4096;

/// Most negative outcome probability accepted as rounding noise.
pub const PROBABILITY_FLOOR: f64 = -1e-12;

/// Born-rule distribution of outcomes for a fixed input.
#[derive(Clone, Debug)]
pub enum OutcomeDistribution {
    Discrete(DiscreteDistribution),
    Continuous(BellDensity),
}

/// Normalized probabilities and their cumulative sums.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    probabilities: Vec<f64>,
    cdf: Vec<f64>,
}

impl DiscreteDistribution {
    /// Clamps entries in `[PROBABILITY_FLOOR, 0)` to zero and renormalizes.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidParameter("empty outcome distribution".into()));
        }
        if let Some(p) = raw.iter().find(|p| !p.is_finite() || **p < PROBABILITY_FLOOR) {
            return Err(Error::InvalidParameter(format!("outcome probability {p} is negative")));
        }
        let clamped: Vec<f64> = raw.iter().map(|p| p.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "outcome probabilities sum to {total}; the POVM is not complete"
            )));
        }
        let probabilities: Vec<f64> = clamped.iter().map(|p| p / total).collect();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // Pin the top of the CDF to 1 at the last outcome that can occur.
        let last = probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(cdf.len() - 1);
        for c in &mut cdf[last..] {
            *c = 1.0;
        }
        Ok(Self { probabilities, cdf })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Density `p(U) = d Tr[U† ρ U νᵀ]` with respect to Haar measure.
#[derive(Clone, Debug)]
pub struct BellDensity {
    povm: ContinuousBellPovm,
    rho: Operator,
    nu_t: Operator,
}

impl BellDensity {
    pub fn new(povm: &ContinuousBellPovm, rho: &State, nu: &State) -> Result<Self> {
        let d = povm.dim();
        if rho.dim() != d || nu.dim() != d {
            return Err(mismatch(
                format!("states of dim {d}"),
                format!("{} and {}", rho.dim(), nu.dim()),
            ));
        }
        Ok(Self {
            povm: povm.clone(),
            rho: rho.op().clone(),
            nu_t: nu.op().transpose(),
        })
    }

    pub fn povm(&self) -> &ContinuousBellPovm {
        &self.povm
    }

    pub fn density(&self, u: &Operator) -> f64 {
        self.povm.dim() as f64 * bell_overlap(&self.rho, u, &self.nu_t).re
    }

    /// `p(U) ≤ d`, since `p(U)/d` is the overlap of two states.
    pub fn bound(&self) -> f64 {
        self.povm.density_bound()
    }

    /// Rejection sampling against the Haar proposal. Returns the accepted
    /// element and the number of proposals used.
    pub fn sample<R: Rng + ?Sized>(&self, sampler: &GroupSampler, rng: &mut R) -> (Operator, u64) {
        let bound = self.bound();
        let mut tries = 0;
        loop {
            tries += 1;
            let u = sampler.sample(rng);
            let accept: f64 = rng.random();
            if accept * bound < self.density(&u) {
                return (u, tries);
            }
        }
    }
}

pub fn outcome_distribution(det: &UniversalDetector, rho: &State) -> Result<OutcomeDistribution> {
    match det.measurement() {
        Measurement::Continuous(c) => Ok(OutcomeDistribution::Continuous(BellDensity::new(
            c,
            rho,
            det.ancilla(),
        )?)),
        m => Ok(OutcomeDistribution::Discrete(DiscreteDistribution::new(
            m.probabilities(rho, det.ancilla())?,
        )?)),
    }
}

/// A single measurement record.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Index(usize),
    Element(Operator),
}

/// Drawn outcomes, with the number of proposals for rejection sampling.
#[derive(Clone, Debug)]
pub struct Samples {
    pub outcomes: Vec<Outcome>,
    pub proposals: u64,
}

impl Samples {
    /// Accepted over proposed; `1` for discrete draws.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.outcomes.len() as f64 / self.proposals as f64
        }
    }
}

fn chunk_bounds(n: usize, chunk: usize) -> Vec<(u64, usize)> {
    (0..n.div_ceil(chunk))
        .map(|c| (c as u64, chunk.min(n - c * chunk)))
        .collect()
}

pub fn sample_outcomes(dist: &OutcomeDistribution, n: usize, seed: u64) -> Samples {
    sample_outcomes_chunked(dist, n, seed, DEFAULT_CHUNK)
}

pub fn sample_outcomes_chunked(dist: &OutcomeDistribution, n: usize, seed: u64, chunk: usize) -> Samples {
    let chunk = chunk.max(1);
    let parts: Vec<(Vec<Outcome>, u64)> = chunk_bounds(n, chunk)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = seeded_rng(seed, c);
            match dist {
                OutcomeDistribution::Discrete(p) => ((0..len).map(|_| Outcome::Index(p.sample(&mut rng))).collect(), 0),
                OutcomeDistribution::Continuous(b) => {
                    let sampler = b.povm().sampler();
                    let mut tries = 0;
                    let out = (0..len)
                        .map(|_| {
                            let (u, t) = b.sample(&sampler, &mut rng);
                            tries += t;
                            Outcome::Element(u)
                        })
                        .collect();
                    (out, tries)
                }
            }
        })
        .collect();
    let mut outcomes = Vec::with_capacity(n);
    let mut proposals = 0;
    for (o, t) in parts {
        outcomes.extend(o);
        proposals += t;
    }
    Samples { outcomes, proposals }
}

/// Running mean and centred second moments of complex values.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: C64,
    m2_re: f64,
    m2_im: f64,
    sum_sq: f64,
    proposals: u64,
}

impl Moments {
    fn push(&mut self, x: C64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        let delta2 = x - self.mean;
        self.m2_re += delta.re * delta2.re;
        self.m2_im += delta.im * delta2.im;
        self.sum_sq += x.norm_sqr();
    }

    /// Pairwise combination of two disjoint sample sets.
    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return Self {
                proposals: self.proposals + other.proposals,
                ..other
            };
        }
        if other.n == 0 {
            return Self {
                proposals: self.proposals + other.proposals,
                ..self
            };
        }
        let n = self.n + other.n;
        let (na, nb) = (self.n as f64, other.n as f64);
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * (nb / n as f64),
            m2_re: self.m2_re + other.m2_re + delta.re * delta.re * na * nb / n as f64,
            m2_im: self.m2_im + other.m2_im + delta.im * delta.im * na * nb / n as f64,
            sum_sq: self.sum_sq + other.sum_sq,
            proposals: self.proposals + other.proposals,
        }
    }
}

/// Result of one Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    /// `(1/N) Σ_k f(x_k)`.
    #[serde(with = "complex_fields")]
    pub estimate: C64,
    /// Sample standard deviation of `f` (as a complex variable) over `√N`.
    pub stderr: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub samples: usize,
    pub seed: u64,
    /// `Tr[ρ O]`.
    #[serde(with = "complex_fields")]
    pub exact: C64,
    /// `|Im estimate|` when `O` is Hermitian.
    pub imaginary_residual: Option<f64>,
    /// `(1/N) Σ_k |f(x_k)|²`.
    pub second_moment: f64,
    /// Accepted over proposed draws; `None` for discrete outcomes.
    pub acceptance_rate: Option<f64>,
    pub wall_s: Option<f64>,
}

impl EstimationReport {
    /// Deviation from the exact value in units of the standard error.
    pub fn z_score(&self) -> f64 {
        let dev = (self.estimate - self.exact).norm();
        if self.stderr > 0.0 {
            dev / self.stderr
        } else if dev < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn record(&self, detector: &str, d: usize, observable: &str) -> EstimateRecord {
        EstimateRecord {
            detector: detector.to_string(),
            d,
            observable: observable.to_string(),
            n: self.samples,
            estimate_re: self.estimate.re,
            estimate_im: self.estimate.im,
            stderr: self.stderr,
            exact_re: self.exact.re,
            exact_im: self.exact.im,
            seed: self.seed,
            wall_s: self.wall_s,
        }
    }
}

/// Flat row for CSV output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub detector: String,
    pub d: usize,
    pub observable: String,
    pub n: usize,
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub stderr: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    pub seed: u64,
    pub wall_s: Option<f64>,
}

mod complex_fields {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::operator::C64;

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Parts {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        Parts { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let p = Parts::deserialize(d)?;
        Ok(C64::new(p.re, p.im))
    }
}

/// Run options.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EstimateOptions {
    pub chunk: usize,
    /// Record wall-clock time in the report. Off by default so that
    /// reports for a fixed seed are identical.
    pub timing: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            chunk: DEFAULT_CHUNK,
            timing: false,
        }
    }
}

pub fn estimate(det: &UniversalDetector, rho: &State, o: &Operator, n: usize, seed: u64) -> Result<EstimationReport> {
    estimate_with(det, rho, o, n, seed, EstimateOptions::default())
}

pub fn estimate_with(
    det: &UniversalDetector,
    rho: &State,
    o: &Operator,
    n: usize,
    seed: u64,
    opts: EstimateOptions,
) -> Result<EstimationReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n}")));
    }
    let start = Instant::now();
    let dist = outcome_distribution(det, rho)?;
    let weights = det.weights(o)?;
    let chunk = opts.chunk.max(1);
    let parts: Vec<Moments> = chunk_bounds(n, chunk)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = seeded_rng(seed, c);
            let mut m = Moments::default();
            match (&dist, &weights) {
                (OutcomeDistribution::Discrete(p), Weights::Discrete(f)) => {
                    for _ in 0..len {
                        m.push(f[p.sample(&mut rng)]);
                    }
                }
                (OutcomeDistribution::Continuous(b), Weights::Continuous(w)) => {
                    let sampler = b.povm().sampler();
                    for _ in 0..len {
                        let (u, tries) = b.sample(&sampler, &mut rng);
                        m.proposals += tries;
                        m.push(w.outcome_weight(&u));
                    }
                }
                _ => unreachable!("detector weights match its measurement"),
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let nf = total.n as f64;
    let var_re = (total.m2_re / (nf - 1.0)).max(0.0);
    let var_im = (total.m2_im / (nf - 1.0)).max(0.0);
    let hermitian = o.is_hermitian(1e-12 * o.max_abs().max(1.0));
    Ok(EstimationReport {
        estimate: total.mean,
        stderr: ((var_re + var_im) / nf).sqrt(),
        stderr_re: (var_re / nf).sqrt(),
        stderr_im: (var_im / nf).sqrt(),
        samples: n,
        seed,
        exact: rho.op().trace_product(o)?,
        imaginary_residual: hermitian.then(|| total.mean.im.abs()),
        second_moment: total.sum_sq / nf,
        acceptance_rate: matches!(dist, OutcomeDistribution::Continuous(_)).then(|| nf / total.proposals as f64),
        wall_s: opts.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// One report per entry of a strictly increasing schedule, all from the
/// same seed, so smaller runs are prefixes of larger ones.
pub fn convergence_scan(
    det: &UniversalDetector,
    rho: &State,
    o: &Operator,
    schedule: &[usize],
    seed: u64,
) -> Result<Vec<EstimationReport>> {
    convergence_scan_with(det, rho, o, schedule, seed, EstimateOptions::default())
}

pub fn convergence_scan_with(
    det: &UniversalDetector,
    rho: &State,
    o: &Operator,
    schedule: &[usize],
    seed: u64,
    opts: EstimateOptions,
) -> Result<Vec<EstimationReport>> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty schedule".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "schedule must be strictly increasing: {schedule:?}"
        )));
    }
    schedule
        .iter()
        .map(|&n| estimate_with(det, rho, o, n, seed, opts))
        .collect()
}

/// Least-squares slope of `log stderr` against `log n`, over entries with
/// positive error. About `−1/2` for Monte Carlo.
pub fn loglog_slope(reports: &[EstimationReport]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.stderr > 0.0)
        .map(|r| ((r.samples as f64).ln(), r.stderr.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::locc::locc_detector;
    use crate::detectors::sud::sud_detector;
    use crate::detectors::weyl::{weyl_detector, weyl_detector_with_ancilla, weyl_unitary};
    use crate::operator::random_density;

    fn pauli_x() -> Operator {
        Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn pure_inputs_give_normalized_distribution() {
        let det = weyl_detector_with_ancilla(2, State::pure(&Operator::basis_ket(2, 1)).unwrap());
        // A pure basis ancilla is not universal for the Weyl detector.
        assert!(det.is_err());
        let det = weyl_detector(2).unwrap();
        let rho = State::pure(&Operator::basis_ket(2, 0)).unwrap();
        let raw = det.measurement().probabilities(&rho, det.ancilla()).unwrap();
        assert!((raw.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_inputs_are_uniform() {
        let p = crate::detectors::weyl::weyl_bell_povm(2).unwrap();
        let mixed = State::maximally_mixed(2);
        let dist = DiscreteDistribution::new(p.probabilities(&mixed, &mixed).unwrap()).unwrap();
        for q in dist.probabilities() {
            assert!((q - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn continuous_density_at_identity() {
        let det = sud_detector(2).unwrap();
        let rho = random_density(2, 2, 100).unwrap();
        let OutcomeDistribution::Continuous(b) = outcome_distribution(&det, &rho).unwrap() else {
            panic!("expected continuous distribution");
        };
        let id = Operator::identity(2);
        let expect = 2.0 * rho.op().trace_product(&det.ancilla().op().transpose()).unwrap().re;
        assert!((b.density(&id) - expect).abs() < 1e-12);
    }

    #[test]
    fn inverse_cdf_frequencies() {
        let dist = OutcomeDistribution::Discrete(DiscreteDistribution::new(vec![0.25; 4]).unwrap());
        let s = sample_outcomes(&dist, 100_000, 7);
        let mut counts = [0usize; 4];
        for o in &s.outcomes {
            let Outcome::Index(i) = o else { panic!() };
            counts[*i] += 1;
        }
        for c in counts {
            assert!((c as f64 / 1e5 - 0.25).abs() < 0.01);
        }
        assert_eq!(s.acceptance_rate(), 1.0);
    }

    #[test]
    fn point_mass_is_constant() {
        let dist = OutcomeDistribution::Discrete(DiscreteDistribution::new(vec![0.0, 0.0, 1.0, 0.0]).unwrap());
        let s = sample_outcomes(&dist, 5000, 8);
        assert!(s.outcomes.iter().all(|o| *o == Outcome::Index(2)));
    }

    #[test]
    fn distribution_rejects_bad_input() {
        assert!(DiscreteDistribution::new(vec![]).is_err());
        assert!(DiscreteDistribution::new(vec![0.5, 0.6, -0.1]).is_err());
        assert!(DiscreteDistribution::new(vec![0.5, 0.4]).is_err());
        let ok = DiscreteDistribution::new(vec![0.5, 0.5, -1e-14]).unwrap();
        assert_eq!(ok.probabilities()[2], 0.0);
    }

    #[test]
    fn continuous_acceptance_near_inverse_dimension() {
        let det = sud_detector(2).unwrap();
        let rho = random_density(2, 2, 101).unwrap();
        let dist = outcome_distribution(&det, &rho).unwrap();
        let s = sample_outcomes(&dist, 20_000, 9);
        let rate = s.acceptance_rate();
        assert!(rate > 0.0 && rate <= 1.0);
        // Proposals per acceptance are geometric with mean d.
        let se = (rate * (1.0 - rate) / s.proposals as f64).sqrt();
        assert!((rate - 0.5).abs() < 4.0 * se + 1e-3, "{rate}");
    }

    #[test]
    fn sampling_is_independent_of_thread_count() {
        let det = weyl_detector(3).unwrap();
        let rho = random_density(3, 2, 102).unwrap();
        let o = weyl_unitary(3, 1, 2).unwrap();
        let a = estimate(&det, &rho, &o, 20_000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate(&det, &rho, &o, 20_000, 5).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.estimate.re.to_bits(), b.estimate.re.to_bits());
    }

    #[test]
    fn z_expectation_of_ground_state() {
        let det = weyl_detector(2).unwrap();
        let rho = State::pure(&Operator::basis_ket(2, 0)).unwrap();
        let z = weyl_unitary(2, 1, 0).unwrap();
        let r = estimate(&det, &rho, &z, 100_000, 11).unwrap();
        assert!((r.exact - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(r.z_score() < 4.0, "{r:?}");
        assert!(r.imaginary_residual.is_some());
        assert!(r.wall_s.is_none());
    }

    #[test]
    fn identity_observable_has_no_spread() {
        for d in [2, 3] {
            let det = weyl_detector(d).unwrap();
            let rho = random_density(d, 1, 103).unwrap();
            let r = estimate(&det, &rho, &Operator::identity(d), 10_000, 12).unwrap();
            assert!((r.estimate - C64::new(1.0, 0.0)).norm() < 1e-12, "{r:?}");
            assert!(r.stderr < 1e-12);
        }
        // The LOCC weights for I live on one ancilla slot only, so they spread.
        let det = locc_detector(2).unwrap();
        let rho = random_density(2, 1, 103).unwrap();
        let r = estimate(&det, &rho, &Operator::identity(2), 10_000, 12).unwrap();
        assert!(r.stderr > 0.0 && r.z_score() < 4.0);
    }

    #[test]
    fn locc_pauli_x() {
        let det = locc_detector(2).unwrap();
        let rho = random_density(2, 2, 104).unwrap();
        let r = estimate(&det, &rho, &pauli_x(), 100_000, 13).unwrap();
        assert!(r.z_score() < 4.0, "{r:?}");
    }

    #[test]
    fn continuous_estimate_is_unbiased() {
        let det = sud_detector(2).unwrap();
        let rho = random_density(2, 2, 105).unwrap();
        let r = estimate(&det, &rho, &pauli_x(), 40_000, 14).unwrap();
        assert!(r.z_score() < 4.0, "{r:?}");
        let rate = r.acceptance_rate.unwrap();
        assert!(rate > 0.45 && rate < 0.55);
    }

    #[test]
    fn scan_scaling_and_determinism() {
        let det = weyl_detector(2).unwrap();
        let rho = random_density(2, 2, 106).unwrap();
        let o = pauli_x();
        let reports = convergence_scan(&det, &rho, &o, &[100, 10_000, 1_000_000], 15).unwrap();
        for w in reports.windows(2) {
            let ratio = w[0].stderr / w[1].stderr;
            assert!(ratio > 5.0 && ratio < 20.0, "ratio {ratio}");
        }
        let slope = loglog_slope(&reports).unwrap();
        assert!((slope + 0.5).abs() < 0.1, "{slope}");
        let again = convergence_scan(&det, &rho, &o, &[100, 10_000, 1_000_000], 15).unwrap();
        assert_eq!(reports, again);
        assert!(convergence_scan(&det, &rho, &o, &[10, 10], 1).is_err());
        let flat = convergence_scan(&det, &rho, &Operator::identity(2), &[100, 1000], 1).unwrap();
        assert!(flat.iter().all(|r| r.stderr < 1e-12));
    }

    #[test]
    fn report_serializes() {
        let det = weyl_detector(2).unwrap();
        let rho = random_density(2, 2, 107).unwrap();
        let r = estimate(&det, &rho, &pauli_x(), 1000, 16).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"estimate\":{\"re\""));
        let back: EstimationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let rec = r.record("weyl:d=2", 2, "pauli:X");
        assert_eq!(rec.n, 1000);
        assert_eq!(rec.wall_s, None);
    }

    #[test]
    fn too_few_samples() {
        let det = weyl_detector(2).unwrap();
        let rho = random_density(2, 2, 108).unwrap();
        assert!(estimate(&det, &rho, &pauli_x(), 1, 0).is_err());
    }
}
