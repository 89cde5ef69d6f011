//! POVMs on `H ⊗ K`, the operator family they induce on `H` for a given
//! ancilla, and universal detectors built on top of them.
//!
//! Writing each element as `Π_i = Σ_j |Ψ_j⟩⟩⟨⟨Ψ_j|`, the ancilla `ν`
//! induces `Ξ_i[ν] = Σ_j Ψ_j νᵀ Ψ_j†` with `Tr[ρ Ξ_i] = Tr[(ρ ⊗ ν) Π_i]`.
//! The pair `(Π, ν)` is universal iff `{Ξ_i[ν]}` spans the operators on
//! `H`; the processing weights are then `f_i = Tr[Θ_i† O]` for a dual
//! family `{Θ_i}`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::detectors::locc::LoccPovm;
use crate::detectors::sud::{sud_xi, ContinuousBellPovm, SudWeight};
use crate::detectors::weyl;
use crate::error::{mismatch, Error, Result};
use crate::frames::{canonical_dual, expand, is_spanning, DualFamily, OperatorFamily, SpanReport};
use crate::operator::{
    devectorize, hermitian_eig_with_tol, tensor_product, vectorize, BipartiteVector, Operator, State, C64,
    DEFAULT_TOLERANCE, ONE,
};

/// Eigenvalues at or below this are dropped when diagonalizing elements.
pub const EIGEN_CUTOFF: f64 = 1e-12;

/// Finite POVM with dense elements on `H ⊗ K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    dims: (usize, usize),
    elements: Vec<Operator>,
    labels: Vec<String>,
}

impl Povm {
    /// Elements must be square of side `dim H · dim K`. Positivity and
    /// completeness are checked by [`validate_povm`], not here.
    pub fn new(dims: (usize, usize), elements: Vec<Operator>) -> Result<Self> {
        let labels = (0..elements.len()).map(|i| i.to_string()).collect();
        Self::labeled(dims, elements, labels)
    }

    pub fn labeled(dims: (usize, usize), elements: Vec<Operator>, labels: Vec<String>) -> Result<Self> {
        let side = dims.0 * dims.1;
        if side == 0 || elements.is_empty() {
            return Err(Error::InvalidParameter(
                "POVM needs positive dims and at least one element".into(),
            ));
        }
        if let Some(bad) = elements.iter().find(|e| e.dims() != (side, side)) {
            return Err(mismatch(format!("({side}, {side})"), format!("{:?}", bad.dims())));
        }
        if labels.len() != elements.len() {
            return Err(mismatch(format!("{} labels", elements.len()), labels.len()));
        }
        Ok(Self { dims, elements, labels })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Tr[(ρ ⊗ ν) Π_i]` for every element, unnormalized and unclamped.
    pub fn probabilities(&self, rho: &State, nu: &State) -> Result<Vec<f64>> {
        check_states(self.dims, rho, nu)?;
        let joint = tensor_product(rho.op(), nu.op());
        self.elements
            .iter()
            .map(|e| joint.trace_product(e).map(|z| z.re))
            .collect()
    }

    pub fn element_sum(&self) -> Operator {
        let side = self.dims.0 * self.dims.1;
        let mut acc = Operator::zeros(side, side);
        for e in &self.elements {
            acc.axpy(ONE, e).expect("uniform element dims");
        }
        acc
    }
}

/// Weighted Bell POVM `Π_i = w_i |U_i⟩⟩⟨⟨U_i|` on `H ⊗ H`, stored in
/// factored form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellPovm {
    dim: usize,
    weights: Vec<f64>,
    unitaries: Vec<Operator>,
    labels: Vec<String>,
}

impl BellPovm {
    pub fn new(dim: usize, weights: Vec<f64>, unitaries: Vec<Operator>, labels: Vec<String>) -> Result<Self> {
        if weights.is_empty() || weights.len() != unitaries.len() || labels.len() != weights.len() {
            return Err(mismatch(
                format!("{} weights, unitaries and labels", weights.len()),
                format!("{} unitaries, {} labels", unitaries.len(), labels.len()),
            ));
        }
        if let Some(bad) = unitaries.iter().find(|u| u.dims() != (dim, dim)) {
            return Err(mismatch(format!("({dim}, {dim})"), format!("{:?}", bad.dims())));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!("negative or non-finite weight {w}")));
        }
        Ok(Self {
            dim,
            weights,
            unitaries,
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn unitaries(&self) -> &[Operator] {
        &self.unitaries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn element(&self, i: usize) -> Operator {
        let v = vectorize(&self.unitaries[i]);
        v.outer(&v).scale_real(self.weights[i])
    }

    pub fn element_sum(&self) -> Operator {
        let side = self.dim * self.dim;
        let mut acc = nalgebra::DMatrix::<C64>::zeros(side, side);
        for (w, u) in self.weights.iter().zip(&self.unitaries) {
            let v = vectorize(u);
            let a = v.amplitudes();
            acc.ger(C64::new(*w, 0.0), a, &a.conjugate(), ONE);
        }
        Operator::from_matrix(acc)
    }

    /// Dense form; memory grows as `N · d⁴`.
    pub fn to_povm(&self) -> Povm {
        Povm {
            dims: (self.dim, self.dim),
            elements: (0..self.len()).map(|i| self.element(i)).collect(),
            labels: self.labels.clone(),
        }
    }

    /// `w_i Tr[U_i† ρ U_i νᵀ]`.
    pub fn probabilities(&self, rho: &State, nu: &State) -> Result<Vec<f64>> {
        check_states((self.dim, self.dim), rho, nu)?;
        let nu_t = nu.op().transpose();
        Ok(self
            .weights
            .iter()
            .zip(&self.unitaries)
            .map(|(w, u)| w * bell_overlap(rho.op(), u, &nu_t).re)
            .collect())
    }

    /// `Ξ_i = w_i U_i νᵀ U_i†`.
    pub fn induced_family(&self, nu: &State) -> Result<OperatorFamily> {
        if nu.dim() != self.dim {
            return Err(mismatch(format!("ancilla of dim {}", self.dim), nu.dim()));
        }
        let nu_t = nu.op().transpose().into_matrix();
        let members = self
            .weights
            .iter()
            .zip(&self.unitaries)
            .map(|(w, u)| {
                let u = u.matrix();
                Operator::from_matrix(u * &nu_t * u.adjoint() * C64::new(*w, 0.0))
            })
            .collect();
        OperatorFamily::labeled(members, self.labels.clone())
    }
}

/// `Tr[U† ρ U νᵀ] = ⟨⟨U|ρ ⊗ ν|U⟩⟩`.
pub(crate) fn bell_overlap(rho: &Operator, u: &Operator, nu_t: &Operator) -> C64 {
    let u = u.matrix();
    let conj = u.adjoint() * rho.matrix() * u;
    conj.transpose().dot(nu_t.matrix())
}

fn check_states(dims: (usize, usize), rho: &State, nu: &State) -> Result<()> {
    if rho.dim() != dims.0 {
        return Err(mismatch(format!("system state of dim {}", dims.0), rho.dim()));
    }
    if nu.dim() != dims.1 {
        return Err(mismatch(format!("ancilla state of dim {}", dims.1), nu.dim()));
    }
    Ok(())
}

/// Outcome of [`validate_povm`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Smallest eigenvalue over all elements (negative when positivity fails).
    pub min_eigenvalue: f64,
    /// Largest `‖Π_i − Π_i†‖_max`.
    pub hermitian_defect: f64,
    /// `‖Σ Π_i − I‖` in Frobenius norm; decides `passed`.
    pub completeness_defect: f64,
    /// `‖Σ Π_i − I‖` in trace norm.
    pub completeness_trace_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn validate_povm(p: &Povm) -> ValidationReport {
    validate_povm_with_tol(p, DEFAULT_TOLERANCE)
}

pub fn validate_povm_with_tol(p: &Povm, tol: f64) -> ValidationReport {
    let mut min_eigenvalue = f64::INFINITY;
    let mut hermitian_defect = 0.0f64;
    for e in &p.elements {
        hermitian_defect = hermitian_defect.max(e.hermitian_defect());
        // Symmetrized spectrum; asymmetry is reported separately.
        let sym = e.add(&e.adjoint()).expect("square").scale_real(0.5);
        let lam = hermitian_eig_with_tol(&sym, f64::INFINITY)
            .map(|eig| eig.values.last().copied().unwrap_or(0.0))
            .unwrap_or(f64::NEG_INFINITY);
        min_eigenvalue = min_eigenvalue.min(lam);
    }
    completeness_report(&p.element_sum(), min_eigenvalue, hermitian_defect, tol)
}

/// Rank-one Bell elements with nonnegative weights are PSD by construction,
/// so only completeness needs checking.
pub fn validate_bell_povm(p: &BellPovm, tol: f64) -> ValidationReport {
    let min_weight = p.weights.iter().copied().fold(f64::INFINITY, f64::min);
    completeness_report(&p.element_sum(), min_weight.min(0.0), 0.0, tol)
}

fn completeness_report(sum: &Operator, min_eigenvalue: f64, hermitian_defect: f64, tol: f64) -> ValidationReport {
    let defect = sum.sub(&Operator::identity(sum.rows())).expect("square");
    let completeness_defect = defect.frobenius_norm();
    let sym = defect.add(&defect.adjoint()).expect("square").scale_real(0.5);
    let completeness_trace_defect = hermitian_eig_with_tol(&sym, f64::INFINITY)
        .map(|e| e.values.iter().map(|l| l.abs()).sum())
        .unwrap_or(f64::INFINITY);
    ValidationReport {
        min_eigenvalue,
        hermitian_defect,
        completeness_defect,
        completeness_trace_defect,
        tolerance: tol,
        passed: min_eigenvalue >= -tol && hermitian_defect <= tol && completeness_defect <= tol,
    }
}

/// Rank decomposition `Π = Σ_j |Ψ_j⟩⟩⟨⟨Ψ_j|` of one POVM element.
#[derive(Clone, Debug)]
pub struct DiagonalizedElement {
    /// `Ψ_j`, each with `Tr[Ψ_j† Ψ_j]` equal to its eigenvalue.
    pub vectors: Vec<Operator>,
    pub eigenvalues: Vec<f64>,
}

impl DiagonalizedElement {
    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn reassemble(&self) -> Operator {
        let (h, k) = self.vectors.first().map_or((0, 0), Operator::dims);
        let mut acc = Operator::zeros(h * k, h * k);
        for psi in &self.vectors {
            let v = vectorize(psi);
            acc.axpy(ONE, &v.outer(&v)).expect("uniform dims");
        }
        acc
    }
}

/// Diagonalizes a PSD element on `H ⊗ K`, `dims = (dim H, dim K)`.
pub fn diagonalize_element(pi: &Operator, dims: (usize, usize)) -> Result<DiagonalizedElement> {
    let side = dims.0 * dims.1;
    if pi.dims() != (side, side) {
        return Err(mismatch(format!("({side}, {side})"), format!("{:?}", pi.dims())));
    }
    let eig = hermitian_eig_with_tol(pi, DEFAULT_TOLERANCE)?;
    if let Some(&min) = eig.values.last() {
        if min < -DEFAULT_TOLERANCE {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
    }
    let mut vectors = Vec::new();
    let mut eigenvalues = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate() {
        if lam <= EIGEN_CUTOFF {
            continue;
        }
        let amps = eig.vector(idx) * C64::new(lam.sqrt(), 0.0);
        vectors.push(devectorize(&BipartiteVector::new(amps, dims)?));
        eigenvalues.push(lam);
    }
    Ok(DiagonalizedElement { vectors, eigenvalues })
}

/// `Ξ_i[ν] = Σ_j Ψ_j^(i) νᵀ Ψ_j^(i)†`, one member per outcome.
pub fn induced_family(p: &Povm, nu: &State) -> Result<OperatorFamily> {
    if nu.dim() != p.dims.1 {
        return Err(mismatch(format!("ancilla of dim {}", p.dims.1), nu.dim()));
    }
    let nu_t = nu.op().transpose();
    let members = p
        .elements
        .iter()
        .map(|e| {
            let diag = diagonalize_element(e, p.dims)?;
            let mut xi = Operator::zeros(p.dims.0, p.dims.0);
            for psi in &diag.vectors {
                let term = psi.matmul(&nu_t)?.matmul(&psi.adjoint())?;
                xi.axpy(ONE, &term)?;
            }
            Ok(xi)
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorFamily::labeled(members, p.labels.clone())
}

/// Whether `{Ξ_i[ν]}` spans the operators on `H`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Universality {
    pub universal: bool,
    pub rank: usize,
    pub dim: usize,
    pub deficiency: usize,
    pub least_singular_value: f64,
}

impl From<SpanReport> for Universality {
    fn from(r: SpanReport) -> Self {
        Self {
            universal: r.spans,
            rank: r.rank,
            dim: r.dim,
            deficiency: r.deficiency(),
            least_singular_value: r.least_singular_value,
        }
    }
}

pub fn is_universal(p: &Povm, nu: &State) -> Result<Universality> {
    Ok(is_spanning(&induced_family(p, nu)?).into())
}

/// The measured POVM of a detector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Measurement {
    Finite(Povm),
    Bell(BellPovm),
    Continuous(ContinuousBellPovm),
}

impl Measurement {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Measurement::Finite(p) => p.dims(),
            Measurement::Bell(b) => (b.dim(), b.dim()),
            Measurement::Continuous(c) => (c.dim(), c.dim()),
        }
    }

    /// Number of outcomes, `None` for a continuum.
    pub fn outcome_count(&self) -> Option<usize> {
        match self {
            Measurement::Finite(p) => Some(p.len()),
            Measurement::Bell(b) => Some(b.len()),
            Measurement::Continuous(_) => None,
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match self {
            Measurement::Finite(p) => Some(p.labels()),
            Measurement::Bell(b) => Some(b.labels()),
            Measurement::Continuous(_) => None,
        }
    }

    pub fn probabilities(&self, rho: &State, nu: &State) -> Result<Vec<f64>> {
        match self {
            Measurement::Finite(p) => p.probabilities(rho, nu),
            Measurement::Bell(b) => b.probabilities(rho, nu),
            Measurement::Continuous(_) => Err(Error::Unsupported(
                "continuous outcomes have a density, not a probability vector".into(),
            )),
        }
    }

    pub fn induced_family(&self, nu: &State) -> Result<OperatorFamily> {
        match self {
            Measurement::Finite(p) => induced_family(p, nu),
            Measurement::Bell(b) => b.induced_family(nu),
            Measurement::Continuous(_) => Err(Error::Unsupported(
                "induced family of a continuous POVM is not a finite family".into(),
            )),
        }
    }

    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        match self {
            Measurement::Finite(p) => Ok(validate_povm_with_tol(p, tol)),
            Measurement::Bell(b) => Ok(validate_bell_povm(b, tol)),
            Measurement::Continuous(_) => Err(Error::Unsupported(
                "continuous POVMs are validated by quadrature, see detectors::su2".into(),
            )),
        }
    }
}

/// How outcome weights `f_i(ν, O)` are computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Processing {
    /// Canonical dual of the induced family.
    GenericDual,
    /// Closed-form weights of the Weyl–Heisenberg Bell detector.
    WeylClosedForm { d: usize },
    /// SU(d) Bell detector with pure ancilla `νᵀ = |φ⟩⟨φ|` and reference `|ψ⟩`.
    SudXi { phi: Vec<C64>, psi: Vec<C64> },
    /// Separable detector; outcome `i` is `(l, k) = (i / dim H, i % dim H)`
    /// with eigenvalue `c_k(l)` of `C(l)`.
    Locc { base: Vec<Operator>, eigenvalues: Vec<C64> },
}

impl Processing {
    pub fn kind(&self) -> &'static str {
        match self {
            Processing::GenericDual => "generic-dual",
            Processing::WeylClosedForm { .. } => "weyl-closed-form",
            Processing::SudXi { .. } => "sud-xi",
            Processing::Locc { .. } => "locc",
        }
    }
}

#[derive(Clone, Debug)]
enum Prepared {
    Duals(DualFamily),
    Weyl(usize),
    Sud {
        phi: DVector<C64>,
        psi: DVector<C64>,
    },
    Locc {
        duals: DualFamily,
        eigenvalues: Vec<C64>,
        dim_h: usize,
    },
}

/// Weights for every outcome of a detector and a fixed operator `O`.
#[derive(Clone, Debug)]
pub enum Weights {
    Discrete(Vec<C64>),
    /// Weight is evaluated per sampled group element.
    Continuous(SudWeight),
}

/// A POVM, an ancilla state and a processing rule satisfying
/// `Tr[ρ O] = Σ_i f_i(ν, O) Tr[(ρ ⊗ ν) Π_i]` for all `ρ`, `O`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DetectorRecord", into = "DetectorRecord")]
pub struct UniversalDetector {
    measurement: Measurement,
    ancilla: State,
    processing: Processing,
    prepared: Prepared,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectorRecord {
    povm: Measurement,
    ancilla: State,
    processing: Processing,
}

impl From<UniversalDetector> for DetectorRecord {
    fn from(d: UniversalDetector) -> Self {
        Self {
            povm: d.measurement,
            ancilla: d.ancilla,
            processing: d.processing,
        }
    }
}

impl TryFrom<DetectorRecord> for UniversalDetector {
    type Error = String;

    fn try_from(r: DetectorRecord) -> std::result::Result<Self, String> {
        UniversalDetector::new(r.povm, r.ancilla, r.processing).map_err(|e| e.to_string())
    }
}

impl UniversalDetector {
    /// Checks that the processing rule applies to this measurement and
    /// ancilla, and precomputes whatever duals it needs.
    pub fn new(measurement: Measurement, ancilla: State, processing: Processing) -> Result<Self> {
        let (h, k) = measurement.dims();
        if ancilla.dim() != k {
            return Err(mismatch(format!("ancilla of dim {k}"), ancilla.dim()));
        }
        let prepared = match (&processing, &measurement) {
            (Processing::GenericDual, Measurement::Continuous(_)) => {
                return Err(Error::Unsupported("generic dual needs a finite POVM".into()))
            }
            (Processing::GenericDual, m) => Prepared::Duals(canonical_dual(&m.induced_family(&ancilla)?)?),
            (Processing::WeylClosedForm { d }, Measurement::Finite(p)) => {
                if p.dims() != (*d, *d) || p.len() != d * d {
                    return Err(mismatch(
                        format!("{d}x{d} Weyl Bell POVM"),
                        format!("{:?}, {} elements", p.dims(), p.len()),
                    ));
                }
                weyl::weyl_denominators(*d, &ancilla)?;
                Prepared::Weyl(*d)
            }
            (Processing::SudXi { phi, psi }, Measurement::Continuous(c)) => {
                let phi = DVector::from_column_slice(phi);
                let psi = DVector::from_column_slice(psi);
                if phi.len() != h || psi.len() != h || c.dim() != h {
                    return Err(mismatch(format!("vectors of dim {}", c.dim()), phi.len()));
                }
                if !c.covers_special_unitary() {
                    return Err(Error::Unsupported(
                        "ξ dual needs the full SU(d) group; use a quadrature grid for higher spin".into(),
                    ));
                }
                let xi = sud_xi(&phi, &psi)?;
                let tr = xi.trace()?;
                let overlap = ancilla.op().transpose().matmul(&xi.adjoint())?.trace()?;
                let d = h as f64;
                if (tr.re - d).abs() > 1e-8 || (overlap - C64::new(d * d, 0.0)).norm() > 1e-8 * d * d {
                    return Err(Error::InvalidParameter(format!(
                        "ξ dual constraints fail for this ancilla: Tr ξ = {tr}, Tr[νᵀξ†] = {overlap}"
                    )));
                }
                Prepared::Sud { phi, psi }
            }
            (Processing::Locc { base, eigenvalues }, Measurement::Finite(p)) => {
                let family = OperatorFamily::new(base.clone())?;
                if family.dims() != (h, h)
                    || p.len() != base.len() * h
                    || eigenvalues.len() != p.len()
                    || k != base.len()
                {
                    return Err(mismatch(
                        format!("{} outcomes over ancilla dim {}", base.len() * h, base.len()),
                        format!("{} outcomes over ancilla dim {k}", p.len()),
                    ));
                }
                crate::detectors::locc::check_ancilla_diagonal(&ancilla)?;
                Prepared::Locc {
                    duals: canonical_dual(&family)?,
                    eigenvalues: eigenvalues.clone(),
                    dim_h: h,
                }
            }
            (proc_, m) => {
                return Err(Error::Unsupported(format!(
                    "processing '{}' does not apply to a {} measurement",
                    proc_.kind(),
                    match m {
                        Measurement::Finite(_) => "finite",
                        Measurement::Bell(_) => "factored Bell",
                        Measurement::Continuous(_) => "continuous",
                    }
                )))
            }
        };
        Ok(Self {
            measurement,
            ancilla,
            processing,
            prepared,
        })
    }

    /// Detector with generic canonical-dual processing.
    pub fn generic(measurement: Measurement, ancilla: State) -> Result<Self> {
        Self::new(measurement, ancilla, Processing::GenericDual)
    }

    /// Separable detector from an [`LoccPovm`].
    pub fn locc(p: &LoccPovm, ancilla: State) -> Result<Self> {
        Self::new(Measurement::Finite(p.povm().clone()), ancilla, p.processing())
    }

    pub fn measurement(&self) -> &Measurement {
        &self.measurement
    }

    pub fn ancilla(&self) -> &State {
        &self.ancilla
    }

    pub fn processing(&self) -> &Processing {
        &self.processing
    }

    /// `(dim H, dim K)`.
    pub fn dims(&self) -> (usize, usize) {
        self.measurement.dims()
    }

    pub fn weights(&self, o: &Operator) -> Result<Weights> {
        let h = self.dims().0;
        if o.dims() != (h, h) {
            return Err(mismatch(format!("({h}, {h})"), format!("{:?}", o.dims())));
        }
        match &self.prepared {
            Prepared::Sud { phi, psi } => Ok(Weights::Continuous(SudWeight::new(phi, psi, o)?)),
            _ => processing_coefficients(self, o).map(Weights::Discrete),
        }
    }
}

/// `f_i(ν, O)` for every outcome of a finite detector.
pub fn processing_coefficients(det: &UniversalDetector, o: &Operator) -> Result<Vec<C64>> {
    let h = det.dims().0;
    if o.dims() != (h, h) {
        return Err(mismatch(format!("({h}, {h})"), format!("{:?}", o.dims())));
    }
    match &det.prepared {
        Prepared::Duals(duals) => duals.members().iter().map(|t| t.hs_inner(o)).collect(),
        Prepared::Weyl(d) => weyl::weyl_processing(*d, &det.ancilla, o),
        Prepared::Locc {
            duals,
            eigenvalues,
            dim_h,
        } => {
            let nu = det.ancilla.op();
            let per_slot: Vec<C64> = duals
                .members()
                .iter()
                .enumerate()
                .map(|(l, theta)| Ok(theta.hs_inner(o)? / nu.get(l, l)))
                .collect::<Result<_>>()?;
            Ok(eigenvalues
                .iter()
                .enumerate()
                .map(|(i, c)| per_slot[i / dim_h] * c)
                .collect())
        }
        Prepared::Sud { .. } => Err(Error::Unsupported(
            "continuous detector: evaluate weights per sampled unitary via UniversalDetector::weights".into(),
        )),
    }
}

/// `Σ_i f_i(ν, O) Tr[(ρ ⊗ ν) Π_i]`, which equals `Tr[ρ O]` for a
/// universal detector.
pub fn exact_expectation(det: &UniversalDetector, rho: &State, o: &Operator) -> Result<C64> {
    let f = processing_coefficients(det, o)?;
    let p = det.measurement.probabilities(rho, &det.ancilla)?;
    Ok(f.iter().zip(&p).map(|(fi, pi)| fi * pi).sum())
}

/// Expands `O` in a finite detector's induced family through the
/// generic dual, independent of the detector's own processing rule.
pub fn generic_coefficients(measurement: &Measurement, nu: &State, o: &Operator) -> Result<Vec<C64>> {
    let family = measurement.induced_family(nu)?;
    let dual = canonical_dual(&family)?;
    expand(o, &family, &dual)
}
