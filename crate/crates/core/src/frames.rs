//! Finite operator spanning sets and their canonical duals.
//!
//! A family `{Ξ_i}` spans the operators `K → H` when its frame map
//! `S = Σ_i |Ξ_i⟩⟩⟨⟨Ξ_i|` has full rank. The canonical dual
//! `Θ_i = S⁻¹ Ξ_i` then gives `A = Σ_i Tr[Θ_i† A] Ξ_i` for every `A`, with
//! the minimal-norm coefficient vector among all expansions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::operator::{devectorize, vectorize, BipartiteVector, Operator, C64};

/// Relative singular-value threshold, multiplied by `σ_max · dim`.
pub const RANK_RTOL: f64 = 1e-12;

/// Indexed operators with identical dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRecord", into = "FamilyRecord")]
pub struct OperatorFamily {
    members: Vec<Operator>,
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct LabeledOperator {
    label: String,
    operator: Operator,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct FamilyRecord(Vec<LabeledOperator>);

impl From<OperatorFamily> for FamilyRecord {
    fn from(f: OperatorFamily) -> Self {
        FamilyRecord(
            f.labels
                .into_iter()
                .zip(f.members)
                .map(|(label, operator)| LabeledOperator { label, operator })
                .collect(),
        )
    }
}

impl TryFrom<FamilyRecord> for OperatorFamily {
    type Error = String;

    fn try_from(rec: FamilyRecord) -> std::result::Result<Self, String> {
        let (labels, members) = rec.0.into_iter().map(|l| (l.label, l.operator)).unzip();
        OperatorFamily::labeled(members, labels).map_err(|e| e.to_string())
    }
}

impl OperatorFamily {
    /// Members labelled by their position.
    pub fn new(members: Vec<Operator>) -> Result<Self> {
        let labels = (0..members.len()).map(|i| i.to_string()).collect();
        Self::labeled(members, labels)
    }

    pub fn labeled(members: Vec<Operator>, labels: Vec<String>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidParameter("operator family must be nonempty".into()))?;
        let dims = first.dims();
        if let Some(bad) = members.iter().find(|m| m.dims() != dims) {
            return Err(mismatch(format!("{dims:?}"), format!("{:?}", bad.dims())));
        }
        if labels.len() != members.len() {
            return Err(mismatch(format!("{} labels", members.len()), labels.len()));
        }
        Ok(Self { members, labels })
    }

    pub fn members(&self) -> &[Operator] {
        &self.members
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.members[0].dims()
    }

    /// Vectorized members as the columns of a `(dim H · dim K) × N` matrix.
    fn stacked(&self) -> DMatrix<C64> {
        let (h, k) = self.dims();
        let mut out = DMatrix::zeros(h * k, self.len());
        for (j, m) in self.members.iter().enumerate() {
            out.set_column(j, vectorize(m).amplitudes());
        }
        out
    }

    /// `Σ_i c_i Ξ_i`.
    pub fn combine(&self, coefficients: &[C64]) -> Result<Operator> {
        if coefficients.len() != self.len() {
            return Err(mismatch(format!("{} coefficients", self.len()), coefficients.len()));
        }
        let (h, k) = self.dims();
        let mut acc = Operator::zeros(h, k);
        for (c, m) in coefficients.iter().zip(&self.members) {
            acc.axpy(*c, m)?;
        }
        Ok(acc)
    }
}

/// Dual operators aligned one-to-one with an [`OperatorFamily`].
#[derive(Clone, Debug, PartialEq)]
pub struct DualFamily {
    members: Vec<Operator>,
}

impl DualFamily {
    pub fn new(members: Vec<Operator>) -> Self {
        Self { members }
    }

    pub fn members(&self) -> &[Operator] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Views the duals as a family of their own.
    pub fn as_family(&self) -> Result<OperatorFamily> {
        OperatorFamily::new(self.members.clone())
    }
}

/// `S = Σ_i |Ξ_i⟩⟩⟨⟨Ξ_i|` acting on vectorized operators.
#[derive(Clone, Debug)]
pub struct FrameMap {
    matrix: DMatrix<C64>,
    dims: (usize, usize),
}

impl FrameMap {
    pub fn of(family: &OperatorFamily) -> Self {
        let x = family.stacked();
        Self {
            matrix: &x * x.adjoint(),
            dims: family.dims(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn as_operator(&self) -> Operator {
        Operator::from_matrix(self.matrix.clone())
    }

    /// Applies `S` to an operator through its vectorization.
    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if a.dims() != self.dims {
            return Err(mismatch(format!("{:?}", self.dims), format!("{:?}", a.dims())));
        }
        let v = &self.matrix * vectorize(a).amplitudes();
        Ok(devectorize(&BipartiteVector::new(v, self.dims)?))
    }
}

/// Outcome of a spanning test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpanReport {
    pub spans: bool,
    pub rank: usize,
    /// `dim H · dim K`.
    pub dim: usize,
    /// Smallest singular value of the stacked family (zero if fewer
    /// members than `dim`).
    pub least_singular_value: f64,
    pub largest_singular_value: f64,
}

impl SpanReport {
    pub fn deficiency(&self) -> usize {
        self.dim - self.rank
    }

    fn into_error(self) -> Error {
        Error::NotSpanning {
            rank: self.rank,
            dim: self.dim,
            deficiency: self.deficiency(),
            least_singular_value: self.least_singular_value,
        }
    }
}

pub fn is_spanning(family: &OperatorFamily) -> SpanReport {
    let (h, k) = family.dims();
    let dim = h * k;
    let sv = family.stacked().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let threshold = max * dim as f64 * RANK_RTOL;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let least = if sv.len() < dim {
        0.0
    } else {
        sv.iter().copied().fold(f64::INFINITY, f64::min)
    };
    SpanReport {
        spans: rank == dim,
        rank,
        dim,
        least_singular_value: least,
        largest_singular_value: max,
    }
}

/// Canonical dual `Θ_i = S⁻¹ Ξ_i`.
pub fn canonical_dual(family: &OperatorFamily) -> Result<DualFamily> {
    let report = is_spanning(family);
    if !report.spans {
        return Err(report.into_error());
    }
    let dims = family.dims();
    let frame = FrameMap::of(family);
    let inverse = frame
        .matrix
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::NotSpanning {
            rank: report.rank,
            dim: report.dim,
            deficiency: 0,
            least_singular_value: report.least_singular_value,
        })?;
    let duals = family.stacked();
    let duals = &inverse * duals;
    let members = (0..family.len())
        .map(|j| {
            let col = duals.column(j).into_owned();
            BipartiteVector::new(col, dims).map(|v| devectorize(&v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DualFamily::new(members))
}

/// Coefficients `Tr[Θ_i† A]`.
pub fn expand(a: &Operator, family: &OperatorFamily, dual: &DualFamily) -> Result<Vec<C64>> {
    if dual.len() != family.len() {
        return Err(mismatch(format!("{} duals", family.len()), dual.len()));
    }
    if a.dims() != family.dims() {
        return Err(mismatch(format!("{:?}", family.dims()), format!("{:?}", a.dims())));
    }
    dual.members.iter().map(|t| t.hs_inner(a)).collect()
}
