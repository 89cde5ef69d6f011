//! Dense complex operator algebra.
//!
//! Operators map an input space `K` (columns) to an output space `H` (rows).
//! The bipartite vector `|A⟩⟩` of an operator places `A[n][m]` at the joint
//! index `n * dim_k + m`: row-major, system index major, ancilla index minor.
//! With this ordering the Kronecker product satisfies
//! `(A ⊗ B)|C⟩⟩ = |A C Bᵀ⟩⟩`, and the partial traces of `|A⟩⟩⟨⟨B|` are
//! `A B†` (over `K`) and `Aᵀ B*` (over `H`).

use std::cmp::Ordering;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};

pub type C64 = Complex64;

/// Tolerance used by validity checks unless the caller overrides it.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Deterministic generator for a `(seed, stream)` pair.
///
/// Distinct streams of the same seed are independent, which is what the
/// chunked samplers rely on.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A complex matrix from `K` (columns) to `H` (rows).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorRecord", try_from = "OperatorRecord")]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Self {
        Self { mat }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_matrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds an operator from row slices. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(Error::InvalidParameter("operator must be nonempty".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(mismatch(format!("row length {ncols}"), bad.len()));
        }
        Ok(Self::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Diagonal operator with the given entries.
    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &DVector<C64>, v: &DVector<C64>) -> Self {
        Self::from_matrix(u * v.adjoint())
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &DVector<C64>) -> Self {
        Self::outer(v, v)
    }

    /// Computational basis vector `|k⟩` of dimension `dim`.
    pub fn basis_ket(dim: usize, k: usize) -> DVector<C64> {
        let mut v = DVector::zeros(dim);
        v[k] = ONE;
        v
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    /// `(rows, cols)`, i.e. `(dim H, dim K)`.
    pub fn dims(&self) -> (usize, usize) {
        self.mat.shape()
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix(self.mat.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::from_matrix(self.mat.transpose())
    }

    pub fn conj(&self) -> Self {
        Self::from_matrix(self.mat.map(|z| z.conj()))
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(mismatch("square operator", format!("{:?}", self.dims())))
        }
    }

    fn require_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(mismatch(format!("{:?}", self.dims()), format!("{:?}", other.dims())))
        }
    }

    pub fn trace(&self) -> Result<C64> {
        self.require_square()?;
        Ok(self.mat.trace())
    }

    /// Hilbert–Schmidt product `Tr[A† B]`.
    pub fn hs_inner(&self, other: &Self) -> Result<C64> {
        self.require_same_dims(other)?;
        Ok(self.mat.dotc(&other.mat))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(mismatch(
                format!("{} rows", self.cols()),
                format!("{} rows", other.rows()),
            ));
        }
        Ok(Self::from_matrix(&self.mat * &other.mat))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_dims(other)?;
        Ok(Self::from_matrix(&self.mat + &other.mat))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.require_same_dims(other)?;
        Ok(Self::from_matrix(&self.mat - &other.mat))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_matrix(&self.mat * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Adds `c · other` in place.
    pub fn axpy(&mut self, c: C64, other: &Self) -> Result<()> {
        self.require_same_dims(other)?;
        self.mat.zip_apply(&other.mat, |a, b| *a += c * b);
        Ok(())
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.cols() {
            return Err(mismatch(format!("vector of length {}", self.cols()), v.len()));
        }
        Ok(&self.mat * v)
    }

    /// `Tr[ρ O]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        if self.cols() != other.rows() || self.rows() != other.cols() {
            return Err(mismatch(
                format!("{:?}", (self.cols(), self.rows())),
                format!("{:?}", other.dims()),
            ));
        }
        Ok(self.mat.transpose().dot(&other.mat))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.require_same_dims(other)?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest entrywise modulus of `A − A†`; infinite for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Frobenius norm of `A A† − A† A`.
    pub fn commutator_with_adjoint(&self) -> f64 {
        let a = &self.mat;
        (a * a.adjoint() - a.adjoint() * a).norm()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorRecord {
    dims: [usize; 2],
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<Operator> for OperatorRecord {
    fn from(op: Operator) -> Self {
        let (h, k) = op.dims();
        let part = |f: fn(&C64) -> f64| (0..h).map(|i| (0..k).map(|j| f(&op.mat[(i, j)])).collect()).collect();
        Self {
            dims: [h, k],
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

impl TryFrom<OperatorRecord> for Operator {
    type Error = String;

    fn try_from(rec: OperatorRecord) -> std::result::Result<Self, String> {
        let [h, k] = rec.dims;
        if h == 0 || k == 0 {
            return Err("operator dims must be positive".into());
        }
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == h && rows.iter().all(|r| r.len() == k);
        if !shape_ok(&rec.re) || !shape_ok(&rec.im) {
            return Err(format!("re/im arrays must both have shape {h}x{k}"));
        }
        Ok(Operator::from_fn(h, k, |i, j| C64::new(rec.re[i][j], rec.im[i][j])))
    }
}

/// Amplitudes of `|A⟩⟩` in `H ⊗ K`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteVector {
    amps: DVector<C64>,
    dims: (usize, usize),
}

impl BipartiteVector {
    pub fn new(amps: DVector<C64>, dims: (usize, usize)) -> Result<Self> {
        if amps.len() != dims.0 * dims.1 {
            return Err(mismatch(
                format!("length {} for dims {:?}", dims.0 * dims.1, dims),
                amps.len(),
            ));
        }
        Ok(Self { amps, dims })
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// `⟨⟨self|other⟩⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dims != other.dims {
            return Err(mismatch(format!("{:?}", self.dims), format!("{:?}", other.dims)));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|self⟩⟩⟨⟨other|` as an operator on `H ⊗ K`.
    pub fn outer(&self, other: &Self) -> Operator {
        Operator::outer(&self.amps, &other.amps)
    }
}

pub fn vectorize(a: &Operator) -> BipartiteVector {
    let (h, k) = a.dims();
    BipartiteVector {
        amps: DVector::from_fn(h * k, |idx, _| a.mat[(idx / k, idx % k)]),
        dims: (h, k),
    }
}

pub fn devectorize(v: &BipartiteVector) -> Operator {
    let (h, k) = v.dims;
    Operator::from_fn(h, k, |n, m| v.amps[n * k + m])
}

/// Kronecker product, ordered consistently with [`vectorize`].
pub fn tensor_product(a: &Operator, b: &Operator) -> Operator {
    Operator::from_matrix(a.mat.kronecker(&b.mat))
}

/// Which factor of `H ⊗ K` a partial trace removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Ancilla,
}

/// Partial trace of an operator on `H ⊗ K` with `dims = (dim H, dim K)`.
pub fn partial_trace(m: &Operator, dims: (usize, usize), over: Subsystem) -> Result<Operator> {
    let (h, k) = dims;
    if !m.is_square() || m.rows() != h * k {
        return Err(mismatch(
            format!("square operator of side {} = {h}·{k}", h * k),
            format!("{:?}", m.dims()),
        ));
    }
    let mat = &m.mat;
    Ok(match over {
        Subsystem::Ancilla => Operator::from_fn(h, h, |n, np| (0..k).map(|j| mat[(n * k + j, np * k + j)]).sum()),
        Subsystem::System => Operator::from_fn(k, k, |j, jp| (0..h).map(|n| mat[(n * k + j, n * k + jp)]).sum()),
    })
}

/// Spectrum of a Hermitian operator, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: Operator,
}

impl HermitianEigen {
    pub fn vector(&self, idx: usize) -> DVector<C64> {
        self.vectors.mat.column(idx).into_owned()
    }

    /// `V diag(λ) V†`.
    pub fn reassemble(&self) -> Operator {
        let v = &self.vectors.mat;
        let lam = DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| C64::new(x, 0.0)),
        ));
        Operator::from_matrix(v * lam * v.adjoint())
    }
}

pub fn hermitian_eig(a: &Operator) -> Result<HermitianEigen> {
    hermitian_eig_with_tol(a, DEFAULT_TOLERANCE)
}

/// Hermitian eigendecomposition; `tol` bounds the accepted asymmetry
/// relative to `max(1, max|A_ij|)`.
pub fn hermitian_eig_with_tol(a: &Operator, tol: f64) -> Result<HermitianEigen> {
    let defect = a.hermitian_defect();
    if defect > tol * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { max_asymmetry: defect });
    }
    let sym = (&a.mat + a.mat.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.rows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen {
        values,
        vectors: Operator::from_matrix(vectors),
    })
}

/// Spectrum of a normal operator, sorted descending by real then imaginary part.
#[derive(Clone, Debug)]
pub struct NormalEigen {
    pub values: Vec<C64>,
    pub vectors: Operator,
}

impl NormalEigen {
    pub fn vector(&self, idx: usize) -> DVector<C64> {
        self.vectors.mat.column(idx).into_owned()
    }

    pub fn reassemble(&self) -> Operator {
        let v = &self.vectors.mat;
        let lam = DMatrix::from_diagonal(&DVector::from_column_slice(&self.values));
        Operator::from_matrix(v * lam * v.adjoint())
    }
}

pub fn normal_eig(a: &Operator) -> Result<NormalEigen> {
    normal_eig_with_tol(a, DEFAULT_TOLERANCE)
}

pub fn normal_eig_with_tol(a: &Operator, tol: f64) -> Result<NormalEigen> {
    a.require_square()?;
    let scale = a.max_abs().max(1.0);
    let comm = a.commutator_with_adjoint();
    if comm > tol * scale * scale {
        return Err(Error::NotNormal { commutator_norm: comm });
    }
    let (q, t) = nalgebra::Schur::new(a.mat.clone()).unpack();
    let n = a.rows();
    // Quantized keys keep the order stable under rounding noise.
    let key = |z: C64| ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| key(t[(j, j)]).cmp(&key(t[(i, i)])));
    Ok(NormalEigen {
        values: order.iter().map(|&i| t[(i, i)]).collect(),
        vectors: Operator::from_matrix(DMatrix::from_fn(n, n, |r, c| q[(r, order[c])])),
    })
}

/// `exp(i t H)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    let eig = hermitian_eig(h)?;
    let v = &eig.vectors.mat;
    let phases = DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&l| C64::from_polar(1.0, t * l)),
    );
    Ok(Operator::from_matrix(v * DMatrix::from_diagonal(&phases) * v.adjoint()))
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary drawn from `rng` (QR of a Ginibre matrix with
/// the phases of `R`'s diagonal folded back into `Q`).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let (mut q, r) = ginibre(dim, dim, rng).qr().unpack();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Operator::from_matrix(q)
}

pub fn random_haar_unitary(dim: usize, seed: u64) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok(haar_unitary(dim, &mut seeded_rng(seed, 0)))
}

/// Square matrix with i.i.d. standard complex Gaussian entries.
pub fn random_operator<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    Operator::from_matrix(ginibre(dim, dim, rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = ginibre(dim, dim, rng);
    Operator::from_matrix((&g + g.adjoint()) * C64::new(0.5, 0.0))
}

/// Density matrix `G G† / Tr[G G†]` from a `dim × rank` Ginibre factor.
pub fn random_density_with_rng<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<State> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidParameter(format!("rank {rank} out of range 1..={dim}")));
    }
    let g = ginibre(dim, rank, rng);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    State::new(Operator::from_matrix(rho))
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<State> {
    random_density_with_rng(dim, rank, &mut seeded_rng(seed, 0))
}

/// A density operator: Hermitian, positive semidefinite and of unit trace,
/// all within `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Operator", try_from = "Operator")]
pub struct State {
    op: Operator,
    tolerance: f64,
}

impl State {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerance(op, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(op: Operator, tolerance: f64) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::InvalidState(format!("non-square {:?}", op.dims())));
        }
        let defect = op.hermitian_defect();
        if defect > tolerance {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max asymmetry {defect:.3e})"
            )));
        }
        let tr = op.trace()?;
        if (tr - ONE).norm() > tolerance {
            return Err(Error::InvalidState(format!(
                "trace {:.6}{:+.6}i differs from 1",
                tr.re, tr.im
            )));
        }
        let eig = hermitian_eig_with_tol(&op, tolerance)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -tolerance {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { op, tolerance })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scale_real(1.0 / dim as f64),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// `|ψ⟩⟨ψ|` for the normalized direction of `psi`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(Operator::projector(&(psi / C64::new(norm, 0.0))))
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.rows()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn purity(&self) -> f64 {
        self.op.hs_inner(&self.op).map(|z| z.re).unwrap_or(f64::NAN)
    }

    /// Eigenvalues in descending order.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eig_with_tol(&self.op, self.tolerance)
            .map(|e| e.values)
            .unwrap_or_default()
    }
}

impl From<State> for Operator {
    fn from(s: State) -> Self {
        s.op
    }
}

impl TryFrom<Operator> for State {
    type Error = String;

    fn try_from(op: Operator) -> std::result::Result<Self, String> {
        State::new(op).map_err(|e| e.to_string())
    }
}
