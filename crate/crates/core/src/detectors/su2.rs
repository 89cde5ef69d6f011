//! Spin-`j` representations of SU(2): rotations, spin coherent states,
//! the Bell POVM `Π(ψ, n) = |U(ψ,n)⟩⟩⟨⟨U(ψ,n)|` and product quadrature
//! over the group.
//!
//! Basis index `k` holds the `J_z` eigenvalue `m = j − k`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::frames::{canonical_dual, OperatorFamily};
use crate::operator::{exp_i_hermitian, vectorize, Operator, State, C64, I};
use crate::povm::{BellPovm, Measurement, UniversalDetector};

/// Angular momentum operators for spin `j = two_j / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    two_j: usize,
    jx: Operator,
    jy: Operator,
    jz: Operator,
    jp: Operator,
    jm: Operator,
}

impl SpinSystem {
    pub fn new(two_j: usize) -> Self {
        let dim = two_j + 1;
        let j = two_j as f64 / 2.0;
        let m_of = |k: usize| j - k as f64;
        let jz = Operator::diagonal(&(0..dim).map(|k| C64::new(m_of(k), 0.0)).collect::<Vec<_>>());
        // J₊|m⟩ = √(j(j+1) − m(m+1)) |m+1⟩, and |m+1⟩ sits at k − 1.
        let jp = Operator::from_fn(dim, dim, |r, c| {
            if c >= 1 && r == c - 1 {
                let m = m_of(c);
                C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let jm = jp.adjoint();
        let jx = jp.add(&jm).expect("same dims").scale_real(0.5);
        let jy = jp.sub(&jm).expect("same dims").scale(-I * 0.5);
        Self {
            two_j,
            jx,
            jy,
            jz,
            jp,
            jm,
        }
    }

    /// Spin from a half-integer `j`.
    pub fn from_j(j: f64) -> Result<Self> {
        let two_j = (2.0 * j).round();
        if !j.is_finite() || two_j < 1.0 || (2.0 * j - two_j).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "spin must be a positive half-integer, got {j}"
            )));
        }
        Ok(Self::new(two_j as usize))
    }

    pub fn two_j(&self) -> usize {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j + 1
    }

    pub fn jx(&self) -> &Operator {
        &self.jx
    }

    pub fn jy(&self) -> &Operator {
        &self.jy
    }

    pub fn jz(&self) -> &Operator {
        &self.jz
    }

    pub fn j_plus(&self) -> &Operator {
        &self.jp
    }

    pub fn j_minus(&self) -> &Operator {
        &self.jm
    }

    /// Basis index of the `J_z` eigenvalue `m`.
    pub fn index_of(&self, m: f64) -> Result<usize> {
        let k = self.j() - m;
        let kr = k.round();
        if (k - kr).abs() > 1e-9 || kr < 0.0 || kr > self.two_j as f64 {
            return Err(Error::IndexOutOfRange(format!("m = {m} for spin {}", self.j())));
        }
        Ok(kr as usize)
    }

    /// `J·n`.
    pub fn along(&self, n: [f64; 3]) -> Operator {
        let mut out = self.jx.scale_real(n[0]);
        out.axpy(C64::new(n[1], 0.0), &self.jy).expect("same dims");
        out.axpy(C64::new(n[2], 0.0), &self.jz).expect("same dims");
        out
    }

    /// `exp(i ψ J·n)` without checking `n`.
    pub fn rotation(&self, psi: f64, n: [f64; 3]) -> Operator {
        exp_i_hermitian(&self.along(n), psi).expect("J·n is Hermitian")
    }
}

fn check_axis(n: [f64; 3]) -> Result<()> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "rotation axis must be a unit vector (norm {norm})"
        )));
    }
    Ok(())
}

/// `U(ψ, n) = exp(i ψ J·n)`.
pub fn su2_unitary(sys: &SpinSystem, psi: f64, n: [f64; 3]) -> Result<Operator> {
    check_axis(n)?;
    Ok(sys.rotation(psi, n))
}

/// `D(ψ, φ) = exp(i (ψ/2)(J₊ e^{−iφ} + J₋ e^{iφ}))`.
pub fn displacement(sys: &SpinSystem, psi: f64, phi: f64) -> Operator {
    sys.rotation(psi, [phi.cos(), phi.sin(), 0.0])
}

/// `D(ψ, φ)|m⟩`.
pub fn spin_coherent(sys: &SpinSystem, psi: f64, phi: f64, m: f64) -> Result<DVector<C64>> {
    let k = sys.index_of(m)?;
    Ok(displacement(sys, psi, phi).matrix().column(k).into_owned())
}

/// `|U(ψ,n)⟩⟩⟨⟨U(ψ,n)|`.
pub fn su2_bell_element(sys: &SpinSystem, psi: f64, n: [f64; 3]) -> Result<Operator> {
    let v = vectorize(&su2_unitary(sys, psi, n)?);
    Ok(v.outer(&v))
}

/// Parameters with `U(ψ, n) = D(ψ', φ') e^{2iθ' J_z}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Su2Factorization {
    pub psi: f64,
    pub phi: f64,
    pub theta: f64,
}

impl Su2Factorization {
    pub fn reconstruct(&self, sys: &SpinSystem) -> Operator {
        let z = exp_i_hermitian(sys.jz(), 2.0 * self.theta).expect("J_z is Hermitian");
        displacement(sys, self.psi, self.phi).matmul(&z).expect("same dims")
    }
}

/// Computed in the fundamental representation, where
/// `U = [[a, b], [−b*, a*]]`, and valid in every representation.
pub fn su2_factorize(psi: f64, n: [f64; 3]) -> Result<Su2Factorization> {
    check_axis(n)?;
    let (c, s) = ((psi / 2.0).cos(), (psi / 2.0).sin());
    let a = C64::new(c, s * n[2]);
    let b = C64::new(s * n[1], s * n[0]);
    let psi_p = 2.0 * b.norm().atan2(a.norm());
    let tiny = 1e-14;
    let theta = if a.norm() > tiny { a.arg() } else { 0.0 };
    let phi = if b.norm() > tiny {
        FRAC_PI_2 - b.arg() - theta
    } else {
        0.0
    };
    Ok(Su2Factorization {
        psi: psi_p,
        phi: phi.rem_euclid(TAU),
        theta: theta.rem_euclid(TAU),
    })
}

/// Rotation angle in `[0, 2π]` and unit axis of a 2×2 unitary, after
/// dividing out its determinant phase.
pub fn axis_angle(u: &Operator) -> (f64, [f64; 3]) {
    let m = u.matrix();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let root = det.sqrt();
    let a = m[(0, 0)] / root;
    let b = m[(0, 1)] / root;
    let axis = [b.im, b.re, a.im];
    let s = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let psi = 2.0 * s.atan2(a.re);
    if s < 1e-15 {
        return (psi, [0.0, 0.0, 1.0]);
    }
    (psi, [axis[0] / s, axis[1] / s, axis[2] / s])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // P_n(x) by recurrence, then P_n'(x).
            let (mut p1, mut p2) = (1.0, 0.0);
            for k in 1..=n {
                let kf = k as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * kf - 1.0) * x * p2 - (kf - 1.0) * p3) / kf;
            }
            dp = nf * (x * p1 - p2) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Product rule over SU(2) in `(ψ, θ, φ)` with `n = (sinθ cosφ, sinθ sinφ, cosθ)`:
/// midpoint in `ψ`, Gauss–Legendre in `cos θ`, uniform in `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Su2Grid {
    pub n_psi: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for Su2Grid {
    fn default() -> Self {
        Self {
            n_psi: 40,
            n_theta: 20,
            n_phi: 20,
        }
    }
}

impl fmt::Display for Su2Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.n_psi, self.n_theta, self.n_phi)
    }
}

impl FromStr for Su2Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('x').collect();
        let bad = || Error::InvalidParameter(format!("grid must look like 40x20x20, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<usize> = parts
            .iter()
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Self::new(nums[0], nums[1], nums[2])
    }
}

/// One quadrature node: normalized Haar weight and group parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Node {
    pub weight: f64,
    pub psi: f64,
    pub axis: [f64; 3],
    pub index: (usize, usize, usize),
}

impl Su2Grid {
    pub fn new(n_psi: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_psi == 0 || n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidParameter("grid sizes must be positive".into()));
        }
        Ok(Self { n_psi, n_theta, n_phi })
    }

    pub fn len(&self) -> usize {
        self.n_psi * self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weights sum to one: `(1/4π²) ∫ sin²(ψ/2) dψ dn`.
    pub fn nodes(&self) -> Vec<Su2Node> {
        let (ct, wt) = gauss_legendre(self.n_theta);
        let dpsi = TAU / self.n_psi as f64;
        let dphi = TAU / self.n_phi as f64;
        let mut out = Vec::with_capacity(self.len());
        for a in 0..self.n_psi {
            let psi = (a as f64 + 0.5) * dpsi;
            let wpsi = (psi / 2.0).sin().powi(2) * dpsi;
            for (b, (&z, &w)) in ct.iter().zip(&wt).enumerate() {
                let st = (1.0 - z * z).max(0.0).sqrt();
                for c in 0..self.n_phi {
                    let phi = c as f64 * dphi;
                    out.push(Su2Node {
                        weight: wpsi * w * dphi / (4.0 * PI * PI),
                        psi,
                        axis: [st * phi.cos(), st * phi.sin(), z],
                        index: (a, b, c),
                    });
                }
            }
        }
        out
    }
}

/// `(2j+1) Σ_x w(x) Π(x)`, which approximates `I ⊗ I`.
pub fn bell_resolution(sys: &SpinSystem, grid: &Su2Grid) -> Operator {
    let d = sys.dim();
    let mut acc = Operator::zeros(d * d, d * d);
    for node in grid.nodes() {
        let v = vectorize(&sys.rotation(node.psi, node.axis));
        acc.axpy(C64::new(d as f64 * node.weight, 0.0), &v.outer(&v))
            .expect("same dims");
    }
    acc
}

/// `(2j+1)/(4π) ∫ sinψ dψ dφ |ψ,φ;m⟩⟨ψ,φ;m|` with Gauss–Legendre in `cos ψ`
/// and a uniform rule in `φ`.
pub fn coherent_completeness(sys: &SpinSystem, m: f64, n_psi: usize, n_phi: usize) -> Result<Operator> {
    let k = sys.index_of(m)?;
    if n_psi == 0 || n_phi == 0 {
        return Err(Error::InvalidParameter("grid sizes must be positive".into()));
    }
    let d = sys.dim();
    let (cz, wz) = gauss_legendre(n_psi);
    let dphi = TAU / n_phi as f64;
    let mut acc = Operator::zeros(d, d);
    for (&z, &w) in cz.iter().zip(&wz) {
        let psi = z.acos();
        for c in 0..n_phi {
            let phi = c as f64 * dphi;
            let v = displacement(sys, psi, phi).matrix().column(k).into_owned();
            acc.axpy(
                C64::new(d as f64 * w * dphi / (4.0 * PI), 0.0),
                &Operator::projector(&v),
            )
            .expect("same dims");
        }
    }
    Ok(acc)
}

/// Finite Bell POVM on the grid nodes, weights `(2j+1) w(x)`.
pub fn su2_grid_povm(sys: &SpinSystem, grid: &Su2Grid) -> Result<BellPovm> {
    let d = sys.dim() as f64;
    let nodes = grid.nodes();
    let weights = nodes.iter().map(|n| d * n.weight).collect();
    let labels = nodes
        .iter()
        .map(|n| format!("{},{},{}", n.index.0, n.index.1, n.index.2))
        .collect();
    let unitaries = nodes.iter().map(|n| sys.rotation(n.psi, n.axis)).collect();
    BellPovm::new(sys.dim(), weights, unitaries, labels)
}

/// Ancilla must be diagonal in the `J_z` basis with positive populations.
pub fn check_su2_ancilla(sys: &SpinSystem, nu: &State) -> Result<()> {
    let d = sys.dim();
    if nu.dim() != d {
        return Err(mismatch(format!("ancilla of dim {d}"), nu.dim()));
    }
    let op = nu.op();
    let off = (0..d)
        .flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| op.get(r, c).norm())
        .fold(0.0, f64::max);
    if off > nu.tolerance() {
        return Err(Error::InvalidState(format!(
            "ancilla must be diagonal in the J_z basis (largest off-diagonal {off:.3e})"
        )));
    }
    if let Some(k) = (0..d).find(|&k| op.get(k, k).re <= 1e-12) {
        return Err(Error::InvalidState(format!(
            "ancilla population of m = {} vanishes",
            sys.j() - k as f64
        )));
    }
    Ok(())
}

/// Populations `p_k ∝ 2^{-k}`, distinct for every `m`.
pub fn su2_default_ancilla(sys: &SpinSystem) -> State {
    let raw: Vec<f64> = (0..sys.dim()).map(|k| 0.5f64.powi(k as i32)).collect();
    let total: f64 = raw.iter().sum();
    let diag: Vec<C64> = raw.iter().map(|p| C64::new(p / total, 0.0)).collect();
    State::new(Operator::diagonal(&diag)).expect("diagonal probability vector")
}

/// Coefficients `f(x) = Tr[Θ(x)† O]` from the canonical dual of the
/// discretized family `{(2j+1) w(x) U(x) νᵀ U(x)†}`, in grid-node order.
pub fn su2_numeric_processing(sys: &SpinSystem, nu: &State, grid: &Su2Grid, o: &Operator) -> Result<Vec<C64>> {
    check_su2_ancilla(sys, nu)?;
    let d = sys.dim();
    if o.dims() != (d, d) {
        return Err(mismatch(format!("({d}, {d})"), format!("{:?}", o.dims())));
    }
    let povm = su2_grid_povm(sys, grid)?;
    let family: OperatorFamily = povm.induced_family(nu)?;
    canonical_dual(&family)?
        .members()
        .iter()
        .map(|t| t.hs_inner(o))
        .collect()
}

/// Grid Bell POVM with generic dual processing.
pub fn su2_detector_with(sys: &SpinSystem, grid: &Su2Grid, nu: State) -> Result<UniversalDetector> {
    check_su2_ancilla(sys, &nu)?;
    UniversalDetector::generic(Measurement::Bell(su2_grid_povm(sys, grid)?), nu)
}

pub fn su2_detector(two_j: usize, grid: &Su2Grid) -> Result<UniversalDetector> {
    if two_j == 0 {
        return Err(Error::InvalidParameter("spin must be at least 1/2".into()));
    }
    let sys = SpinSystem::new(two_j);
    let nu = su2_default_ancilla(&sys);
    su2_detector_with(&sys, grid, nu)
}
