//! Continuous Bell POVMs over SU(d) and spin representations of SU(2).
//!
//! With normalized Haar measure `dU`, the elements `d |U⟩⟩⟨⟨U| dU` resolve
//! the identity on `H ⊗ H`; the outcome density for input `ρ ⊗ ν` is
//! `p(U) = d Tr[U† ρ U νᵀ] ≤ d`. For SU(d) the family `U νᵀ U†` has duals
//! `U ξ U†` for any `ξ` with `Tr[ξ] = d` and `Tr[νᵀ ξ†] = d²`.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::detectors::su2::SpinSystem;
use crate::error::{mismatch, Error, Result};
use crate::operator::{haar_unitary, vectorize, Operator, State, C64};
use crate::povm::{bell_overlap, Measurement, Processing, UniversalDetector};

/// Fidelity `|⟨ψ|φ⟩|²` must stay below `1 − FIDELITY_MARGIN`.
pub const FIDELITY_MARGIN: f64 = 1e-9;

/// Group whose (projective) representation generates the Bell POVM.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "kebab-case")]
pub enum BellGroup {
    /// Defining representation of SU(d), Haar measure.
    SpecialUnitary { d: usize },
    /// Spin-`j` representation of SU(2), `two_j = 2j`.
    Spin { two_j: usize },
}

/// Bell POVM with a continuum of outcomes indexed by group elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuousBellPovm {
    #[serde(flatten)]
    group: BellGroup,
}

impl ContinuousBellPovm {
    pub fn special_unitary(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("SU(d) needs d ≥ 2, got {d}")));
        }
        Ok(Self {
            group: BellGroup::SpecialUnitary { d },
        })
    }

    pub fn spin(two_j: usize) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::InvalidParameter("spin must be at least 1/2".into()));
        }
        Ok(Self {
            group: BellGroup::Spin { two_j },
        })
    }

    pub fn group(&self) -> BellGroup {
        self.group
    }

    pub fn dim(&self) -> usize {
        match self.group {
            BellGroup::SpecialUnitary { d } => d,
            BellGroup::Spin { two_j } => two_j + 1,
        }
    }

    /// True when the represented group is all of SU(dim), so that the
    /// `ξ`-dual applies.
    pub fn covers_special_unitary(&self) -> bool {
        match self.group {
            BellGroup::SpecialUnitary { .. } => true,
            BellGroup::Spin { two_j } => two_j == 1,
        }
    }

    /// POVM density `d |U⟩⟩⟨⟨U|` with respect to normalized Haar measure.
    pub fn element(&self, u: &Operator) -> Operator {
        let v = vectorize(u);
        v.outer(&v).scale_real(self.dim() as f64)
    }

    /// Outcome density `d Tr[U† ρ U νᵀ]`.
    pub fn density(&self, rho: &State, nu: &State, u: &Operator) -> f64 {
        self.dim() as f64 * bell_overlap(rho.op(), u, &nu.op().transpose()).re
    }

    /// Upper bound on [`Self::density`], valid for all states.
    pub fn density_bound(&self) -> f64 {
        self.dim() as f64
    }

    pub fn sampler(&self) -> GroupSampler {
        match self.group {
            BellGroup::SpecialUnitary { d } => GroupSampler::Haar(d),
            BellGroup::Spin { two_j } => GroupSampler::Spin(SpinSystem::new(two_j)),
        }
    }
}

/// Draws Haar-distributed group elements in the POVM's representation.
#[derive(Clone, Debug)]
pub enum GroupSampler {
    Haar(usize),
    Spin(SpinSystem),
}

impl GroupSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Operator {
        match self {
            GroupSampler::Haar(d) => haar_unitary(*d, rng),
            GroupSampler::Spin(sys) => {
                let (psi, n) = crate::detectors::su2::axis_angle(&haar_unitary(2, rng));
                sys.rotation(psi, n)
            }
        }
    }
}

fn check_unit(v: &DVector<C64>, name: &str) -> Result<()> {
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "{name} must be a unit vector (norm {})",
            v.norm()
        )));
    }
    Ok(())
}

fn fidelity(phi: &DVector<C64>, psi: &DVector<C64>) -> Result<f64> {
    if phi.len() != psi.len() {
        return Err(mismatch(format!("vectors of length {}", phi.len()), psi.len()));
    }
    check_unit(phi, "φ")?;
    check_unit(psi, "ψ")?;
    let f = psi.dotc(phi).norm_sqr();
    if f >= 1.0 - FIDELITY_MARGIN {
        return Err(Error::Degenerate(format!("|⟨ψ|φ⟩|² = {f} too close to 1")));
    }
    Ok(f)
}

/// `ξ = d/(1−F) [(d−F)|φ⟩⟨φ| − (d−1)|ψ⟩⟨ψ|]`, `F = |⟨ψ|φ⟩|²`.
pub fn sud_xi(phi: &DVector<C64>, psi: &DVector<C64>) -> Result<Operator> {
    let f = fidelity(phi, psi)?;
    let d = phi.len() as f64;
    let pre = d / (1.0 - f);
    Operator::projector(phi)
        .scale_real(pre * (d - f))
        .sub(&Operator::projector(psi).scale_real(pre * (d - 1.0)))
}

/// `f = d/(1−F) [(d−F)⟨φ|U†OU|φ⟩ − (d−1)⟨ψ|U†OU|ψ⟩]`.
pub fn sud_processing(phi: &DVector<C64>, psi: &DVector<C64>, u: &Operator, o: &Operator) -> Result<C64> {
    let w = SudWeight::new(phi, psi, o)?;
    if u.dims() != o.dims() {
        return Err(mismatch(format!("{:?}", o.dims()), format!("{:?}", u.dims())));
    }
    Ok(w.processing_value(u))
}

/// Processing of the SU(d) Bell detector for a fixed observable.
#[derive(Clone, Debug)]
pub struct SudWeight {
    phi: DVector<C64>,
    psi: DVector<C64>,
    o: Operator,
    coef_phi: f64,
    coef_psi: f64,
    dim: f64,
}

impl SudWeight {
    pub fn new(phi: &DVector<C64>, psi: &DVector<C64>, o: &Operator) -> Result<Self> {
        let f = fidelity(phi, psi)?;
        let d = phi.len();
        if o.dims() != (d, d) {
            return Err(mismatch(format!("({d}, {d})"), format!("{:?}", o.dims())));
        }
        let df = d as f64;
        let pre = df / (1.0 - f);
        Ok(Self {
            phi: phi.clone(),
            psi: psi.clone(),
            o: o.clone(),
            coef_phi: pre * (df - f),
            coef_psi: pre * (df - 1.0),
            dim: df,
        })
    }

    /// `f(U) = Tr[(U ξ U†)† O]`.
    pub fn processing_value(&self, u: &Operator) -> C64 {
        let o = self.o.matrix();
        let uphi = u.matrix() * &self.phi;
        let upsi = u.matrix() * &self.psi;
        let a = uphi.dotc(&(o * &uphi));
        let b = upsi.dotc(&(o * &upsi));
        a * self.coef_phi - b * self.coef_psi
    }

    /// Weight of outcome `U` when outcomes are drawn from the density
    /// `d Tr[U† ρ U νᵀ]`: `f(U) / d`.
    pub fn outcome_weight(&self, u: &Operator) -> C64 {
        self.processing_value(u) / self.dim
    }
}

/// SU(d) Bell detector with ancilla `ν = |φ*⟩⟨φ*|` (so `νᵀ = |φ⟩⟨φ|`).
pub fn sud_detector_with(phi: &DVector<C64>, psi: &DVector<C64>) -> Result<UniversalDetector> {
    let d = phi.len();
    let nu = State::pure(&phi.conjugate())?;
    UniversalDetector::new(
        Measurement::Continuous(ContinuousBellPovm::special_unitary(d)?),
        nu,
        Processing::SudXi {
            phi: phi.iter().copied().collect(),
            psi: psi.iter().copied().collect(),
        },
    )
}

/// `φ = |0⟩`, `ψ = |1⟩`.
pub fn sud_detector(d: usize) -> Result<UniversalDetector> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("SU(d) detector needs d ≥ 2, got {d}")));
    }
    sud_detector_with(&Operator::basis_ket(d, 0), &Operator::basis_ket(d, 1))
}
