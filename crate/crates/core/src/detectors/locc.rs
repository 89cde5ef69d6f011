//! Separable detector: the ancilla is measured in a fixed basis `{|l⟩}`
//! and, given outcome `l`, the system is measured in the eigenbasis of a
//! normal operator `C(l)`. Elements are
//! `Π_{k,l} = |c_k(l)⟩⟨c_k(l)| ⊗ |l⟩⟨l|`, outcome index `l · dim H + k`.

use crate::detectors::weyl::weyl_family;
use crate::error::{mismatch, Error, Result};
use crate::frames::{is_spanning, OperatorFamily};
use crate::operator::{normal_eig_with_tol, tensor_product, NormalEigen, Operator, State, C64};
use crate::povm::{processing_coefficients, Povm, Processing, UniversalDetector};

/// Tolerance on `‖CC† − C†C‖` relative to `max|C|²`.
pub const NORMALITY_TOLERANCE: f64 = 1e-12;

/// Smallest accepted `⟨l|ν|l⟩`.
pub const ANCILLA_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct LoccPovm {
    base: OperatorFamily,
    eigen: Vec<NormalEigen>,
    povm: Povm,
}

impl LoccPovm {
    /// Requires each `C(l)` normal, `L ≥ (dim H)²`, and `{C(l)}` spanning.
    pub fn from_base(base: OperatorFamily) -> Result<Self> {
        let (h, w) = base.dims();
        if h != w {
            return Err(mismatch("square base operators", format!("{:?}", base.dims())));
        }
        let l_count = base.len();
        if l_count < h * h {
            return Err(Error::InvalidParameter(format!(
                "need at least {} base operators on dimension {h}, got {l_count}",
                h * h
            )));
        }
        let report = is_spanning(&base);
        if !report.spans {
            return Err(Error::NotSpanning {
                rank: report.rank,
                dim: report.dim,
                deficiency: report.deficiency(),
                least_singular_value: report.least_singular_value,
            });
        }
        let eigen: Vec<NormalEigen> = base
            .members()
            .iter()
            .map(|c| normal_eig_with_tol(c, NORMALITY_TOLERANCE))
            .collect::<Result<_>>()?;
        let mut elements = Vec::with_capacity(l_count * h);
        let mut labels = Vec::with_capacity(l_count * h);
        for (l, (e, name)) in eigen.iter().zip(base.labels()).enumerate() {
            let slot = Operator::projector(&Operator::basis_ket(l_count, l));
            for k in 0..h {
                elements.push(tensor_product(&Operator::projector(&e.vector(k)), &slot));
                labels.push(format!("{k}|{name}"));
            }
        }
        let povm = Povm::labeled((h, l_count), elements, labels)?;
        Ok(Self { base, eigen, povm })
    }

    pub fn base(&self) -> &OperatorFamily {
        &self.base
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn dim_h(&self) -> usize {
        self.base.dims().0
    }

    /// Ancilla dimension `L`.
    pub fn slots(&self) -> usize {
        self.base.len()
    }

    /// `c_k(l)`.
    pub fn eigenvalue(&self, k: usize, l: usize) -> C64 {
        self.eigen[l].values[k]
    }

    /// `|c_k(l)⟩`.
    pub fn eigenvector(&self, k: usize, l: usize) -> nalgebra::DVector<C64> {
        self.eigen[l].vector(k)
    }

    pub fn processing(&self) -> Processing {
        Processing::Locc {
            base: self.base.members().to_vec(),
            eigenvalues: self.eigen.iter().flat_map(|e| e.values.iter().copied()).collect(),
        }
    }
}

/// Weyl unitaries `C(l) = U_{m,n}` with `l = m·d + n`.
pub fn locc_povm(d: usize) -> Result<LoccPovm> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("LOCC detector needs d ≥ 2, got {d}")));
    }
    LoccPovm::from_base(weyl_family(d)?)
}

/// Every `⟨l|ν|l⟩` must exceed [`ANCILLA_FLOOR`].
pub(crate) fn check_ancilla_diagonal(nu: &State) -> Result<()> {
    for l in 0..nu.dim() {
        let p = nu.op().get(l, l).re;
        if p <= ANCILLA_FLOOR {
            return Err(Error::VanishingDenominator {
                at: format!("ancilla slot l = {l}"),
                magnitude: p.abs(),
            });
        }
    }
    Ok(())
}

/// `f_{k,l} = Tr[Θ(l)† O] c_k(l) / ⟨l|ν|l⟩` with `{Θ(l)}` the canonical
/// dual of `{C(l)}`.
pub fn locc_processing(p: &LoccPovm, nu: &State, o: &Operator) -> Result<Vec<C64>> {
    processing_coefficients(&UniversalDetector::locc(p, nu.clone())?, o)
}

pub fn locc_detector_with(d: usize, nu: State) -> Result<UniversalDetector> {
    UniversalDetector::locc(&locc_povm(d)?, nu)
}

/// Ancilla `I / d²`.
pub fn locc_detector(d: usize) -> Result<UniversalDetector> {
    locc_detector_with(d, State::maximally_mixed(d * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::weyl::weyl_unitary;
    use crate::operator::{random_density, random_hermitian, random_operator, seeded_rng};
    use crate::povm::{exact_expectation, validate_povm};
    use rand::Rng;

    #[test]
    fn qubit_structure() {
        let p = locc_povm(2).unwrap();
        assert_eq!(p.povm().len(), 8);
        assert_eq!(p.povm().dims(), (2, 4));
        let total = p.povm().element_sum();
        assert!(total.max_abs_diff(&Operator::identity(8)).unwrap() < 1e-12);
        for c in p.base().members() {
            assert!(c.commutator_with_adjoint() < 1e-12);
        }
        assert!(validate_povm(p.povm()).passed);
    }

    #[test]
    fn elements_are_orthogonal_projectors() {
        let p = locc_povm(3).unwrap();
        let els = p.povm().elements();
        for (i, a) in els.iter().enumerate() {
            for (j, b) in els.iter().enumerate() {
                let t = a.matmul(b).unwrap().trace().unwrap().re;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((t - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn qubit_z_example() {
        let p = locc_povm(2).unwrap();
        let nu = State::maximally_mixed(4);
        let z = weyl_unitary(2, 1, 0).unwrap();
        let f = locc_processing(&p, &nu, &z).unwrap();
        let l = 2;
        let k = (0..2)
            .find(|&k| (p.eigenvalue(k, l) - C64::new(1.0, 0.0)).norm() < 1e-9)
            .unwrap();
        assert!((f[l * 2 + k] - C64::new(4.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn identity_only_uses_trivial_slot() {
        let p = locc_povm(2).unwrap();
        let nu = State::maximally_mixed(4);
        let f = locc_processing(&p, &nu, &Operator::identity(2)).unwrap();
        for (i, fi) in f.iter().enumerate() {
            if i / 2 != 0 {
                assert!(fi.norm() < 1e-12);
            }
        }
        let det = locc_detector(2).unwrap();
        let rho = random_density(2, 2, 80).unwrap();
        let total = exact_expectation(&det, &rho, &Operator::identity(2)).unwrap();
        assert!((total - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn universality_identity_random_cases() {
        let mut rng = seeded_rng(81, 0);
        for d in [2, 3] {
            let p = locc_povm(d).unwrap();
            let l = d * d;
            let raw: Vec<f64> = (0..l).map(|_| rng.random_range(0.1..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let diag: Vec<C64> = raw.iter().map(|x| C64::new(x / sum, 0.0)).collect();
            for nu in [
                State::maximally_mixed(l),
                State::new(Operator::diagonal(&diag)).unwrap(),
            ] {
                let det = UniversalDetector::locc(&p, nu).unwrap();
                for case in 0..50 {
                    let rho = random_density(d, 1 + case % d, 82 + case as u64).unwrap();
                    let o = random_operator(d, &mut rng);
                    let est = exact_expectation(&det, &rho, &o).unwrap();
                    let exact = rho.op().trace_product(&o).unwrap();
                    assert!((est - exact).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn non_self_dual_base_still_reconstructs() {
        // Scaled Weyl family: canonical dual differs from C(l)/d.
        let mut rng = seeded_rng(83, 0);
        let d = 2;
        let fam = weyl_family(d).unwrap();
        let scaled: Vec<Operator> = fam
            .members()
            .iter()
            .enumerate()
            .map(|(i, c)| c.scale_real(1.0 + i as f64))
            .collect();
        let p = LoccPovm::from_base(OperatorFamily::new(scaled).unwrap()).unwrap();
        let det = UniversalDetector::locc(&p, State::maximally_mixed(4)).unwrap();
        let rho = random_density(d, 2, 84).unwrap();
        let o = random_hermitian(d, &mut rng);
        let est = exact_expectation(&det, &rho, &o).unwrap();
        assert!((est - rho.op().trace_product(&o).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn vanishing_slot_is_named() {
        let p = locc_povm(2).unwrap();
        let nu = State::pure(&Operator::basis_ket(4, 0)).unwrap();
        match locc_processing(&p, &nu, &Operator::identity(2)) {
            Err(Error::VanishingDenominator { at, .. }) => assert!(at.contains("l = 1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn base_requirements() {
        let fam = weyl_family(2).unwrap();
        let short = OperatorFamily::new(fam.members()[..3].to_vec()).unwrap();
        assert!(LoccPovm::from_base(short).is_err());
        let mut members = fam.members().to_vec();
        members[3] = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            LoccPovm::from_base(OperatorFamily::new(members).unwrap()),
            Err(Error::NotNormal { .. })
        ));
        let repeated = vec![Operator::identity(2); 4];
        assert!(matches!(
            LoccPovm::from_base(OperatorFamily::new(repeated).unwrap()),
            Err(Error::NotSpanning { .. })
        ));
    }
}
