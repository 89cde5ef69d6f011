//! Weyl–Heisenberg Bell detector.
//!
//! `U_{m,n} = Σ_k e^{2πikm/d} |k⟩⟨k ⊕ n|` form a projective representation
//! of `Z_d × Z_d` with
//! `U_{m,n} U_{m',n'} U_{m,n}† = e^{2πi(nm' − mn')/d} U_{m',n'}` and
//! `Tr[U_{p,q}† U_{m,n}] = d δ_{mp} δ_{nq}`. The projectors
//! `(1/d)|U_{m,n}⟩⟩⟨⟨U_{m,n}|` form an orthogonal Bell POVM, universal for
//! any ancilla with `Tr[U_{p,q}† νᵀ] ≠ 0` for all `(p, q)`.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::frames::OperatorFamily;
use crate::operator::{vectorize, Operator, State, C64, ZERO};
use crate::povm::{Measurement, Povm, Processing, UniversalDetector};

/// Smallest accepted `|Tr[U_{p,q}† νᵀ]|`.
pub const DENOMINATOR_GUARD: f64 = 1e-6;

/// Mixing weight of the maximally mixed component in fallback ancillas.
const FALLBACK_MIXING: f64 = 0.1;

fn omega(d: usize, power: i64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * power.rem_euclid(d as i64) as f64 / d as f64)
}

fn check_index(d: usize, m: usize, n: usize) -> Result<()> {
    if d == 0 || m >= d || n >= d {
        return Err(Error::IndexOutOfRange(format!("(m, n) = ({m}, {n}) for d = {d}")));
    }
    Ok(())
}

pub fn weyl_unitary(d: usize, m: usize, n: usize) -> Result<Operator> {
    check_index(d, m, n)?;
    Ok(Operator::from_fn(d, d, |r, c| {
        if c == (r + n) % d {
            omega(d, (r * m) as i64)
        } else {
            ZERO
        }
    }))
}

/// Phase `c((m,n),(m',n')) = 2π(nm' − mn')/d` of the composition law.
pub fn cocycle(d: usize, (m, n): (usize, usize), (mp, np): (usize, usize)) -> f64 {
    let k = (n * mp) as i64 - (m * np) as i64;
    2.0 * PI * k.rem_euclid(d as i64) as f64 / d as f64
}

/// Outcome index of `(m, n)`.
pub fn outcome_index(d: usize, m: usize, n: usize) -> usize {
    m * d + n
}

fn label(m: usize, n: usize) -> String {
    format!("{m},{n}")
}

/// All `d²` Weyl unitaries, ordered by [`outcome_index`].
pub fn weyl_family(d: usize) -> Result<OperatorFamily> {
    let mut members = Vec::with_capacity(d * d);
    let mut labels = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            members.push(weyl_unitary(d, m, n)?);
            labels.push(label(m, n));
        }
    }
    OperatorFamily::labeled(members, labels)
}

/// `Π_{m,n} = (1/d)|U_{m,n}⟩⟩⟨⟨U_{m,n}|` on `H ⊗ H`.
pub fn weyl_bell_povm(d: usize) -> Result<Povm> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("Weyl Bell POVM needs d ≥ 2, got {d}")));
    }
    let family = weyl_family(d)?;
    let elements = family
        .members()
        .iter()
        .map(|u| {
            let v = vectorize(u);
            v.outer(&v).scale_real(1.0 / d as f64)
        })
        .collect();
    Povm::labeled((d, d), elements, family.labels().to_vec())
}

/// `Tr[U_{p,q}† A] = Σ_k ω^{−kp} A[k, k⊕q]`.
fn weyl_overlap(d: usize, p: usize, q: usize, a: &Operator) -> C64 {
    (0..d)
        .map(|k| omega(d, -((k * p) as i64)) * a.get(k, (k + q) % d))
        .sum()
}

/// `Tr[U_{p,q}† νᵀ]` for every `(p, q)`, rejecting any whose modulus is
/// at most [`DENOMINATOR_GUARD`].
pub fn weyl_denominators(d: usize, nu: &State) -> Result<Vec<C64>> {
    weyl_denominators_with_guard(d, nu, DENOMINATOR_GUARD)
}

pub fn weyl_denominators_with_guard(d: usize, nu: &State, guard: f64) -> Result<Vec<C64>> {
    if nu.dim() != d {
        return Err(crate::error::mismatch(format!("ancilla of dim {d}"), nu.dim()));
    }
    let nu_t = nu.op().transpose();
    let mut out = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in 0..d {
            let t = weyl_overlap(d, p, q, &nu_t);
            if t.norm() <= guard {
                return Err(Error::VanishingDenominator {
                    at: format!("(p, q) = ({p}, {q})"),
                    magnitude: t.norm(),
                });
            }
            out.push(t);
        }
    }
    Ok(out)
}

fn min_denominator(d: usize, nu: &Operator) -> f64 {
    let nu_t = nu.transpose();
    (0..d * d)
        .map(|i| weyl_overlap(d, i / d, i % d, &nu_t).norm())
        .fold(f64::INFINITY, f64::min)
}

/// `I/d + Σ_{(m,n) ≠ (0,0)} U_{m,n} / (d(d² − 1))`. Not Hermitian in
/// general (at `d = 2`, `U_{1,1}` is anti-Hermitian).
pub fn weyl_sum_candidate(d: usize) -> Result<Operator> {
    let scale = 1.0 / (d * (d * d - 1)) as f64;
    let mut acc = Operator::identity(d).scale_real(1.0 / d as f64);
    for m in 0..d {
        for n in 0..d {
            if (m, n) != (0, 0) {
                acc.axpy(C64::new(scale, 0.0), &weyl_unitary(d, m, n)?)?;
            }
        }
    }
    Ok(acc)
}

/// `(1 − ε)|χ⟩⟨χ| + ε I/d` with `χ ∝ Σ_k (k+1) e^{iπk²/denominator} |k⟩`.
fn chirp_candidate(d: usize, denominator: f64) -> Operator {
    let chi = DVector::from_fn(d, |k, _| {
        C64::from_polar((k + 1) as f64, PI * (k * k) as f64 / denominator)
    });
    let chi = &chi / C64::new(chi.norm(), 0.0);
    Operator::projector(&chi)
        .scale_real(1.0 - FALLBACK_MIXING)
        .add(&Operator::identity(d).scale_real(FALLBACK_MIXING / d as f64))
        .expect("same dims")
}

/// Which candidate [`weyl_ancilla`] settled on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AncillaSource {
    /// The uniform sum over the group.
    GroupSum,
    /// Chirp state with phase `πk²/d`.
    Chirp,
    /// Chirp state with phase `πk²/(2d)`; the `πk²/d` chirp is degenerate
    /// for even `d`.
    HalfChirp,
}

/// First valid ancilla among the group sum, the `πk²/d` chirp and the
/// `πk²/(2d)` chirp, together with its provenance.
pub fn weyl_ancilla_with_source(d: usize) -> Result<(State, AncillaSource)> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("Weyl ancilla needs d ≥ 2, got {d}")));
    }
    let candidates = [
        (weyl_sum_candidate(d)?, AncillaSource::GroupSum),
        (chirp_candidate(d, d as f64), AncillaSource::Chirp),
        (chirp_candidate(d, 2.0 * d as f64), AncillaSource::HalfChirp),
    ];
    let mut best = 0.0f64;
    for (op, source) in candidates {
        let Ok(state) = State::new(op) else { continue };
        let min = min_denominator(d, state.op());
        best = best.max(min);
        if min > DENOMINATOR_GUARD {
            return Ok((state, source));
        }
    }
    Err(Error::AncillaSearchFailed { d, best })
}

pub fn weyl_ancilla(d: usize) -> Result<State> {
    weyl_ancilla_with_source(d).map(|(s, _)| s)
}

/// `f_{m,n}(ν, O) = (1/d) Σ_{p,q} Tr[U_{p,q}† O] e^{2πi(mq − np)/d} / Tr[U_{p,q}† νᵀ]`,
/// ordered by [`outcome_index`].
pub fn weyl_processing(d: usize, nu: &State, o: &Operator) -> Result<Vec<C64>> {
    if o.dims() != (d, d) {
        return Err(crate::error::mismatch(format!("({d}, {d})"), format!("{:?}", o.dims())));
    }
    let denominators = weyl_denominators(d, nu)?;
    let ratios: Vec<C64> = (0..d * d)
        .map(|i| weyl_overlap(d, i / d, i % d, o) / denominators[i])
        .collect();
    let inv_d = C64::new(1.0 / d as f64, 0.0);
    let mut out = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            let mut acc = ZERO;
            for p in 0..d {
                for q in 0..d {
                    let r = ratios[outcome_index(d, p, q)];
                    if r != ZERO {
                        acc += r * omega(d, (m * q) as i64 - (n * p) as i64);
                    }
                }
            }
            out.push(acc * inv_d);
        }
    }
    Ok(out)
}

/// Weyl Bell POVM, automatic ancilla and closed-form processing.
pub fn weyl_detector(d: usize) -> Result<UniversalDetector> {
    weyl_detector_with_ancilla(d, weyl_ancilla(d)?)
}

pub fn weyl_detector_with_ancilla(d: usize, ancilla: State) -> Result<UniversalDetector> {
    UniversalDetector::new(
        Measurement::Finite(weyl_bell_povm(d)?),
        ancilla,
        Processing::WeylClosedForm { d },
    )
}
