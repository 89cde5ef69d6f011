//! Concrete universal detectors and a string registry for them
//! (`"weyl:d=3"`, `"sud:d=2"`, `"su2:j=1/2"`, `"locc:d=2"`).

pub mod locc;
pub mod su2;
pub mod sud;
pub mod weyl;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Operator, State};
use crate::povm::{Measurement, UniversalDetector};

use su2::{SpinSystem, Su2Grid};

/// Parsed detector identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DetectorSpec {
    Weyl { d: usize },
    Sud { d: usize },
    Su2 { two_j: usize, grid: Su2Grid },
    Locc { d: usize },
}

impl DetectorSpec {
    pub fn family(&self) -> &'static str {
        match self {
            DetectorSpec::Weyl { .. } => "weyl",
            DetectorSpec::Sud { .. } => "sud",
            DetectorSpec::Su2 { .. } => "su2",
            DetectorSpec::Locc { .. } => "locc",
        }
    }

    /// System dimension `dim H`.
    pub fn dim(&self) -> usize {
        match *self {
            DetectorSpec::Weyl { d } | DetectorSpec::Sud { d } | DetectorSpec::Locc { d } => d,
            DetectorSpec::Su2 { two_j, .. } => two_j + 1,
        }
    }

    /// Ancilla dimension `dim K`.
    pub fn ancilla_dim(&self) -> usize {
        match *self {
            DetectorSpec::Locc { d } => d * d,
            _ => self.dim(),
        }
    }

    pub fn with_grid(self, grid: Su2Grid) -> Self {
        match self {
            DetectorSpec::Su2 { two_j, .. } => DetectorSpec::Su2 { two_j, grid },
            other => other,
        }
    }

    pub fn default_ancilla(&self) -> Result<State> {
        match *self {
            DetectorSpec::Weyl { d } => weyl::weyl_ancilla(d),
            DetectorSpec::Sud { d } => State::pure(&Operator::basis_ket(d, 0)),
            DetectorSpec::Su2 { two_j, .. } => Ok(su2::su2_default_ancilla(&SpinSystem::new(two_j))),
            DetectorSpec::Locc { d } => Ok(State::maximally_mixed(d * d)),
        }
    }

    /// The joint measurement alone, without an ancilla or processing rule.
    pub fn measurement(&self) -> Result<Measurement> {
        Ok(match *self {
            DetectorSpec::Weyl { d } => Measurement::Finite(weyl::weyl_bell_povm(d)?),
            DetectorSpec::Sud { d } => Measurement::Continuous(sud::ContinuousBellPovm::special_unitary(d)?),
            DetectorSpec::Su2 { two_j, grid } => Measurement::Bell(su2::su2_grid_povm(&SpinSystem::new(two_j), &grid)?),
            DetectorSpec::Locc { d } => Measurement::Finite(locc::locc_povm(d)?.povm().clone()),
        })
    }

    /// Builds the detector, with `ancilla` replacing the default when given.
    pub fn build(&self, ancilla: Option<State>) -> Result<UniversalDetector> {
        let nu = match ancilla {
            Some(nu) => nu,
            None => self.default_ancilla()?,
        };
        match *self {
            DetectorSpec::Weyl { d } => weyl::weyl_detector_with_ancilla(d, nu),
            DetectorSpec::Sud { d } => {
                if nu.dim() != d {
                    return Err(crate::error::mismatch(format!("ancilla of dim {d}"), nu.dim()));
                }
                // The ξ dual needs νᵀ = |φ⟩⟨φ| pure; ψ is any vector orthogonal to φ.
                let (phi, psi) = sud_vectors(&nu)?;
                sud::sud_detector_with(&phi, &psi)
            }
            DetectorSpec::Su2 { two_j, grid } => su2::su2_detector_with(&SpinSystem::new(two_j), &grid, nu),
            DetectorSpec::Locc { d } => locc::locc_detector_with(d, nu),
        }
    }
}

/// `φ` with `νᵀ = |φ⟩⟨φ|` and a unit `ψ ⟂ φ`.
fn sud_vectors(nu: &State) -> Result<(nalgebra::DVector<crate::C64>, nalgebra::DVector<crate::C64>)> {
    let eig = crate::operator::hermitian_eig(&nu.op().transpose())?;
    if (eig.values[0] - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "SU(d) ancilla must be pure (largest eigenvalue {})",
            eig.values[0]
        )));
    }
    Ok((eig.vector(0), eig.vector(1)))
}

fn parse_dim(key: &str, value: &str) -> Result<usize> {
    if key != "d" {
        return Err(Error::InvalidParameter(format!(
            "expected 'd=<dimension>', got '{key}={value}'"
        )));
    }
    let d: usize = value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad dimension '{value}'")))?;
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    Ok(d)
}

/// `"1"`, `"3/2"` or `"1.5"` as `2j`.
fn parse_spin(value: &str) -> Result<usize> {
    let bad = || Error::InvalidParameter(format!("bad spin '{value}'"));
    let two_j = match value.split_once('/') {
        Some((num, "2")) => num.parse::<usize>().map_err(|_| bad())?,
        Some(_) => return Err(bad()),
        None => {
            let j: f64 = value.parse().map_err(|_| bad())?;
            SpinSystem::from_j(j)?.two_j()
        }
    };
    if two_j == 0 {
        return Err(bad());
    }
    Ok(two_j)
}

impl FromStr for DetectorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let family = parts.next().unwrap_or_default();
        let params: Vec<(&str, &str)> = parts
            .map(|p| {
                p.split_once('=')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| Error::InvalidParameter(format!("expected key=value in '{s}', got '{p}'")))
            })
            .collect::<Result<_>>()?;
        let single = |expected: usize| {
            if params.len() != expected {
                Err(Error::InvalidParameter(format!(
                    "unexpected parameters in detector '{s}'"
                )))
            } else {
                Ok(())
            }
        };
        match family {
            "weyl" | "sud" | "locc" => {
                single(1)?;
                let d = parse_dim(params[0].0, params[0].1)?;
                Ok(match family {
                    "weyl" => DetectorSpec::Weyl { d },
                    "sud" => DetectorSpec::Sud { d },
                    _ => DetectorSpec::Locc { d },
                })
            }
            "su2" => {
                let mut two_j = None;
                let mut grid = Su2Grid::default();
                for (k, v) in &params {
                    match *k {
                        "j" if two_j.is_none() => two_j = Some(parse_spin(v)?),
                        "grid" => grid = v.parse()?,
                        _ => return Err(Error::InvalidParameter(format!("unexpected parameter '{k}' in '{s}'"))),
                    }
                }
                let two_j = two_j.ok_or_else(|| Error::InvalidParameter(format!("missing j in '{s}'")))?;
                Ok(DetectorSpec::Su2 { two_j, grid })
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown detector '{other}' (expected weyl, sud, su2 or locc)"
            ))),
        }
    }
}

impl fmt::Display for DetectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectorSpec::Weyl { d } => write!(f, "weyl:d={d}"),
            DetectorSpec::Sud { d } => write!(f, "sud:d={d}"),
            DetectorSpec::Locc { d } => write!(f, "locc:d={d}"),
            DetectorSpec::Su2 { two_j, grid } => {
                if two_j % 2 == 0 {
                    write!(f, "su2:j={}", two_j / 2)?;
                } else {
                    write!(f, "su2:j={two_j}/2")?;
                }
                if *grid != Su2Grid::default() {
                    write!(f, ":grid={grid}")?;
                }
                Ok(())
            }
        }
    }
}

impl TryFrom<String> for DetectorSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DetectorSpec> for String {
    fn from(d: DetectorSpec) -> String {
        d.to_string()
    }
}
