//! Experiment configuration: a JSON document, optionally overridden by
//! command-line flags, resolved against a detector into concrete inputs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use unidet::detectors::su2::{SpinSystem, Su2Grid};
use unidet::detectors::weyl::weyl_unitary;
use unidet::operator::{random_density, Operator};
use unidet::{DetectorSpec, State, C64};

use crate::error::CliError;

/// Which report files to write.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

/// Raw configuration as written by the user. Every field may also come
/// from a flag; requirements are checked per command.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Detector identifier such as `"weyl:d=3"`.
    pub detector: Option<String>,
    /// `"auto"`, `"mixed"` or an explicit operator record.
    pub ancilla: Option<Value>,
    /// `"random:rank=r:seed=s"`, `"basis:k"`, `"mixed"` or an operator record.
    pub state: Option<Value>,
    /// `"weyl:p,q"`, `"pauli:X"`, `"projector:k"`, `"spin:z"`, `"identity"`
    /// or an operator record.
    pub observable: Option<Value>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub schedule: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    /// Quadrature grid for SU(2) detectors, e.g. `"40x20x20"`.
    pub grid: Option<String>,
    pub timing: Option<bool>,
    /// Random cases checked by `validate`.
    pub cases: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = if path == Path::new("-") {
            std::io::read_to_string(std::io::stdin())
        } else {
            std::fs::read_to_string(path)
        }
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The detector with the configured grid applied.
    pub fn detector_spec(&self) -> Result<DetectorSpec, CliError> {
        let id = self
            .detector
            .as_deref()
            .ok_or_else(|| CliError::Config("missing 'detector' (e.g. \"weyl:d=3\")".into()))?;
        let spec: DetectorSpec = id.parse().map_err(|e| CliError::Config(format!("detector: {e}")))?;
        match &self.grid {
            Some(g) => {
                let grid: Su2Grid = g.parse().map_err(|e| CliError::Config(format!("grid: {e}")))?;
                if !matches!(spec, DetectorSpec::Su2 { .. }) {
                    return Err(CliError::Config(format!(
                        "grid only applies to su2 detectors, not '{id}'"
                    )));
                }
                Ok(spec.with_grid(grid))
            }
            None => Ok(spec),
        }
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config("missing 'seed'; every run must name its seed".into()))
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        match self.n {
            Some(n) if n >= 2 => Ok(n),
            Some(n) => Err(CliError::Config(format!("n must be at least 2, got {n}"))),
            None => Err(CliError::Config("missing 'n'".into())),
        }
    }

    /// `None` means the detector's default.
    pub fn ancilla(&self, spec: &DetectorSpec) -> Result<Option<State>, CliError> {
        let k = spec.ancilla_dim();
        match &self.ancilla {
            None => Ok(None),
            Some(Value::String(s)) if s == "auto" => Ok(None),
            Some(Value::String(s)) if s == "mixed" => Ok(Some(State::maximally_mixed(k))),
            Some(Value::String(s)) => Err(CliError::Config(format!(
                "ancilla: expected \"auto\", \"mixed\" or an operator record, got \"{s}\""
            ))),
            Some(v) => {
                let state = explicit_state(v, "ancilla")?;
                if state.dim() != k {
                    return Err(CliError::Config(format!(
                        "ancilla: dimension {} does not match the detector's ancilla dimension {k}",
                        state.dim()
                    )));
                }
                Ok(Some(state))
            }
        }
    }

    pub fn state(&self, d: usize) -> Result<Named<State>, CliError> {
        let v = self
            .state
            .as_ref()
            .ok_or_else(|| CliError::Config("missing 'state' (e.g. \"random:rank=1:seed=7\")".into()))?;
        match v {
            Value::String(s) => Ok(Named {
                label: s.clone(),
                value: named_state(s, d).map_err(|m| CliError::Config(format!("state: {m}")))?,
            }),
            other => {
                let state = explicit_state(other, "state")?;
                if state.dim() != d {
                    return Err(CliError::Config(format!(
                        "state: dimension {} but detector acts on {d}",
                        state.dim()
                    )));
                }
                Ok(Named {
                    label: "explicit".into(),
                    value: state,
                })
            }
        }
    }

    pub fn observable(&self, d: usize) -> Result<Named<Operator>, CliError> {
        let v = self
            .observable
            .as_ref()
            .ok_or_else(|| CliError::Config("missing 'observable' (e.g. \"pauli:Z\")".into()))?;
        match v {
            Value::String(s) => Ok(Named {
                label: s.clone(),
                value: named_observable(s, d).map_err(|m| CliError::Config(format!("observable: {m}")))?,
            }),
            other => {
                let op: Operator =
                    serde_json::from_value(other.clone()).map_err(|e| CliError::Config(format!("observable: {e}")))?;
                if op.dims() != (d, d) {
                    return Err(CliError::Config(format!(
                        "observable: dims {:?} but detector acts on {d}",
                        op.dims()
                    )));
                }
                Ok(Named {
                    label: "explicit".into(),
                    value: op,
                })
            }
        }
    }

    pub fn schedule(&self) -> Result<Vec<usize>, CliError> {
        let s = match (&self.schedule, self.n) {
            (Some(s), _) => s.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => return Err(CliError::Config("missing 'schedule' (or 'n')".into())),
        };
        if s.is_empty() || s[0] < 2 || s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config(format!(
                "schedule must be strictly increasing with entries ≥ 2, got {s:?}"
            )));
        }
        Ok(s)
    }
}

/// A resolved input and the text that named it.
#[derive(Clone, Debug)]
pub struct Named<T> {
    pub label: String,
    pub value: T,
}

impl<T> fmt::Display for Named<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn explicit_state(v: &Value, field: &str) -> Result<State, CliError> {
    let op: Operator = serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("{field}: {e}")))?;
    State::new(op).map_err(|e| CliError::Config(format!("{field}: {e}")))
}

fn parse_index(s: &str, d: usize, what: &str) -> Result<usize, String> {
    let k = usize::from_str(s.trim()).map_err(|_| format!("bad {what} '{s}'"))?;
    if k >= d {
        return Err(format!("{what} {k} out of range for dimension {d}"));
    }
    Ok(k)
}

/// `key=value` pairs after the first `:`.
fn params<'a>(rest: &'a str, allowed: &[&str]) -> Result<Vec<(&'a str, &'a str)>, String> {
    rest.split(':')
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got '{p}'"))?;
            if !allowed.contains(&k) {
                return Err(format!("unknown key '{k}' (expected one of {allowed:?})"));
            }
            Ok((k, v))
        })
        .collect()
}

pub fn named_state(s: &str, d: usize) -> Result<State, String> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "mixed" if rest.is_empty() => Ok(State::maximally_mixed(d)),
        "basis" => {
            let k = parse_index(rest, d, "basis index")?;
            State::pure(&Operator::basis_ket(d, k)).map_err(|e| e.to_string())
        }
        "random" => {
            let mut rank = None;
            let mut seed = None;
            for (k, v) in params(rest, &["rank", "seed"])? {
                let x: u64 = v.parse().map_err(|_| format!("bad {k} '{v}'"))?;
                if k == "rank" {
                    rank = Some(x as usize);
                } else {
                    seed = Some(x);
                }
            }
            let rank = rank.unwrap_or(d);
            let seed = seed.ok_or("random state needs an explicit seed, e.g. random:rank=1:seed=7")?;
            if rank == 0 || rank > d {
                return Err(format!("rank must be in 1..={d}, got {rank}"));
            }
            random_density(d, rank, seed).map_err(|e| e.to_string())
        }
        _ => Err(format!(
            "unknown state '{s}' (expected random:rank=r:seed=s, basis:k, mixed or an operator record)"
        )),
    }
}

pub fn named_observable(s: &str, d: usize) -> Result<Operator, String> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let c = |re: f64, im: f64| C64::new(re, im);
    match kind {
        "identity" if rest.is_empty() => Ok(Operator::identity(d)),
        "pauli" => {
            if d != 2 {
                return Err(format!("Pauli observables need d = 2, got {d}"));
            }
            let rows = match rest {
                "X" | "x" => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
                "Y" | "y" => vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
                "Z" | "z" => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
                "I" | "i" => return Ok(Operator::identity(2)),
                other => return Err(format!("unknown Pauli '{other}'")),
            };
            Operator::from_rows(&rows).map_err(|e| e.to_string())
        }
        "weyl" => {
            let (p, q) = rest.split_once(',').ok_or_else(|| format!("expected weyl:p,q, got '{s}'"))?;
            let (p, q) = (parse_index(p, d, "index")?, parse_index(q, d, "index")?);
            weyl_unitary(d, p, q).map_err(|e| e.to_string())
        }
        "projector" => {
            let k = parse_index(rest, d, "basis index")?;
            Ok(Operator::projector(&Operator::basis_ket(d, k)))
        }
        "spin" => {
            let sys = SpinSystem::new(d - 1);
            match rest {
                "x" => Ok(sys.jx().clone()),
                "y" => Ok(sys.jy().clone()),
                "z" => Ok(sys.jz().clone()),
                other => Err(format!("unknown spin component '{other}' (expected x, y or z)")),
            }
        }
        _ => Err(format!(
            "unknown observable '{s}' (expected weyl:p,q, pauli:X|Y|Z, projector:k, spin:x|y|z, identity or an operator record)"
        )),
    }
}
