//! Universal quantum detectors.
//!
//! A universal detector is a fixed joint POVM on `H ⊗ K` together with an
//! ancilla state `ν` on `K` such that, for every operator `O` on `H`,
//! `Tr[ρ O] = Σ_i f_i(ν, O) Tr[(ρ ⊗ ν) Π_i]` for classical weights `f_i`.
//! The crate builds such detectors, checks the identity exactly and
//! simulates the measurement by Monte Carlo.

pub mod detectors;
pub mod error;
pub mod estimation;
pub mod frames;
pub mod operator;
pub mod povm;

pub use detectors::DetectorSpec;
pub use error::{Error, Result};
pub use estimation::{estimate, EstimationReport};
pub use operator::{Operator, State, C64};
pub use povm::{Measurement, Povm, Processing, UniversalDetector};
