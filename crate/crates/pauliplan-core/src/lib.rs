//! Measurement planning for Pauli-observable energy estimation.
//!
//! The pipeline: parse a Hamiltonian as a weighted sum of Pauli strings,
//! group the terms into overlapping qubit-wise-commuting measurement groups,
//! split a fixed shot budget across groups by minimizing a confidence bound
//! over the weight simplex, sample Pauli-basis measurements of an exactly
//! computed state, and turn the records into mean / median-of-means energy
//! estimates.

pub mod allocation;
pub mod estimation;
pub mod grouping;
pub mod hamiltonian;
pub mod pauli;
pub mod pipeline;
pub mod simulator;

pub use allocation::{Allocation, BoundKind, BoundSpec, OverlapWeightRule, SolverOptions};
pub use estimation::{EnergyEstimate, EstimatorKind, KRule, MomConfig, OperatorSamples};
pub use grouping::{maxmin_grouping, GroupSet, QwcGraph};
pub use hamiltonian::{parse_hamiltonian, toy_model, Hamiltonian};
pub use pauli::{Axis, PauliString};
pub use simulator::{ground_state, MeasurementRecord, StateVector};
