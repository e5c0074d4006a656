//! Simulation and analysis of a photon-heralded entangling gate between two
//! remote atomic qubits.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: dense states, operators, tensor products and partial traces.
//! * [`protocol`]: atom-photon entanglement, the herald projection and the gate Kraus operator.
//! * [`noise`]: the imperfection model applied to heralded states.
//! * [`measurement`]: basis readout, count records, parities and fidelity estimators.
//! * [`tomography`]: maximum-likelihood state reconstruction and entanglement measures.
//! * [`rates`]: photon collection budget and gate success probability.
//! * [`montecarlo`]: seeded end-to-end experiments.
//! * [`cli`]: config files, report emission and subcommand dispatch.

pub mod cli;
pub mod error;
pub mod measurement;
pub mod montecarlo;
pub mod noise;
pub mod protocol;
pub mod qcore;
pub mod rates;
pub mod tomography;

pub use error::{Error, Result};
pub use measurement::{BasisPair, CountRecord, MeasBasis, ParityEstimate, TargetClass};
pub use montecarlo::{ExperimentConfig, RunReport};
pub use noise::ErrorModel;
pub use protocol::PrepSetting;
pub use qcore::{DensityMatrix, Operator, PureState, Tensor, C64};
pub use rates::RateBudget;
pub use tomography::{MleOptions, ReconstructionResult, TomographyInput};
