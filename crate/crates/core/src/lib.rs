//! Resource estimation for first-quantized block encodings of plane-wave
//! Hamiltonians with GTH pseudopotentials.
//!
//! The crate computes λ normalizations, nested-box state-preparation
//! amplitudes, lookup-table interpolation of e^{−z}, and itemized Toffoli
//! costs for bundled or user-supplied crystal cells.

// Negated comparisons such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod costmodel;
pub mod data;
pub mod error;
pub mod golden;
pub mod interpolation;
pub mod lambda;
pub mod lattice;
pub mod nested_boxes;
pub mod pseudopotential;
pub mod sum;
pub mod system;

pub use costmodel::{block_encoding_total, ArithCase, ArithKind, CostReport, LedgerEntry, QpeEstimate};
pub use error::{Error, Result};
pub use lambda::{lambda_report, AlephConfig, AlephForm, AlephStrategy, LambdaOptions, LambdaReport, LocVariant, NonlocVariant};
pub use interpolation::{InterpSpec, InterpTable, Order};
pub use lattice::{Miller, MillerGrid, ReciprocalGeometry, Region, SimulationCell};
pub use nested_boxes::{BoxCount, BoxScheme, PrepWeights};
pub use pseudopotential::GthSpecies;
pub use system::{SpeciesCount, SystemSpec};
