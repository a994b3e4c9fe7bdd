//! Performance models for all-photonic quantum repeaters whose repeater graph
//! states carry tree-encoded inner and link qubits.
//!
//! The crate works purely with measurement-outcome probabilities under photon
//! loss:
//!
//! * [`tree_code`]: indirect-Z, logical-Z and logical-X success probabilities
//!   of regular tree codes.
//! * [`bsm`]: closed-form adaptive logical Bell-state measurement and optical
//!   mode accounting.
//! * [`oracle`]: Monte Carlo and exact enumeration of the adaptive, static and
//!   dynamic logical BSM procedures, used as ground truth.
//! * [`chain`]: repeater-chain loss model, rate equations, envelopes over the
//!   repeater count and exponential fits.
//! * [`optimizer`]: exhaustive search over tree shapes and multiplexing under
//!   qubit budgets.

pub mod bsm;
pub mod chain;
mod error;
pub mod optimizer;
pub mod oracle;
pub mod tree_code;

pub use bsm::{AdaptiveVariant, BsmStrategy};
pub use chain::{ChainConfig, RatePoint};
pub use error::{Error, Result};
pub use oracle::{Estimate, OracleSettings};
pub use tree_code::{BranchingVector, LossProfile};
