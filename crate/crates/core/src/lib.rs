//! Construction, bounds and Monte Carlo simulation of quantum polar codes on
//! erasure, depolarizing and BB84 channels.
//!
//! A quantum polar code is built from two classical polar codes, one for the
//! amplitude channel and one for the phase channel induced by the quantum
//! channel. The phase code's indices run in reverse, and the quantum
//! information set is where both codes are good.

pub mod bounds;
pub mod channel;
pub mod construction;
pub mod decoder;
mod error;
pub mod exec;
pub mod montecarlo;
pub mod numeric;
pub mod polar;
pub mod rng;
pub mod stats;

pub use channel::{BinaryInputDMC, ChannelKind, ChannelSample, QuantumChannelSpec};
pub use construction::{CodeDesign, IndexSet, QuantumPolarCode, ReliabilityProfile};
pub use decoder::{DecodeOrder, DecodeResult, FrozenMap};
pub use error::{Error, Result};
pub use exec::Execution;
pub use montecarlo::{Branch, SimResult, TrialPlan};
pub use polar::{BitWord, IndexPermutation};
