//! Remote information concentration (RIC) for d-level systems.
//!
//! The crate builds the entangled channels used to concentrate the
//! information of a 1→2 telecloning state back into a single remote qudit
//! and runs the Bell-measurement protocol branch by branch. Separate checks
//! cover the entanglement structure of those channels.
//!
//! Amplitudes are indexed big-endian in base `d` over an ordered list of
//! labelled subsystems: the first label is the most significant digit.
//!
//! Module map:
//!
//! * [`tensor`]: dense states and operators over labelled registers.
//! * [`weyl`]: Weyl–Heisenberg operators and the generalized Bell basis.
//! * [`telecloning`]: the 1→2 universal telecloning channel and clone state.
//! * [`channels`]: the channel families with their purifications and stabilizers.
//! * [`protocol`]: the LOCC engine for concentration and unlocking.
//! * [`analysis`]: partial-transpose reports and Schmidt-rank witnesses.
//! * [`experiment`]: run configuration and reports, including the verification ledger.

pub mod analysis;
pub mod channels;
pub mod error;
pub mod experiment;
pub mod par;
pub mod protocol;
pub mod rng;
pub mod telecloning;
pub mod tensor;
pub mod weyl;

pub use error::{Result, RicError};
pub use num_complex::Complex64 as C64;

/// Largest dimension the dense engine accepts.
pub const MAX_DIM: usize = 7;

/// Branches with probability at or below this cutoff are reported as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-14;
