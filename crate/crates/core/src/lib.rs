//! Recurrent subspaces of linear operators at finite truncation.
//!
//! The crate is organised bottom-up: [`seqspace`] holds truncated vectors and
//! norms, [`operators`] the operator algebra (shifts, C-type operators,
//! complexification), [`dynamics`] orbit scans, [`subspace`] the basic-sequence
//! constructions, [`spectra`] the analytic spectral facts and σ_min grids, and
//! [`harness`] the configuration-driven scenarios behind the `rlab` binary.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod operators;
pub mod report;
pub mod seqspace;
pub mod spectra;
pub mod subspace;

pub use error::{DynamicsError, HarnessError, OperatorError, SeqError, SpectraError, SubspaceError};
pub use operators::{CTypeData, CTypeParams, CTypePreset, OperatorSpec};
pub use seqspace::{FieldMode, NormMode, PairVec, TruncVec};
