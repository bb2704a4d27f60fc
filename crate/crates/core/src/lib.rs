//! Linear-optical circuit simulation in two representations.
//!
//! * [`fock`] evolves sparse occupation-number states: identical photons in
//!   shared modes.
//! * [`firstq`] evolves a dense tensor over labelled particles that start in
//!   the totally symmetrized ("permanent") state, each running through its
//!   own copy of the interferometer. Detectors of the copies are wired
//!   together and conditional phase shifters fire in every copy.
//! * [`equivalence`] maps between the two, computes permanents, and checks on
//!   random circuits that both engines produce the same detector statistics
//!   and the same post-measurement states.
//!
//! Circuits are described by [`circuit::Circuit`] and executed by the shared
//! scheduler in [`exec`].

pub mod circuit;
pub mod equivalence;
pub mod error;
pub mod exec;
pub mod firstq;
pub mod fock;
pub mod presets;
pub mod random;
pub mod report;

pub use circuit::{
    beamsplitter_unitary, compile_segment, split_at_detectors, validate, Circuit, Element,
    ModeIndex, ModeUnitary, Schedule, Trigger, ValidationReport, Violation,
};
pub use error::{Error, Result};
pub use exec::{Backend, Branch, BranchOutcome, DetectorRecord, RunMode, RunOutput, SampleCounts};
pub use firstq::{FirstQBackend, FirstQState, SymmetrizedAssignment};
pub use fock::{FockBackend, FockBasisState, FockVector};

pub use num_complex::Complex64;
