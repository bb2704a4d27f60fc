//! The bridge between the two engines: permanents, the occupation-number to
//! symmetric-tensor maps, and the randomized cross-engine harness.

pub mod mapping;
pub mod permanent;
pub mod suite;

pub use mapping::{fock_to_fq, fq_to_fock, transition_amplitude_oracle, SYMMETRY_TOLERANCE};
pub use permanent::{permanent_naive, permanent_ryser, ComplexMatrix};
pub use suite::{
    compare_runs, run_equivalence_suite, run_equivalence_suite_with, Comparison, Engine,
    EquivalenceReport, FirstQEngine, FockEngine, MappedRun, SuiteConfig, TrialFailure,
    DISTRIBUTION_THRESHOLD, STATE_THRESHOLD, SYMMETRY_THRESHOLD,
};
