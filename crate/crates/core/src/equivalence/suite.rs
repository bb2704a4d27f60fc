//! Randomized cross-engine harness: runs both engines exhaustively on
//! seeded random circuits and compares count distributions and
//! post-measurement states.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::Circuit;
use crate::equivalence::mapping::fq_to_fock;
use crate::error::Result;
use crate::exec::{run_exhaustive, run_exhaustive_observed, BranchOutcome, DetectorRecord};
use crate::firstq::FirstQBackend;
use crate::fock::{FockBackend, FockVector};
use crate::random::{random_circuit, CircuitShape};

/// Total-variation bound on count distributions.
pub const DISTRIBUTION_THRESHOLD: f64 = 1e-9;
/// Bound on per-branch state distance after phase alignment.
pub const STATE_THRESHOLD: f64 = 1e-9;
/// Bound on the alive-particle transposition defect.
pub const SYMMETRY_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub max_modes: usize,
    pub max_photons: usize,
    pub max_detectors: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 100,
            max_modes: 5,
            max_photons: 3,
            max_detectors: 2,
            seed: 42,
        }
    }
}

/// Leaves of an exhaustive run, expressed in the occupation basis.
#[derive(Clone, Debug)]
pub struct MappedRun {
    pub leaves: Vec<BranchOutcome<FockVector>>,
    /// Worst alive-particle symmetry defect seen along the run (zero for
    /// engines without particle labels).
    pub symmetry_defect: f64,
}

/// Something that can run a circuit exhaustively and report its leaves in
/// the occupation basis.
pub trait Engine: Sync {
    fn name(&self) -> &str;
    fn run_mapped(&self, circuit: &Circuit) -> Result<MappedRun>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FockEngine;

impl Engine for FockEngine {
    fn name(&self) -> &str {
        "fock"
    }

    fn run_mapped(&self, circuit: &Circuit) -> Result<MappedRun> {
        Ok(MappedRun {
            leaves: run_exhaustive(&FockBackend, circuit)?,
            symmetry_defect: 0.0,
        })
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FirstQEngine;

impl Engine for FirstQEngine {
    fn name(&self) -> &str {
        "firstq"
    }

    fn run_mapped(&self, circuit: &Circuit) -> Result<MappedRun> {
        let mut worst = 0.0f64;
        let leaves = run_exhaustive_observed(&FirstQBackend, circuit, |s| {
            worst = worst.max(s.symmetry_defect());
        })?;
        let leaves = leaves
            .into_iter()
            .map(|leaf| {
                Ok(BranchOutcome {
                    record: leaf.record,
                    probability: leaf.probability,
                    state: fq_to_fock(&leaf.state)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MappedRun {
            leaves,
            symmetry_defect: worst,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub circuit: Circuit,
    /// Branch with the largest state distance, when one was compared.
    pub branch: Option<DetectorRecord>,
    pub distribution_distance: f64,
    pub state_distance: f64,
    pub symmetry_defect: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub config: SuiteConfig,
    pub circuits_tested: usize,
    pub max_distribution_distance: f64,
    pub max_state_distance: f64,
    pub max_symmetry_defect: f64,
    pub failures: Vec<TrialFailure>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Distances between two mapped runs of the same circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub distribution_distance: f64,
    pub state_distance: f64,
    pub worst_branch: Option<DetectorRecord>,
}

/// Total variation over count records, and the largest phase-aligned state
/// distance over records both runs reach.
pub fn compare_runs(a: &MappedRun, b: &MappedRun) -> Comparison {
    let mut probabilities: BTreeMap<&DetectorRecord, (f64, f64)> = BTreeMap::new();
    for leaf in &a.leaves {
        probabilities.entry(&leaf.record).or_default().0 += leaf.probability;
    }
    for leaf in &b.leaves {
        probabilities.entry(&leaf.record).or_default().1 += leaf.probability;
    }
    let distribution_distance = 0.5
        * probabilities
            .values()
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>();

    let mut state_distance = 0.0f64;
    let mut worst_branch = None;
    for leaf in &a.leaves {
        if let Some(other) = b.leaves.iter().find(|l| l.record == leaf.record) {
            let d = leaf.state.phase_aligned_distance(&other.state);
            if worst_branch.is_none() || d > state_distance {
                state_distance = d;
                worst_branch = Some(leaf.record.clone());
            }
        }
    }
    Comparison {
        distribution_distance,
        state_distance,
        worst_branch,
    }
}

pub fn run_equivalence_suite(config: SuiteConfig) -> EquivalenceReport {
    run_equivalence_suite_with(config, &FockEngine, &FirstQEngine)
}

struct TrialResult {
    distribution_distance: f64,
    state_distance: f64,
    symmetry_defect: f64,
    failure: Option<TrialFailure>,
}

/// Each trial draws its circuit from its own stream of the seeded generator,
/// so results do not depend on scheduling.
pub fn run_equivalence_suite_with(
    config: SuiteConfig,
    reference: &dyn Engine,
    candidate: &dyn Engine,
) -> EquivalenceReport {
    let shape = CircuitShape {
        max_modes: config.max_modes,
        max_photons: config.max_photons,
        max_detectors: config.max_detectors,
    };
    let results: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(trial as u64);
            let circuit = random_circuit(shape, &mut rng);
            run_trial(trial, circuit, reference, candidate)
        })
        .collect();

    let mut report = EquivalenceReport {
        config,
        circuits_tested: results.len(),
        max_distribution_distance: 0.0,
        max_state_distance: 0.0,
        max_symmetry_defect: 0.0,
        failures: Vec::new(),
    };
    for r in results {
        report.max_distribution_distance = report
            .max_distribution_distance
            .max(r.distribution_distance);
        report.max_state_distance = report.max_state_distance.max(r.state_distance);
        report.max_symmetry_defect = report.max_symmetry_defect.max(r.symmetry_defect);
        report.failures.extend(r.failure);
    }
    report
}

fn run_trial(
    trial: usize,
    circuit: Circuit,
    reference: &dyn Engine,
    candidate: &dyn Engine,
) -> TrialResult {
    let runs = reference
        .run_mapped(&circuit)
        .and_then(|a| candidate.run_mapped(&circuit).map(|b| (a, b)));
    let (a, b) = match runs {
        Ok(pair) => pair,
        Err(e) => {
            return TrialResult {
                distribution_distance: f64::INFINITY,
                state_distance: f64::INFINITY,
                symmetry_defect: 0.0,
                failure: Some(TrialFailure {
                    trial,
                    circuit,
                    branch: None,
                    distribution_distance: f64::INFINITY,
                    state_distance: f64::INFINITY,
                    symmetry_defect: 0.0,
                    error: Some(e.to_string()),
                }),
            }
        }
    };
    let cmp = compare_runs(&a, &b);
    let symmetry_defect = a.symmetry_defect.max(b.symmetry_defect);
    let failed = !(cmp.distribution_distance < DISTRIBUTION_THRESHOLD
        && cmp.state_distance < STATE_THRESHOLD
        && symmetry_defect < SYMMETRY_THRESHOLD);
    TrialResult {
        distribution_distance: cmp.distribution_distance,
        state_distance: cmp.state_distance,
        symmetry_defect,
        failure: failed.then_some(TrialFailure {
            trial,
            circuit,
            branch: cmp.worst_branch,
            distribution_distance: cmp.distribution_distance,
            state_distance: cmp.state_distance,
            symmetry_defect,
            error: None,
        }),
    }
}
