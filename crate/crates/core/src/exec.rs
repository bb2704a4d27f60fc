//! Engine-independent execution of a [`Circuit`]: unitary segments, detector
//! layers and per-branch resolution of conditional phase shifters.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::circuit::{
    compile_segment, split_at_detectors, validate, Circuit, ConditionalPhaseShifter, Element,
    ModeIndex, ModeUnitary,
};
use crate::error::{Error, Result};

/// Detector counts in measurement order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectorRecord(Vec<(String, u32)>);

impl DetectorRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &str) -> Option<u32> {
        self.0.iter().find(|(d, _)| d == id).map(|&(_, k)| k)
    }

    pub fn with(&self, id: &str, count: u32) -> Self {
        let mut next = self.clone();
        next.0.push((id.to_owned(), count));
        next
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(d, k)| (d.as_str(), *k))
    }

    pub fn counts(&self) -> Vec<u32> {
        self.0.iter().map(|&(_, k)| k).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, u32)> for DetectorRecord {
    fn from_iter<I: IntoIterator<Item = (String, u32)>>(iter: I) -> Self {
        DetectorRecord(iter.into_iter().collect())
    }
}

impl Serialize for DetectorRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (id, k) in &self.0 {
            map.serialize_entry(id, k)?;
        }
        map.end()
    }
}

/// One outcome of a single detector.
#[derive(Clone, Debug)]
pub struct Branch<S> {
    pub count: u32,
    pub probability: f64,
    pub state: S,
}

/// A leaf of the measurement tree.
#[derive(Clone, Debug)]
pub struct BranchOutcome<S> {
    pub record: DetectorRecord,
    pub probability: f64,
    pub state: S,
}

/// The per-engine primitives the scheduler needs.
pub trait Backend {
    type State: Clone;

    fn prepare(&self, circuit: &Circuit) -> Result<Self::State>;

    fn apply_unitary(&self, state: &Self::State, u: &ModeUnitary) -> Result<Self::State>;

    /// Branches in increasing count order, zero-probability branches dropped.
    fn detect(&self, state: &Self::State, mode: ModeIndex) -> Result<Vec<Branch<Self::State>>>;

    fn conditional_phase(
        &self,
        state: &Self::State,
        element: &ConditionalPhaseShifter,
        record: &DetectorRecord,
    ) -> Result<Self::State>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Exhaustive,
    Sampled { seed: u64, shots: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleCounts {
    pub seed: u64,
    pub shots: u64,
    /// Sorted by record.
    pub counts: Vec<(DetectorRecord, u64)>,
}

impl SampleCounts {
    pub fn frequency(&self, counts: &[u32]) -> f64 {
        let hits: u64 = self
            .counts
            .iter()
            .filter(|(r, _)| r.counts() == counts)
            .map(|&(_, n)| n)
            .sum();
        hits as f64 / self.shots as f64
    }
}

#[derive(Clone, Debug)]
pub enum RunOutput<S> {
    Branches(Vec<BranchOutcome<S>>),
    Counts(SampleCounts),
}

pub fn run<B: Backend>(
    backend: &B,
    circuit: &Circuit,
    mode: RunMode,
) -> Result<RunOutput<B::State>> {
    match mode {
        RunMode::Exhaustive => run_exhaustive(backend, circuit).map(RunOutput::Branches),
        RunMode::Sampled { seed, shots } => {
            run_sampled(backend, circuit, seed, shots).map(RunOutput::Counts)
        }
    }
}

pub fn run_exhaustive<B: Backend>(
    backend: &B,
    circuit: &Circuit,
) -> Result<Vec<BranchOutcome<B::State>>> {
    run_exhaustive_observed(backend, circuit, |_| {})
}

/// Like [`run_exhaustive`], calling `observer` on every intermediate state.
pub fn run_exhaustive_observed<B: Backend, F: FnMut(&B::State)>(
    backend: &B,
    circuit: &Circuit,
    mut observer: F,
) -> Result<Vec<BranchOutcome<B::State>>> {
    validate(circuit).into_result()?;
    let schedule = split_at_detectors(circuit);
    let initial = backend.prepare(circuit)?;
    observer(&initial);

    let mut leaves = Vec::new();
    // Depth-first; children pushed in reverse so leaves come out in count order.
    let mut stack = vec![(0usize, DetectorRecord::new(), 1.0f64, initial)];
    while let Some((stage, record, probability, state)) = stack.pop() {
        let state = apply_segment(
            backend,
            &state,
            &schedule.segments[stage],
            circuit.mode_count,
            &record,
            &mut observer,
        )?;
        match schedule.detectors.get(stage) {
            None => leaves.push(BranchOutcome {
                record,
                probability,
                state,
            }),
            Some(detector) => {
                let branches = backend.detect(&state, detector.mode)?;
                for b in branches.into_iter().rev() {
                    observer(&b.state);
                    stack.push((
                        stage + 1,
                        record.with(&detector.id, b.count),
                        probability * b.probability,
                        b.state,
                    ));
                }
            }
        }
    }
    Ok(leaves)
}

/// Draws `shots` trajectories with a seeded generator. Tree nodes are
/// expanded lazily and shared between shots; the segment after the last
/// detector cannot change the counts and is skipped.
pub fn run_sampled<B: Backend>(
    backend: &B,
    circuit: &Circuit,
    seed: u64,
    shots: u64,
) -> Result<SampleCounts> {
    if shots == 0 {
        return Err(Error::NoShots);
    }
    validate(circuit).into_result()?;
    let schedule = split_at_detectors(circuit);
    let initial = backend.prepare(circuit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Keyed by the record prefix that leads to the node.
    let mut expanded: HashMap<DetectorRecord, Vec<(u32, f64, B::State)>> = HashMap::new();
    let mut counts: BTreeMap<DetectorRecord, u64> = BTreeMap::new();

    for _ in 0..shots {
        let mut record = DetectorRecord::new();
        for (stage, detector) in schedule.detectors.iter().enumerate() {
            if !expanded.contains_key(&record) {
                let entry_state = if stage == 0 {
                    initial.clone()
                } else {
                    let parent = expanded
                        .get(&DetectorRecord(record.0[..stage - 1].to_vec()))
                        .expect("parent node expanded");
                    let last = record.0[stage - 1].1;
                    parent.iter().find(|b| b.0 == last).unwrap().2.clone()
                };
                let state = apply_segment(
                    backend,
                    &entry_state,
                    &schedule.segments[stage],
                    circuit.mode_count,
                    &record,
                    &mut |_| {},
                )?;
                let branches = backend
                    .detect(&state, detector.mode)?
                    .into_iter()
                    .map(|b| (b.count, b.probability, b.state))
                    .collect();
                expanded.insert(record.clone(), branches);
            }
            let branches = &expanded[&record];
            let total: f64 = branches.iter().map(|b| b.1).sum();
            let mut u = rng.random::<f64>() * total;
            let mut chosen = branches.last().unwrap().0;
            for b in branches {
                if u < b.1 {
                    chosen = b.0;
                    break;
                }
                u -= b.1;
            }
            record = record.with(&detector.id, chosen);
        }
        *counts.entry(record).or_insert(0) += 1;
    }

    Ok(SampleCounts {
        seed,
        shots,
        counts: counts.into_iter().collect(),
    })
}

/// Applies one detector-free segment, resolving conditional phase shifters
/// against `record`. Consecutive linear elements are compiled together.
fn apply_segment<B: Backend, F: FnMut(&B::State)>(
    backend: &B,
    state: &B::State,
    segment: &[Element],
    mode_count: usize,
    record: &DetectorRecord,
    observer: &mut F,
) -> Result<B::State> {
    let mut current = state.clone();
    let mut pending: Vec<Element> = Vec::new();
    let flush =
        |current: &mut B::State, pending: &mut Vec<Element>, observer: &mut F| -> Result<()> {
            if !pending.is_empty() {
                let u = compile_segment(pending, mode_count)?;
                *current = backend.apply_unitary(current, &u)?;
                observer(current);
                pending.clear();
            }
            Ok(())
        };
    for element in segment {
        match element {
            Element::ConditionalPhaseShifter(c) => {
                flush(&mut current, &mut pending, observer)?;
                current = backend.conditional_phase(&current, c, record)?;
                observer(&current);
            }
            other => pending.push(other.clone()),
        }
    }
    flush(&mut current, &mut pending, observer)?;
    Ok(current)
}
