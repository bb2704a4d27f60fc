//! First-quantized engine: `n` labelled particles, each carrying its own copy
//! of the `m`-mode interferometer.
//!
//! The wavefunction is a dense tensor of shape `m^n` (particle 0 is the most
//! significant index). The initial state is the normalized total
//! symmetrization of a product state, each particle evolves under the same
//! mode unitary with no interaction, and a detector on mode `j` is one
//! detector per particle copy, wired together so the reported value is the
//! number of copies that fired. An absorbed particle keeps its tensor index,
//! frozen at the mode it was detected in, and is skipped by all later
//! operations.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, ConditionalPhaseShifter, ModeIndex, ModeUnitary};
use crate::error::{Error, Result};
use crate::exec::{self, Backend, Branch, BranchOutcome, DetectorRecord, RunMode, RunOutput};
use crate::fock::BRANCH_TOLERANCE;

/// The single-particle modes that get symmetrized. Entries may repeat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetrizedAssignment(pub Vec<ModeIndex>);

impl SymmetrizedAssignment {
    pub fn new(modes: &[usize]) -> Self {
        SymmetrizedAssignment(modes.iter().copied().map(ModeIndex).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirstQState {
    mode_count: usize,
    /// `Some(mode)` once the particle has been absorbed by a detector on `mode`.
    absorbed: Vec<Option<ModeIndex>>,
    amplitudes: Vec<Complex64>,
}

impl FirstQState {
    /// Wraps a raw `m^n` tensor with every particle alive.
    pub fn from_tensor(
        mode_count: usize,
        particle_count: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let expected = tensor_len(mode_count, particle_count);
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        Ok(FirstQState {
            mode_count,
            absorbed: vec![None; particle_count],
            amplitudes,
        })
    }

    /// Unsymmetrized product `|modes[0]⟩|modes[1]⟩…`.
    pub fn product(mode_count: usize, modes: &[usize]) -> Result<Self> {
        let n = modes.len();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); tensor_len(mode_count, n)];
        for &mode in modes {
            if mode >= mode_count {
                return Err(Error::ModeOutOfRange { mode, mode_count });
            }
        }
        amplitudes[encode(mode_count, modes)] = Complex64::new(1.0, 0.0);
        Ok(FirstQState {
            mode_count,
            absorbed: vec![None; n],
            amplitudes,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn particle_count(&self) -> usize {
        self.absorbed.len()
    }

    pub fn alive(&self) -> Vec<bool> {
        self.absorbed.iter().map(Option::is_none).collect()
    }

    pub fn alive_particles(&self) -> Vec<usize> {
        (0..self.particle_count())
            .filter(|&p| self.absorbed[p].is_none())
            .collect()
    }

    /// Mode an absorbed particle was detected in.
    pub fn absorbed_in(&self, particle: usize) -> Option<ModeIndex> {
        self.absorbed[particle]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude at the multi-index `modes` (one entry per particle).
    pub fn amplitude(&self, modes: &[usize]) -> Complex64 {
        assert_eq!(modes.len(), self.particle_count());
        self.amplitudes[encode(self.mode_count, modes)]
    }

    /// Multi-index of flat position `index`.
    pub fn decode(&self, index: usize) -> Vec<usize> {
        decode(self.mode_count, self.particle_count(), index)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `‖self − other‖₂` over identical tensor shapes.
    pub fn distance(&self, other: &FirstQState) -> f64 {
        assert_eq!(self.amplitudes.len(), other.amplitudes.len());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry change under a transposition of two alive particles.
    pub fn symmetry_defect(&self) -> f64 {
        let alive = self.alive_particles();
        let n = self.particle_count();
        let m = self.mode_count;
        let mut worst = 0.0f64;
        for (i, &p) in alive.iter().enumerate() {
            for &q in &alive[i + 1..] {
                let (sp, sq) = (stride(m, n, p), stride(m, n, q));
                for (index, a) in self.amplitudes.iter().enumerate() {
                    let dp = (index / sp) % m;
                    let dq = (index / sq) % m;
                    if dp >= dq {
                        continue;
                    }
                    let swapped = index - dp * sp - dq * sq + dq * sp + dp * sq;
                    worst = worst.max((a - self.amplitudes[swapped]).norm());
                }
            }
        }
        worst
    }

    /// Schmidt coefficients across the cut `left | rest`, in decreasing
    /// order.
    pub fn schmidt_coefficients(&self, left: &[usize]) -> Vec<f64> {
        let n = self.particle_count();
        let m = self.mode_count;
        let right: Vec<usize> = (0..n).filter(|p| !left.contains(p)).collect();
        let rows = tensor_len(m, left.len());
        let cols = tensor_len(m, right.len());
        let mut mat = DMatrix::<Complex64>::zeros(rows, cols);
        for (index, a) in self.amplitudes.iter().enumerate() {
            let digits = self.decode(index);
            let r = left.iter().fold(0, |acc, &p| acc * m + digits[p]);
            let c = right.iter().fold(0, |acc, &p| acc * m + digits[p]);
            mat[(r, c)] = *a;
        }
        let mut sv: Vec<f64> = mat.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }
}

fn tensor_len(m: usize, n: usize) -> usize {
    m.pow(n as u32)
}

fn stride(m: usize, n: usize, particle: usize) -> usize {
    m.pow((n - 1 - particle) as u32)
}

fn encode(m: usize, digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, &d| acc * m + d)
}

fn decode(m: usize, n: usize, mut index: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in digits.iter_mut().rev() {
        *slot = index % m;
        index /= m;
    }
    digits
}

/// Normalized total symmetrization of `|modes[0]⟩|modes[1]⟩…|modes[n−1]⟩`.
///
/// Every distinct arrangement of the multiset of modes gets amplitude
/// `1/√(n!/Π_j n_j!)`, which equals the permutation sum scaled by
/// `1/√(n!·Π_j n_j!)`.
pub fn permanent_state(
    assignment: &SymmetrizedAssignment,
    mode_count: usize,
) -> Result<FirstQState> {
    let n = assignment.len();
    let mut multiplicity = vec![0usize; mode_count];
    for mode in &assignment.0 {
        if mode.0 >= mode_count {
            return Err(Error::ModeOutOfRange {
                mode: mode.0,
                mode_count,
            });
        }
        multiplicity[mode.0] += 1;
    }
    let mut arrangements = Vec::new();
    let mut current = Vec::with_capacity(n);
    distinct_arrangements(&mut multiplicity, n, &mut current, &mut arrangements);

    let amp = Complex64::new(1.0 / (arrangements.len() as f64).sqrt(), 0.0);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); tensor_len(mode_count, n)];
    for digits in &arrangements {
        amplitudes[encode(mode_count, digits)] = amp;
    }
    Ok(FirstQState {
        mode_count,
        absorbed: vec![None; n],
        amplitudes,
    })
}

pub(crate) fn distinct_arrangements(
    remaining: &mut [usize],
    slots: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == slots {
        out.push(current.clone());
        return;
    }
    for mode in 0..remaining.len() {
        if remaining[mode] > 0 {
            remaining[mode] -= 1;
            current.push(mode);
            distinct_arrangements(remaining, slots, current, out);
            current.pop();
            remaining[mode] += 1;
        }
    }
}

/// Applies `U` to the index of every alive particle.
pub fn evolve(state: &FirstQState, u: &ModeUnitary) -> Result<FirstQState> {
    let m = state.mode_count;
    if u.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: u.dim(),
        });
    }
    let n = state.particle_count();
    let mut amps = state.amplitudes.clone();
    let mut column = vec![Complex64::new(0.0, 0.0); m];
    for p in state.alive_particles() {
        let s = stride(m, n, p);
        for base in 0..amps.len() {
            if !(base / s).is_multiple_of(m) {
                continue;
            }
            for (j, slot) in column.iter_mut().enumerate() {
                *slot = amps[base + j * s];
            }
            for k in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &x) in column.iter().enumerate() {
                    acc += u.entry(k, j) * x;
                }
                amps[base + k * s] = acc;
            }
        }
    }
    Ok(FirstQState {
        mode_count: m,
        absorbed: state.absorbed.clone(),
        amplitudes: amps,
    })
}

/// Outcome in which exactly the copies listed in `clicked` fired.
#[derive(Clone, Debug)]
pub struct LabeledBranch {
    pub clicked: Vec<usize>,
    pub probability: f64,
    pub state: FirstQState,
}

/// Which-particle resolved measurement of `mode`: one branch per set of
/// alive particles found there.
pub fn detect_labeled(state: &FirstQState, mode: ModeIndex) -> Result<Vec<LabeledBranch>> {
    let m = state.mode_count;
    if mode.0 >= m {
        return Err(Error::ModeOutOfRange {
            mode: mode.0,
            mode_count: m,
        });
    }
    let n = state.particle_count();
    let alive = state.alive_particles();
    let masks: Vec<u64> = (0..state.amplitudes.len())
        .map(|index| {
            alive.iter().fold(0u64, |acc, &p| {
                if (index / stride(m, n, p)) % m == mode.0 {
                    acc | (1 << p)
                } else {
                    acc
                }
            })
        })
        .collect();
    let mut weights: BTreeMap<(u32, u64), f64> = BTreeMap::new();
    for (a, &mask) in state.amplitudes.iter().zip(&masks) {
        *weights.entry((mask.count_ones(), mask)).or_insert(0.0) += a.norm_sqr();
    }
    let mut branches = Vec::new();
    for ((_, mask), p) in weights {
        if p < BRANCH_TOLERANCE {
            continue;
        }
        branches.push(project(state, mode, &masks, mask, p));
    }
    Ok(branches)
}

fn project(
    state: &FirstQState,
    mode: ModeIndex,
    masks: &[u64],
    mask: u64,
    p: f64,
) -> LabeledBranch {
    let scale = p.sqrt();
    let amplitudes = state
        .amplitudes
        .iter()
        .zip(masks)
        .map(|(a, &k)| {
            if k == mask {
                a / scale
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut absorbed = state.absorbed.clone();
    let clicked: Vec<usize> = (0..state.particle_count())
        .filter(|p| mask & (1 << p) != 0)
        .collect();
    for &p in &clicked {
        absorbed[p] = Some(mode);
    }
    LabeledBranch {
        clicked,
        probability: p,
        state: FirstQState {
            mode_count: state.mode_count,
            absorbed,
            amplitudes,
        },
    }
}

/// Photon-number measurement of `mode`, reporting only how many copies
/// fired. The post-measurement state is taken from the most likely
/// labelling with that count; on a symmetric state all labellings are
/// equally likely and differ only by a relabelling of particles.
pub fn detect_mode(state: &FirstQState, mode: ModeIndex) -> Result<Vec<Branch<FirstQState>>> {
    let labeled = detect_labeled(state, mode)?;
    let mut by_count: BTreeMap<u32, Vec<LabeledBranch>> = BTreeMap::new();
    for b in labeled {
        by_count.entry(b.clicked.len() as u32).or_default().push(b);
    }
    let mut out = Vec::new();
    for (count, group) in by_count {
        let total: f64 = group.iter().map(|b| b.probability).sum();
        let best = group.iter().map(|b| b.probability).fold(0.0, f64::max);
        let representative = group
            .into_iter()
            .find(|b| b.probability >= best * (1.0 - 1e-9))
            .expect("non-empty group");
        out.push(Branch {
            count,
            probability: total,
            state: representative.state,
        });
    }
    Ok(out)
}

/// Multiplies by `e^{i·phase}` once per alive particle sitting in `mode`.
pub fn phase_all(state: &FirstQState, mode: ModeIndex, phase: f64) -> Result<FirstQState> {
    let m = state.mode_count;
    if mode.0 >= m {
        return Err(Error::ModeOutOfRange {
            mode: mode.0,
            mode_count: m,
        });
    }
    let n = state.particle_count();
    let alive = state.alive_particles();
    let mut out = state.clone();
    for (index, a) in out.amplitudes.iter_mut().enumerate() {
        let hits = alive
            .iter()
            .filter(|&&p| (index / stride(m, n, p)) % m == mode.0)
            .count();
        if hits > 0 {
            *a *= Complex64::from_polar(1.0, phase * hits as f64);
        }
    }
    Ok(out)
}

/// Fires the phase shifter in every copy of the interferometer when the
/// controller's count satisfies the trigger. Copies whose particle has been
/// absorbed are unaffected.
pub fn conditional_phase_all(
    state: &FirstQState,
    element: &ConditionalPhaseShifter,
    record: &DetectorRecord,
) -> Result<FirstQState> {
    let count = record
        .get(&element.controller)
        .ok_or_else(|| Error::MissingController(element.controller.clone()))?;
    if element.trigger.fires(count) {
        phase_all(state, element.mode, element.phase)
    } else {
        Ok(state.clone())
    }
}

/// [`Backend`] for the first-quantized engine.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstQBackend;

impl Backend for FirstQBackend {
    type State = FirstQState;

    fn prepare(&self, circuit: &Circuit) -> Result<FirstQState> {
        permanent_state(
            &SymmetrizedAssignment(circuit.input_modes.clone()),
            circuit.mode_count,
        )
    }

    fn apply_unitary(&self, state: &FirstQState, u: &ModeUnitary) -> Result<FirstQState> {
        evolve(state, u)
    }

    fn detect(&self, state: &FirstQState, mode: ModeIndex) -> Result<Vec<Branch<FirstQState>>> {
        detect_mode(state, mode)
    }

    fn conditional_phase(
        &self,
        state: &FirstQState,
        element: &ConditionalPhaseShifter,
        record: &DetectorRecord,
    ) -> Result<FirstQState> {
        conditional_phase_all(state, element, record)
    }
}

pub fn run_firstq(circuit: &Circuit, mode: RunMode) -> Result<RunOutput<FirstQState>> {
    exec::run(&FirstQBackend, circuit, mode)
}

pub fn run_firstq_exhaustive(circuit: &Circuit) -> Result<Vec<BranchOutcome<FirstQState>>> {
    exec::run_exhaustive(&FirstQBackend, circuit)
}
