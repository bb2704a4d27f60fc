//! Second-quantized engine: sparse amplitudes over occupation-number basis
//! states, photon-number-resolving detection and feed-forward phases.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeSeq, SerializeStruct, Serializer};

use crate::circuit::{Circuit, ConditionalPhaseShifter, ModeIndex, ModeUnitary};
use crate::error::{Error, Result};
use crate::exec::{self, Backend, Branch, BranchOutcome, DetectorRecord, RunMode, RunOutput};

/// Amplitudes below this magnitude are dropped after every operation.
pub const PRUNE_TOLERANCE: f64 = 1e-14;

/// Branches less likely than this are not reported.
pub const BRANCH_TOLERANCE: f64 = 1e-14;

/// Occupation numbers `(n_0, …, n_{m−1})`, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisState(pub Vec<u32>);

impl FockBasisState {
    pub fn vacuum(mode_count: usize) -> Self {
        FockBasisState(vec![0; mode_count])
    }

    pub fn photon_number(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    /// `Π_j n_j!`
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n)).product()
    }
}

impl From<Vec<u32>> for FockBasisState {
    fn from(v: Vec<u32>) -> Self {
        FockBasisState(v)
    }
}

impl fmt::Display for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "|{}⟩", parts.join(","))
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Sparse wavefunction over a fixed-photon-number sector of `mode_count`
/// modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    mode_count: usize,
    amplitudes: BTreeMap<FockBasisState, Complex64>,
}

impl FockVector {
    pub fn basis(occupations: Vec<u32>) -> Self {
        let mode_count = occupations.len();
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(FockBasisState(occupations), Complex64::new(1.0, 0.0));
        FockVector {
            mode_count,
            amplitudes,
        }
    }

    pub fn vacuum(mode_count: usize) -> Self {
        Self::basis(vec![0; mode_count])
    }

    /// Builds a vector from raw terms; repeated keys are summed. No
    /// normalization is applied.
    pub fn from_terms<I>(mode_count: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut amplitudes = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != mode_count {
                return Err(Error::DimensionMismatch {
                    expected: mode_count,
                    actual: occ.len(),
                });
            }
            *amplitudes
                .entry(FockBasisState(occ))
                .or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let mut v = FockVector {
            mode_count,
            amplitudes,
        };
        v.prune();
        Ok(v)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    /// Total photon number of the first basis key (all keys agree).
    pub fn photon_number(&self) -> u32 {
        self.amplitudes
            .keys()
            .next()
            .map(FockBasisState::photon_number)
            .unwrap_or(0)
    }

    pub fn amplitude(&self, occupations: &[u32]) -> Complex64 {
        self.amplitudes
            .get(&FockBasisState(occupations.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    /// Basis terms in lexicographic occupation order.
    pub fn iter(&self) -> impl Iterator<Item = (&FockBasisState, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes
            .iter()
            .filter_map(|(k, a)| other.amplitudes.get(k).map(|b| a.conj() * b))
            .sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        let mut out = self.clone();
        for a in out.amplitudes.values_mut() {
            *a /= n;
        }
        out
    }

    /// `‖self − other‖₂`
    pub fn distance(&self, other: &FockVector) -> f64 {
        let mut total = 0.0;
        for (k, a) in &self.amplitudes {
            let b = other.amplitudes.get(k).copied().unwrap_or_default();
            total += (a - b).norm_sqr();
        }
        for (k, b) in &other.amplitudes {
            if !self.amplitudes.contains_key(k) {
                total += b.norm_sqr();
            }
        }
        total.sqrt()
    }

    /// `min_θ ‖self − e^{iθ}·other‖₂`
    pub fn phase_aligned_distance(&self, other: &FockVector) -> f64 {
        let overlap = other.inner(self);
        if overlap.norm() == 0.0 {
            return self.distance(other);
        }
        let mut rotated = other.clone();
        let phase = overlap / overlap.norm();
        for a in rotated.amplitudes.values_mut() {
            *a *= phase;
        }
        self.distance(&rotated)
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() >= PRUNE_TOLERANCE);
    }
}

impl Serialize for FockVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Term<'a>(&'a FockBasisState, Complex64);
        impl Serialize for Term<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut st = s.serialize_struct("Term", 3)?;
                st.serialize_field("occ", &self.0 .0)?;
                st.serialize_field("re", &self.1.re)?;
                st.serialize_field("im", &self.1.im)?;
                st.end()
            }
        }
        let mut seq = serializer.serialize_seq(Some(self.amplitudes.len()))?;
        for (k, a) in &self.amplitudes {
            seq.serialize_element(&Term(k, *a))?;
        }
        seq.end()
    }
}

/// Every occupation vector of `photons` photons over `mode_count` modes, in
/// lexicographic order.
pub fn fock_sector(mode_count: usize, photons: u32) -> Vec<FockBasisState> {
    fn fill(prefix: &mut Vec<u32>, left: u32, modes: usize, out: &mut Vec<FockBasisState>) {
        if prefix.len() + 1 == modes {
            prefix.push(left);
            out.push(FockBasisState(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            fill(prefix, left - k, modes, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if mode_count == 0 {
        if photons == 0 {
            out.push(FockBasisState(Vec::new()));
        }
        return out;
    }
    fill(
        &mut Vec::with_capacity(mode_count),
        photons,
        mode_count,
        &mut out,
    );
    out
}

/// One photon in each entry of `circuit.input_modes`; repeated entries
/// stack.
pub fn input_state(circuit: &Circuit) -> FockVector {
    let mut occ = vec![0u32; circuit.mode_count];
    for mode in &circuit.input_modes {
        occ[mode.0] += 1;
    }
    FockVector::basis(occ)
}

/// Lifts a mode unitary to Fock space through `a†_j -> Σ_k U[k][j] b†_k`.
///
/// Each input monomial `Π_j (a†_j)^{n_j} / √(n_j!)` is expanded one creation
/// operator at a time; the resulting monomial `Π_k (b†_k)^{m_k}` acting on
/// the vacuum has norm `√(Π_k m_k!)`.
pub fn apply_unitary(state: &FockVector, u: &ModeUnitary) -> Result<FockVector> {
    let m = state.mode_count;
    if u.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: u.dim(),
        });
    }
    let mut out: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
    for (occ, &amp) in &state.amplitudes {
        let mut monomials: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        monomials.insert(vec![0; m], Complex64::new(1.0, 0.0));
        for (j, &n_j) in occ.0.iter().enumerate() {
            for _ in 0..n_j {
                let mut next: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
                for (mono, c) in &monomials {
                    for k in 0..m {
                        let ukj = u.entry(k, j);
                        if ukj.norm() == 0.0 {
                            continue;
                        }
                        let mut grown = mono.clone();
                        grown[k] += 1;
                        *next.entry(grown).or_insert(Complex64::new(0.0, 0.0)) += c * ukj;
                    }
                }
                monomials = next;
            }
        }
        let input_norm = occ.factorial_product().sqrt();
        for (mono, c) in monomials {
            let key = FockBasisState(mono);
            let scale = key.factorial_product().sqrt() / input_norm;
            *out.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amp * c * scale;
        }
    }
    let mut v = FockVector {
        mode_count: m,
        amplitudes: out,
    };
    v.prune();
    Ok(v)
}

/// Photon-number measurement of `mode`. Each branch keeps the projected,
/// renormalized state with the detected photons removed.
pub fn detect(state: &FockVector, mode: ModeIndex) -> Result<Vec<Branch<FockVector>>> {
    let m = state.mode_count;
    if mode.0 >= m {
        return Err(Error::ModeOutOfRange {
            mode: mode.0,
            mode_count: m,
        });
    }
    let mut by_count: BTreeMap<u32, Vec<(FockBasisState, Complex64)>> = BTreeMap::new();
    for (occ, &amp) in &state.amplitudes {
        let k = occ.0[mode.0];
        let mut absorbed = occ.clone();
        absorbed.0[mode.0] = 0;
        by_count.entry(k).or_default().push((absorbed, amp));
    }
    let mut branches = Vec::new();
    for (count, terms) in by_count {
        let p: f64 = terms.iter().map(|(_, a)| a.norm_sqr()).sum();
        if p < BRANCH_TOLERANCE {
            continue;
        }
        let scale = p.sqrt();
        let mut post = FockVector {
            mode_count: m,
            amplitudes: terms.into_iter().map(|(k, a)| (k, a / scale)).collect(),
        };
        post.prune();
        branches.push(Branch {
            count,
            probability: p,
            state: post,
        });
    }
    Ok(branches)
}

/// Multiplies every amplitude by `e^{i·phase·n_mode}`.
pub fn phase_shift(state: &FockVector, mode: ModeIndex, phase: f64) -> Result<FockVector> {
    if mode.0 >= state.mode_count {
        return Err(Error::ModeOutOfRange {
            mode: mode.0,
            mode_count: state.mode_count,
        });
    }
    let mut out = state.clone();
    for (occ, a) in out.amplitudes.iter_mut() {
        *a *= Complex64::from_polar(1.0, phase * f64::from(occ.0[mode.0]));
    }
    Ok(out)
}

pub fn apply_conditional_phase(
    state: &FockVector,
    element: &ConditionalPhaseShifter,
    record: &DetectorRecord,
) -> Result<FockVector> {
    let count = record
        .get(&element.controller)
        .ok_or_else(|| Error::MissingController(element.controller.clone()))?;
    if element.trigger.fires(count) {
        phase_shift(state, element.mode, element.phase)
    } else {
        Ok(state.clone())
    }
}

/// [`Backend`] for the second-quantized engine.
#[derive(Clone, Copy, Debug, Default)]
pub struct FockBackend;

impl Backend for FockBackend {
    type State = FockVector;

    fn prepare(&self, circuit: &Circuit) -> Result<FockVector> {
        Ok(input_state(circuit))
    }

    fn apply_unitary(&self, state: &FockVector, u: &ModeUnitary) -> Result<FockVector> {
        apply_unitary(state, u)
    }

    fn detect(&self, state: &FockVector, mode: ModeIndex) -> Result<Vec<Branch<FockVector>>> {
        detect(state, mode)
    }

    fn conditional_phase(
        &self,
        state: &FockVector,
        element: &ConditionalPhaseShifter,
        record: &DetectorRecord,
    ) -> Result<FockVector> {
        apply_conditional_phase(state, element, record)
    }
}

pub fn run(circuit: &Circuit, mode: RunMode) -> Result<RunOutput<FockVector>> {
    exec::run(&FockBackend, circuit, mode)
}

pub fn run_exhaustive(circuit: &Circuit) -> Result<Vec<BranchOutcome<FockVector>>> {
    exec::run_exhaustive(&FockBackend, circuit)
}
