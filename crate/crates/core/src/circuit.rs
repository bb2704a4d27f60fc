//! Circuit description: linear elements, detectors and detector-conditioned
//! phase shifters over a fixed set of optical modes.
//!
//! Elements apply left to right in declaration order. A beamsplitter acts on
//! creation operators column-wise: `a†_j -> Σ_k U[k][j] b†_k`, so the 50/50
//! splitter `(θ, φ) = (π/4, 0)` sends `a†_0 -> (b†_0 + b†_1)/√2` and
//! `a†_1 -> (b†_0 - b†_1)/√2`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `‖U·U† − I‖_max` for a [`ModeUnitary`].
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Zero-based optical mode label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeIndex(pub usize);

impl ModeIndex {
    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

impl From<usize> for ModeIndex {
    fn from(i: usize) -> Self {
        ModeIndex(i)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Predicate on an observed photon count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", deny_unknown_fields)]
pub enum Trigger {
    #[serde(rename = "==")]
    Equals { k: u32 },
    #[serde(rename = ">=")]
    AtLeast { k: u32 },
}

impl Trigger {
    pub fn fires(self, count: u32) -> bool {
        match self {
            Trigger::Equals { k } => count == k,
            Trigger::AtLeast { k } => count >= k,
        }
    }
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::Equals { k } => write!(f, "count == {k}"),
            Trigger::AtLeast { k } => write!(f, "count >= {k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Beamsplitter {
    #[serde(rename = "a")]
    pub mode_a: ModeIndex,
    #[serde(rename = "b")]
    pub mode_b: ModeIndex,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseShifter {
    pub mode: ModeIndex,
    pub phase: f64,
}

/// Photon-number-resolving detector. Detected photons are absorbed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detector {
    pub mode: ModeIndex,
    pub id: String,
}

/// Phase shifter that acts only when `trigger` holds for the count recorded
/// by detector `controller`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalPhaseShifter {
    pub mode: ModeIndex,
    pub phase: f64,
    pub controller: String,
    pub trigger: Trigger,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Element {
    #[serde(rename = "bs")]
    Beamsplitter(Beamsplitter),
    #[serde(rename = "ps")]
    PhaseShifter(PhaseShifter),
    #[serde(rename = "det")]
    Detector(Detector),
    #[serde(rename = "cps")]
    ConditionalPhaseShifter(ConditionalPhaseShifter),
}

impl Element {
    pub fn bs(a: usize, b: usize, theta: f64, phi: f64) -> Self {
        Element::Beamsplitter(Beamsplitter {
            mode_a: ModeIndex(a),
            mode_b: ModeIndex(b),
            theta,
            phi,
        })
    }

    pub fn ps(mode: usize, phase: f64) -> Self {
        Element::PhaseShifter(PhaseShifter {
            mode: ModeIndex(mode),
            phase,
        })
    }

    pub fn det(mode: usize, id: impl Into<String>) -> Self {
        Element::Detector(Detector {
            mode: ModeIndex(mode),
            id: id.into(),
        })
    }

    pub fn cps(mode: usize, phase: f64, controller: impl Into<String>, trigger: Trigger) -> Self {
        Element::ConditionalPhaseShifter(ConditionalPhaseShifter {
            mode: ModeIndex(mode),
            phase,
            controller: controller.into(),
            trigger,
        })
    }

    /// Modes touched by this element.
    pub fn modes(&self) -> Vec<ModeIndex> {
        match self {
            Element::Beamsplitter(b) => vec![b.mode_a, b.mode_b],
            Element::PhaseShifter(p) => vec![p.mode],
            Element::Detector(d) => vec![d.mode],
            Element::ConditionalPhaseShifter(c) => vec![c.mode],
        }
    }

    pub fn is_detector(&self) -> bool {
        matches!(self, Element::Detector(_))
    }
}

/// A linear-optical program: `input_modes` lists the initially occupied
/// modes, one photon per entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circuit {
    #[serde(rename = "modes")]
    pub mode_count: usize,
    pub input_modes: Vec<ModeIndex>,
    pub elements: Vec<Element>,
}

impl Circuit {
    pub fn new(mode_count: usize, input_modes: &[usize], elements: Vec<Element>) -> Self {
        Circuit {
            mode_count,
            input_modes: input_modes.iter().copied().map(ModeIndex).collect(),
            elements,
        }
    }

    pub fn photon_count(&self) -> usize {
        self.input_modes.len()
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization is infallible")
    }

    pub fn detectors(&self) -> impl Iterator<Item = &Detector> {
        self.elements.iter().filter_map(|e| match e {
            Element::Detector(d) => Some(d),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NoModes,
    InputModeOutOfRange { position: usize, mode: usize },
    ModeOutOfRange { element: usize, mode: usize },
    DegenerateBeamsplitter { element: usize, mode: usize },
    NonFiniteAngle { element: usize },
    DuplicateDetector { element: usize, id: String },
    DanglingController { element: usize, controller: String },
    ForwardReference { element: usize, controller: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoModes => write!(f, "circuit declares no modes"),
            Violation::InputModeOutOfRange { position, mode } => {
                write!(f, "bad mode index: input_modes[{position}] = {mode}")
            }
            Violation::ModeOutOfRange { element, mode } => {
                write!(f, "bad mode index: element {element} uses mode {mode}")
            }
            Violation::DegenerateBeamsplitter { element, mode } => {
                write!(f, "degenerate beamsplitter: element {element} couples mode {mode} to itself")
            }
            Violation::NonFiniteAngle { element } => {
                write!(f, "non-finite angle in element {element}")
            }
            Violation::DuplicateDetector { element, id } => {
                write!(f, "duplicate detector_id: {id:?} redeclared at element {element}")
            }
            Violation::DanglingController { element, controller } => {
                write!(f, "dangling controller: element {element} cites undeclared detector {controller:?}")
            }
            Violation::ForwardReference { element, controller } => write!(
                f,
                "forward-referencing condition: element {element} cites detector {controller:?} declared later"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidCircuit(self.violations))
        }
    }
}

/// Checks every structural constraint and reports all violations found.
pub fn validate(circuit: &Circuit) -> ValidationReport {
    let m = circuit.mode_count;
    let mut violations = Vec::new();
    if m == 0 {
        violations.push(Violation::NoModes);
    }
    for (position, mode) in circuit.input_modes.iter().enumerate() {
        if mode.0 >= m {
            violations.push(Violation::InputModeOutOfRange {
                position,
                mode: mode.0,
            });
        }
    }

    // Position of the first declaration of each detector id.
    let mut declared: HashMap<&str, usize> = HashMap::new();
    for (element, e) in circuit.elements.iter().enumerate() {
        if let Element::Detector(d) = e {
            if declared.contains_key(d.id.as_str()) {
                violations.push(Violation::DuplicateDetector {
                    element,
                    id: d.id.clone(),
                });
            } else {
                declared.insert(d.id.as_str(), element);
            }
        }
    }

    for (element, e) in circuit.elements.iter().enumerate() {
        for mode in e.modes() {
            if mode.0 >= m {
                violations.push(Violation::ModeOutOfRange {
                    element,
                    mode: mode.0,
                });
            }
        }
        match e {
            Element::Beamsplitter(b) => {
                if b.mode_a == b.mode_b {
                    violations.push(Violation::DegenerateBeamsplitter {
                        element,
                        mode: b.mode_a.0,
                    });
                }
                if !b.theta.is_finite() || !b.phi.is_finite() {
                    violations.push(Violation::NonFiniteAngle { element });
                }
            }
            Element::PhaseShifter(p) => {
                if !p.phase.is_finite() {
                    violations.push(Violation::NonFiniteAngle { element });
                }
            }
            Element::Detector(_) => {}
            Element::ConditionalPhaseShifter(c) => {
                if !c.phase.is_finite() {
                    violations.push(Violation::NonFiniteAngle { element });
                }
                match declared.get(c.controller.as_str()) {
                    None => violations.push(Violation::DanglingController {
                        element,
                        controller: c.controller.clone(),
                    }),
                    Some(&at) if at > element => violations.push(Violation::ForwardReference {
                        element,
                        controller: c.controller.clone(),
                    }),
                    Some(_) => {}
                }
            }
        }
    }
    ValidationReport { violations }
}

/// `[[cos θ, e^{iφ} sin θ], [e^{−iφ} sin θ, −cos θ]]`.
pub fn beamsplitter_unitary(theta: f64, phi: f64) -> Matrix2<Complex64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(
        Complex64::new(c, 0.0),
        Complex64::from_polar(s, phi),
        Complex64::from_polar(s, -phi),
        Complex64::new(-c, 0.0),
    )
}

/// An m×m unitary acting on mode creation operators (column j is the image
/// of mode j).
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary(DMatrix<Complex64>);

impl ModeUnitary {
    pub fn identity(m: usize) -> Self {
        ModeUnitary(DMatrix::identity(m, m))
    }

    /// Wraps `matrix` after checking squareness and unitarity.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NonSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let defect = unitarity_defect(&matrix);
        if defect.is_nan() || defect >= UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary(defect));
        }
        Ok(ModeUnitary(matrix))
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        ModeUnitary(matrix)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }

    /// `self` followed by `next`, i.e. `next · self`.
    pub fn then(&self, next: &ModeUnitary) -> ModeUnitary {
        ModeUnitary(&next.0 * &self.0)
    }
}

/// `‖U·U† − I‖_max`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let prod = u * u.adjoint();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Multiplies the product of a detector-free, condition-free segment, in
/// circuit order.
pub fn compile_segment(elements: &[Element], mode_count: usize) -> Result<ModeUnitary> {
    let mut u = DMatrix::<Complex64>::identity(mode_count, mode_count);
    let check = |mode: ModeIndex| {
        if mode.0 >= mode_count {
            Err(Error::ModeOutOfRange {
                mode: mode.0,
                mode_count,
            })
        } else {
            Ok(())
        }
    };
    for (pos, element) in elements.iter().enumerate() {
        match element {
            Element::Beamsplitter(b) => {
                check(b.mode_a)?;
                check(b.mode_b)?;
                let bs = beamsplitter_unitary(b.theta, b.phi);
                let (ra, rb) = (b.mode_a.0, b.mode_b.0);
                // Left-multiplication by the embedded 2x2 only mixes rows a and b.
                for col in 0..mode_count {
                    let xa = u[(ra, col)];
                    let xb = u[(rb, col)];
                    u[(ra, col)] = bs[(0, 0)] * xa + bs[(0, 1)] * xb;
                    u[(rb, col)] = bs[(1, 0)] * xa + bs[(1, 1)] * xb;
                }
            }
            Element::PhaseShifter(p) => {
                check(p.mode)?;
                let factor = Complex64::from_polar(1.0, p.phase);
                for col in 0..mode_count {
                    u[(p.mode.0, col)] *= factor;
                }
            }
            Element::Detector(_) => return Err(Error::UnsplitSegment(pos)),
            Element::ConditionalPhaseShifter(_) => return Err(Error::UnresolvedCondition(pos)),
        }
    }
    Ok(ModeUnitary(u))
}

/// Execution schedule: `segments.len() == detectors.len() + 1`, and segment
/// `i` runs before detector `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub segments: Vec<Vec<Element>>,
    pub detectors: Vec<Detector>,
}

impl Schedule {
    /// Reassembles the original element order.
    pub fn flatten(&self) -> Vec<Element> {
        let mut out = Vec::new();
        for (i, segment) in self.segments.iter().enumerate() {
            out.extend(segment.iter().cloned());
            if let Some(d) = self.detectors.get(i) {
                out.push(Element::Detector(d.clone()));
            }
        }
        out
    }
}

/// Cuts the element list at every detector. Conditional phase shifters stay
/// inside their segment and are resolved per branch at execution time.
pub fn split_at_detectors(circuit: &Circuit) -> Schedule {
    let mut segments = vec![Vec::new()];
    let mut detectors = Vec::new();
    for element in &circuit.elements {
        match element {
            Element::Detector(d) => {
                detectors.push(d.clone());
                segments.push(Vec::new());
            }
            other => segments.last_mut().unwrap().push(other.clone()),
        }
    }
    Schedule {
        segments,
        detectors,
    }
}
