use thiserror::Error;

use crate::circuit::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit: {}", display_violations(.0))]
    InvalidCircuit(Vec<Violation>),

    #[error("unsplit segment: detector at position {0} inside a unitary segment")]
    UnsplitSegment(usize),

    #[error(
        "unresolved condition: conditional phase shifter at position {0} inside a unitary segment"
    )]
    UnresolvedCondition(usize),

    #[error("dimension mismatch: expected {expected} modes, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("mode {mode} out of range for {mode_count} modes")]
    ModeOutOfRange { mode: usize, mode_count: usize },

    #[error("missing controller record for detector {0:?}")]
    MissingController(String),

    #[error("not in bosonic sector: symmetry defect {0:e}")]
    NotBosonic(f64),

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix dimension {dim} exceeds limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("photon number mismatch: {input} in, {output} out")]
    PhotonNumberMismatch { input: u32, output: u32 },

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("sampling requires at least one shot")]
    NoShots,
}

fn display_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
