//! Occupation-number basis state `|n_0 … n_{m−1}⟩` with `N` photons maps to
//! the unit-norm symmetric tensor over `N` particles that puts `n_j`
//! particles in mode `j`: the uniform superposition of its `N!/Π_j n_j!`
//! distinct arrangements. Extended linearly this is an isometry onto the
//! symmetric sector.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::ModeUnitary;
use crate::equivalence::permanent::permanent_ryser;
use crate::error::{Error, Result};
use crate::firstq::{distinct_arrangements, FirstQState};
use crate::fock::{factorial, FockBasisState, FockVector};

/// Largest alive-particle transposition defect [`fq_to_fock`] accepts.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

fn arrangement_count(occupations: &[u32]) -> f64 {
    let n: u32 = occupations.iter().sum();
    factorial(n) / occupations.iter().map(|&k| factorial(k)).product::<f64>()
}

pub fn fock_to_fq(state: &FockVector) -> Result<FirstQState> {
    let m = state.mode_count();
    let n = state.photon_number() as usize;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); m.pow(n as u32)];
    for (occ, &amp) in state.iter() {
        if occ.photon_number() as usize != n {
            return Err(Error::PhotonNumberMismatch {
                input: n as u32,
                output: occ.photon_number(),
            });
        }
        let mut remaining: Vec<usize> = occ.occupations().iter().map(|&k| k as usize).collect();
        let mut arrangements = Vec::new();
        distinct_arrangements(
            &mut remaining,
            n,
            &mut Vec::with_capacity(n),
            &mut arrangements,
        );
        let weight = amp / (arrangements.len() as f64).sqrt();
        for digits in arrangements {
            let index = digits.iter().fold(0, |acc, &d| acc * m + d);
            amplitudes[index] += weight;
        }
    }
    FirstQState::from_tensor(m, n, amplitudes)
}

/// Left inverse of [`fock_to_fq`], restricted to the alive particles.
/// Absorbed particles are read at the mode they were detected in.
pub fn fq_to_fock(state: &FirstQState) -> Result<FockVector> {
    let defect = state.symmetry_defect();
    if defect >= SYMMETRY_TOLERANCE {
        return Err(Error::NotBosonic(defect));
    }
    let m = state.mode_count();
    let n = state.particle_count();
    let alive = state.alive_particles();
    let frozen: Vec<(usize, usize)> = (0..n)
        .filter_map(|p| state.absorbed_in(p).map(|mode| (p, mode.0)))
        .collect();

    let mut terms = Vec::new();
    for (index, &a) in state.amplitudes().iter().enumerate() {
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let digits = state.decode(index);
        if frozen.iter().any(|&(p, mode)| digits[p] != mode) {
            continue;
        }
        let mut occ = vec![0u32; m];
        for &p in &alive {
            occ[digits[p]] += 1;
        }
        let weight = a / arrangement_count(&occ).sqrt();
        terms.push((occ, weight));
    }
    if terms.is_empty() {
        // Every entry was zero: report the empty vector of the right sector.
        return FockVector::from_terms(m, std::iter::empty());
    }
    FockVector::from_terms(m, terms)
}

/// `⟨out| U_F |in⟩ = Per(U[rows of out, cols of in]) / √(Π in_j! · Π out_k!)`,
/// with each mode's row or column repeated by its occupation.
pub fn transition_amplitude_oracle(
    u: &ModeUnitary,
    input: &FockBasisState,
    output: &FockBasisState,
) -> Result<Complex64> {
    let m = u.dim();
    for occ in [input, output] {
        if occ.mode_count() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: occ.mode_count(),
            });
        }
    }
    if input.photon_number() != output.photon_number() {
        return Err(Error::PhotonNumberMismatch {
            input: input.photon_number(),
            output: output.photon_number(),
        });
    }
    let expand = |occ: &FockBasisState| -> Vec<usize> {
        occ.occupations()
            .iter()
            .enumerate()
            .flat_map(|(mode, &k)| std::iter::repeat_n(mode, k as usize))
            .collect()
    };
    let cols = expand(input);
    let rows = expand(output);
    let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| u.entry(rows[i], cols[j]));
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(permanent_ryser(&sub)? / norm)
}
