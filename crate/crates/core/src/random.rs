//! Seeded generators for unitaries, Fock vectors and circuits.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::{index, IndexedRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, Element, ModeIndex, ModeUnitary, Trigger};
use crate::fock::{fock_sector, FockVector};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random `m × m` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ModeUnitary {
    let g = DMatrix::from_fn(m, m, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    ModeUnitary::from_matrix_unchecked(q)
}

/// Unit vector with Gaussian amplitudes on every basis state of the
/// `photons`-photon sector.
pub fn random_fock_vector<R: Rng + ?Sized>(
    mode_count: usize,
    photons: u32,
    rng: &mut R,
) -> FockVector {
    let terms: Vec<(Vec<u32>, Complex64)> = fock_sector(mode_count, photons)
        .into_iter()
        .map(|occ| (occ.0, gaussian(rng)))
        .collect();
    FockVector::from_terms(mode_count, terms)
        .expect("sector keys have the right length")
        .normalized()
}

/// Bounds for [`random_circuit`].
#[derive(Clone, Copy, Debug)]
pub struct CircuitShape {
    pub max_modes: usize,
    pub max_photons: usize,
    pub max_detectors: usize,
}

const TRIGGERS: [Trigger; 3] = [
    Trigger::Equals { k: 0 },
    Trigger::Equals { k: 1 },
    Trigger::AtLeast { k: 1 },
];

/// Random valid circuit: distinct input modes, detectors on distinct modes,
/// and conditional phase shifters wired to already-declared detectors.
pub fn random_circuit<R: Rng + ?Sized>(shape: CircuitShape, rng: &mut R) -> Circuit {
    let max_modes = shape.max_modes.max(1);
    let m = if max_modes >= 2 {
        rng.random_range(2..=max_modes)
    } else {
        1
    };
    let photons = rng.random_range(1..=shape.max_photons.clamp(1, m));
    let inputs: Vec<ModeIndex> = index::sample(rng, m, photons)
        .into_iter()
        .map(ModeIndex)
        .collect();
    let detector_count = rng.random_range(0..=shape.max_detectors.min(m));
    let detector_modes: Vec<usize> = index::sample(rng, m, detector_count).into_vec();

    let mut elements = Vec::new();
    let mut declared: Vec<String> = Vec::new();
    for stage in 0..=detector_count {
        let linear = rng.random_range(1..=2 * m);
        let conditional = if declared.is_empty() {
            0
        } else {
            rng.random_range(0..=2)
        };
        let mut stage_elements = Vec::with_capacity(linear + conditional);
        for _ in 0..linear {
            if m >= 2 && rng.random_bool(0.7) {
                let pair = index::sample(rng, m, 2);
                stage_elements.push(Element::bs(
                    pair.index(0),
                    pair.index(1),
                    rng.random_range(0.0..TAU),
                    rng.random_range(0.0..TAU),
                ));
            } else {
                stage_elements.push(Element::ps(
                    rng.random_range(0..m),
                    rng.random_range(0.0..TAU),
                ));
            }
        }
        for _ in 0..conditional {
            let at = rng.random_range(0..=stage_elements.len());
            let controller = declared.choose(rng).unwrap().clone();
            let trigger = *TRIGGERS.choose(rng).unwrap();
            stage_elements.insert(
                at,
                Element::cps(
                    rng.random_range(0..m),
                    rng.random_range(0.0..TAU),
                    controller,
                    trigger,
                ),
            );
        }
        elements.extend(stage_elements);
        if let Some(&mode) = detector_modes.get(stage) {
            let id = format!("D{}", stage + 1);
            elements.push(Element::det(mode, id.clone()));
            declared.push(id);
        }
    }
    Circuit {
        mode_count: m,
        input_modes: inputs,
        elements,
    }
}
