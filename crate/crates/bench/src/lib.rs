//! Shared inputs for the criterion benches.

use klmsim::equivalence::ComplexMatrix;
use klmsim::random::random_unitary;
use klmsim::{Circuit, Element, ModeUnitary};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = rng(seed);
    DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn unitary(m: usize, seed: u64) -> ModeUnitary {
    random_unitary(m, &mut rng(seed))
}

/// Nearest-neighbour beamsplitter mesh with a detector on the last mode and
/// feed-forward phases on the first two.
pub fn mesh_circuit(m: usize, photons: usize, layers: usize) -> Circuit {
    let mut elements = Vec::new();
    for layer in 0..layers {
        for a in (layer % 2..m - 1).step_by(2) {
            elements.push(Element::bs(
                a,
                a + 1,
                0.3 + 0.1 * a as f64,
                0.2 * layer as f64,
            ));
        }
    }
    elements.push(Element::det(m - 1, "D"));
    elements.push(Element::cps(0, 1.1, "D", klmsim::Trigger::AtLeast { k: 1 }));
    elements.push(Element::cps(1, 0.7, "D", klmsim::Trigger::Equals { k: 0 }));
    for a in 0..m - 2 {
        elements.push(Element::bs(a, a + 1, 0.9, 0.0));
    }
    let inputs: Vec<usize> = (0..photons).collect();
    Circuit::new(m, &inputs, elements)
}
