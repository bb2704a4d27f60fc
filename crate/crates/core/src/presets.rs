//! Small fixed circuits used by the demos and the test suites.

use std::f64::consts::FRAC_PI_4;

use crate::circuit::{Circuit, Element};

const FEED_FORWARD_MESH: &str = include_str!("../fixtures/feed_forward_mesh.json");

/// Two photons on a 50/50 beamsplitter with a detector on each output.
pub fn hong_ou_mandel() -> Circuit {
    Circuit::new(
        2,
        &[0, 1],
        vec![
            Element::bs(0, 1, FRAC_PI_4, 0.0),
            Element::det(0, "D1"),
            Element::det(1, "D2"),
        ],
    )
}

/// The 50/50 beamsplitter on `|1,1⟩` with no detectors.
pub fn hong_ou_mandel_unmeasured() -> Circuit {
    Circuit::new(2, &[0, 1], vec![Element::bs(0, 1, FRAC_PI_4, 0.0)])
}

/// Three photons in a four-mode mesh: one mid-circuit detector `D` drives
/// conditional phase shifters on three modes, then detectors `D1`–`D3`
/// read out modes 0–2.
pub fn feed_forward_mesh() -> Circuit {
    Circuit::from_json(FEED_FORWARD_MESH).expect("bundled fixture parses")
}
