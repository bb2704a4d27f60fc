//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use klmsim::equivalence::{
    fock_to_fq, permanent_naive, permanent_ryser, run_equivalence_suite,
    run_equivalence_suite_with, Engine, EquivalenceReport, FirstQEngine, FockEngine, MappedRun,
    SuiteConfig,
};
use klmsim::firstq::{evolve, permanent_state};
use klmsim::fock;
use klmsim::random::{random_fock_vector, random_unitary};
use klmsim::{compile_segment, presets, Circuit, Complex64, Element, SymmetrizedAssignment};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Hong-Ou-Mandel: P(2,0) = P(0,2) = 0.5 within 1e-12, coincidence < 1e-12.
fn hom_dip() -> Outcome {
    let start = Instant::now();
    let leaves = fock::run_exhaustive(&presets::hong_ou_mandel()).unwrap();
    let prob = |counts: &[u32]| {
        leaves
            .iter()
            .filter(|l| l.record.counts() == counts)
            .fold(0.0, |acc, l| acc + l.probability)
    };
    let (p20, p02, p11) = (prob(&[2, 0]), prob(&[0, 2]), prob(&[1, 1]));
    let elapsed = start.elapsed();
    check(
        (p20 - 0.5).abs() < 1e-12
            && (p02 - 0.5).abs() < 1e-12
            && p11 < 1e-12
            && elapsed < Duration::from_millis(100),
        format!("P(2,0)={p20:.15} P(0,2)={p02:.15} P(1,1)={p11:.3e} in {elapsed:?}"),
    )
}

/// Symmetrized pair through per-particle 50/50 splitters equals
/// (|00⟩ − |11⟩)/√2 entrywise within 1e-12.
fn first_quantized_bunching() -> Outcome {
    let s = permanent_state(&SymmetrizedAssignment::new(&[0, 1]), 2).unwrap();
    let u = compile_segment(&[Element::bs(0, 1, FRAC_PI_4, 0.0)], 2).unwrap();
    let out = evolve(&s, &u).unwrap();
    let expected = [FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2];
    let worst = out
        .amplitudes()
        .iter()
        .zip(expected)
        .map(|(a, e)| (a - Complex64::new(e, 0.0)).norm())
        .fold(0.0, f64::max);
    check(worst < 1e-12, format!("max entry error {worst:.3e}"))
}

/// ‖fock_to_fq(apply_unitary(v,U)) − evolve(fock_to_fq(v),U)‖ < 1e-10 on 200
/// random pairs with m ≤ 5, N ≤ 3, in under a minute.
fn intertwining() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let m = rng.random_range(1..=5);
        let photons = rng.random_range(1..=3);
        let v = random_fock_vector(m, photons, &mut rng);
        let u = random_unitary(m, &mut rng);
        let left = fock_to_fq(&fock::apply_unitary(&v, &u).unwrap()).unwrap();
        let right = evolve(&fock_to_fq(&v).unwrap(), &u).unwrap();
        worst = worst.max(left.distance(&right));
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-10 && elapsed < Duration::from_secs(60),
        format!("200 pairs, max distance {worst:.3e} in {elapsed:?}"),
    )
}

/// Runs the same circuit as the first-quantized engine with every
/// phase-shifter sign flipped.
struct PhaseFlipped;

impl Engine for PhaseFlipped {
    fn name(&self) -> &str {
        "firstq-phase-flipped"
    }

    fn run_mapped(&self, circuit: &Circuit) -> klmsim::Result<MappedRun> {
        let mut flipped = circuit.clone();
        for e in &mut flipped.elements {
            match e {
                Element::PhaseShifter(p) => p.phase = -p.phase,
                Element::ConditionalPhaseShifter(c) => c.phase = -c.phase,
                _ => {}
            }
        }
        FirstQEngine.run_mapped(&flipped)
    }
}

fn suite_config() -> SuiteConfig {
    SuiteConfig {
        trials: 100,
        max_modes: 5,
        max_photons: 3,
        max_detectors: 2,
        seed: 42,
    }
}

/// 100 seeded random circuits: TV distance < 1e-9, mapped-state distance
/// < 1e-9, zero failures, under five minutes; the phase-flipped fixture must
/// fail at least once.
fn equivalence_suite(report: &EquivalenceReport, elapsed: Duration) -> Outcome {
    let mutant = run_equivalence_suite_with(suite_config(), &FockEngine, &PhaseFlipped);
    check(
        report.circuits_tested == 100
            && report.max_distribution_distance < 1e-9
            && report.max_state_distance < 1e-9
            && report.failures.is_empty()
            && elapsed < Duration::from_secs(300)
            && !mutant.failures.is_empty(),
        format!(
            "{} circuits, max TV {:.3e}, max state distance {:.3e}, {} failures in {elapsed:?}; \
             phase-flipped fixture: {} failures",
            report.circuits_tested,
            report.max_distribution_distance,
            report.max_state_distance,
            report.failures.len(),
            mutant.failures.len()
        ),
    )
}

/// Ryser vs naive on 200 random complex matrices with n ≤ 8 (relative error
/// < 1e-9); identity → 1 and all-ones → n! exactly.
fn permanent_kernel() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let n = 1 + trial % 8;
        let m = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let naive = permanent_naive(&m).unwrap();
        let ryser = permanent_ryser(&m).unwrap();
        worst = worst.max((naive - ryser).norm() / naive.norm());
    }
    let mut exact = true;
    for n in 1..=8usize {
        let id = DMatrix::<Complex64>::identity(n, n);
        let ones = DMatrix::from_element(n, n, Complex64::new(1.0, 0.0));
        let factorial: f64 = (1..=n).map(|k| k as f64).product();
        exact &= permanent_ryser(&id).unwrap() == Complex64::new(1.0, 0.0);
        exact &= permanent_ryser(&ones).unwrap() == Complex64::new(factorial, 0.0);
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-9 && exact && elapsed < Duration::from_secs(10),
        format!("max relative error {worst:.3e}, identity/all-ones exact: {exact}, {elapsed:?}"),
    )
}

/// Alive-subspace transposition defect < 1e-10 after every step of every
/// suite circuit.
fn symmetry_preservation(report: &EquivalenceReport) -> Outcome {
    check(
        report.max_symmetry_defect < 1e-10,
        format!(
            "max transposition defect {:.3e}",
            report.max_symmetry_defect
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("AC1 Hong-Ou-Mandel dip (Fock engine)", hom_dip()));
    results.push((
        "AC2 first-quantized symmetrized pair bunches",
        first_quantized_bunching(),
    ));
    results.push((
        "AC3 intertwining fock_to_fq∘U_F = U^⊗N∘fock_to_fq",
        intertwining(),
    ));

    let start = Instant::now();
    let report = run_equivalence_suite(suite_config());
    let elapsed = start.elapsed();
    results.push((
        "AC4 cross-engine equivalence suite",
        equivalence_suite(&report, elapsed),
    ));
    results.push(("AC5 permanent kernel (Ryser vs naive)", permanent_kernel()));
    results.push((
        "AC6 symmetry of surviving particles",
        symmetry_preservation(&report),
    ));

    let mut failed = 0;
    for (name, outcome) in &results {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    let certified = results[2].1.pass && results[3].1.pass;
    println!(
        "[N/A ] AC7 universality corollary: not checkable at desk scale; \
         substitute AC3+AC4 {}",
        if certified { "passed" } else { "did not pass" }
    );
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
