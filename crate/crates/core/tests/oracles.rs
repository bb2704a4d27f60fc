//! Independent oracles: brute-force permutation sums, naive matrix products
//! and direct tensor contractions, checked against the engines.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use klmsim::equivalence::{
    fock_to_fq, fq_to_fock, permanent_naive, permanent_ryser, transition_amplitude_oracle,
    ComplexMatrix,
};
use klmsim::firstq::{self, permanent_state};
use klmsim::fock::{self, fock_sector};
use klmsim::random::{random_fock_vector, random_unitary};
use klmsim::{
    compile_segment, Complex64, Element, FirstQState, FockBasisState, FockVector, ModeIndex,
    ModeUnitary, SymmetrizedAssignment,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// All permutations of `0..n` via Heap's algorithm.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..n).collect();
    heap(n, &mut a, &mut out);
    out
}

fn brute_permanent(m: &ComplexMatrix) -> Complex64 {
    let n = m.nrows();
    permutations(n)
        .iter()
        .map(|s| (0..n).map(|i| m[(i, s[i])]).product::<Complex64>())
        .sum()
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    DMatrix::from_fn(n, n, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

// ---------------------------------------------------------------- permanents

#[test]
fn naive_permanent_matches_heap_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 0..=6 {
        let m = random_matrix(n, &mut rng);
        let a = permanent_naive(&m).unwrap();
        let b = brute_permanent(&m);
        assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "n={n}");
    }
}

#[test]
fn ryser_matches_naive_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..200 {
        let n = 1 + trial % 8;
        let m = random_matrix(n, &mut rng);
        let naive = permanent_naive(&m).unwrap();
        let ryser = permanent_ryser(&m).unwrap();
        assert!(
            (naive - ryser).norm() / naive.norm() < 1e-9,
            "trial {trial}, n={n}"
        );
    }
}

#[test]
fn ryser_identity_and_all_ones_are_exact() {
    for n in 1..=8 {
        let id = DMatrix::<Complex64>::identity(n, n);
        assert_eq!(permanent_ryser(&id).unwrap(), c(1.0, 0.0));
        let ones = DMatrix::from_element(n, n, c(1.0, 0.0));
        assert_eq!(permanent_ryser(&ones).unwrap(), c(factorial(n), 0.0));
    }
}

// ---------------------------------------------------------------- circuits

/// Embedded m×m matrix of one linear element, written out entrywise.
fn embedded(element: &Element, m: usize) -> Vec<Vec<Complex64>> {
    let mut e = vec![vec![c(0.0, 0.0); m]; m];
    for (i, row) in e.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    match element {
        Element::Beamsplitter(b) => {
            let (a, bb) = (b.mode_a.0, b.mode_b.0);
            e[a][a] = c(b.theta.cos(), 0.0);
            e[a][bb] = c(b.theta.sin() * b.phi.cos(), b.theta.sin() * b.phi.sin());
            e[bb][a] = c(b.theta.sin() * b.phi.cos(), -b.theta.sin() * b.phi.sin());
            e[bb][bb] = c(-b.theta.cos(), 0.0);
        }
        Element::PhaseShifter(p) => e[p.mode.0][p.mode.0] = c(p.phase.cos(), p.phase.sin()),
        _ => unreachable!(),
    }
    e
}

fn matmul(x: &[Vec<Complex64>], y: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = x.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j] += x[i][k] * y[k][j];
            }
        }
    }
    out
}

fn naive_compile(elements: &[Element], m: usize) -> Vec<Vec<Complex64>> {
    let mut u = embedded(&Element::ps(0, 0.0), m);
    for e in elements {
        u = matmul(&embedded(e, m), &u);
    }
    u
}

#[test]
fn compile_segment_matches_naive_product() {
    let phi = 0.83;
    let segment = [Element::ps(0, phi), Element::bs(0, 1, FRAC_PI_4, 0.0)];
    let u = compile_segment(&segment, 3).unwrap();
    let oracle = naive_compile(&segment, 3);
    for i in 0..3 {
        for j in 0..3 {
            assert!((u.entry(i, j) - oracle[i][j]).norm() < 1e-15);
        }
    }
    assert!(u.unitarity_defect() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let m = rng.random_range(2..=6);
        let segment: Vec<Element> = (0..rng.random_range(0..30))
            .map(|_| {
                if rng.random_bool(0.6) {
                    let a = rng.random_range(0..m);
                    let b = (a + rng.random_range(1..m)) % m;
                    Element::bs(a, b, rng.random_range(0.0..TAU), rng.random_range(0.0..TAU))
                } else {
                    Element::ps(rng.random_range(0..m), rng.random_range(0.0..TAU))
                }
            })
            .collect();
        let u = compile_segment(&segment, m).unwrap();
        let oracle = naive_compile(&segment, m);
        for i in 0..m {
            for j in 0..m {
                assert!((u.entry(i, j) - oracle[i][j]).norm() < 1e-12);
            }
        }
        assert!(u.unitarity_defect() < 1e-12);
    }
}

// ---------------------------------------------------------------- Fock engine

#[test]
fn three_photon_amplitudes_are_permanents() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let u = random_unitary(3, &mut rng);
    let out = fock::apply_unitary(&FockVector::basis(vec![1, 1, 1]), &u).unwrap();
    for occ in fock_sector(3, 3) {
        // Rows repeated by output occupation, columns 0,1,2 once each.
        let rows: Vec<usize> = occ
            .0
            .iter()
            .enumerate()
            .flat_map(|(k, &n)| std::iter::repeat_n(k, n as usize))
            .collect();
        let sub = DMatrix::from_fn(3, 3, |i, j| u.entry(rows[i], j));
        let norm: f64 = occ
            .0
            .iter()
            .map(|&n| factorial(n as usize))
            .product::<f64>()
            .sqrt();
        let expected = brute_permanent(&sub) / norm;
        assert!((out.amplitude(&occ.0) - expected).norm() < 1e-12, "{occ}");
    }
}

#[test]
fn apply_unitary_agrees_with_transition_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for m in 1..=5 {
        for photons in 0..=3u32 {
            let u = random_unitary(m, &mut rng);
            for input in fock_sector(m, photons) {
                let out = fock::apply_unitary(&FockVector::basis(input.0.clone()), &u).unwrap();
                for output in fock_sector(m, photons) {
                    let oracle = transition_amplitude_oracle(&u, &input, &output).unwrap();
                    assert!(
                        (out.amplitude(&output.0) - oracle).norm() < 1e-10,
                        "m={m} {input} -> {output}"
                    );
                }
            }
        }
    }
}

#[test]
fn transition_oracle_matches_naive_permanent_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let u = random_unitary(4, &mut rng);
    let input = FockBasisState(vec![2, 0, 1, 1]);
    let output = FockBasisState(vec![0, 3, 0, 1]);
    let rows = [1, 1, 1, 3];
    let cols = [0, 0, 2, 3];
    let sub = DMatrix::from_fn(4, 4, |i, j| u.entry(rows[i], cols[j]));
    let expected = permanent_naive(&sub).unwrap() / (2.0f64 * 6.0).sqrt();
    let got = transition_amplitude_oracle(&u, &input, &output).unwrap();
    assert!((got - expected).norm() < 1e-12);
}

#[test]
fn fock_evolution_conserves_photons_and_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..50 {
        let m = rng.random_range(1..=5);
        let photons = rng.random_range(0..=3);
        let v = random_fock_vector(m, photons, &mut rng);
        let u = random_unitary(m, &mut rng);
        let out = fock::apply_unitary(&v, &u).unwrap();
        assert!(out.iter().all(|(k, _)| k.photon_number() == photons));
        assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        for mode in 0..m {
            let branches = fock::detect(&out, ModeIndex(mode)).unwrap();
            let total: f64 = branches.iter().map(|b| b.probability).sum();
            assert!((total - 1.0).abs() < 1e-10);
            for b in &branches {
                assert!((b.state.norm_sqr() - 1.0).abs() < 1e-10);
                assert_eq!(b.state.photon_number(), photons - b.count);
                assert!(b.state.iter().all(|(k, _)| k.0[mode] == 0));
            }
        }
    }
}

// ---------------------------------------------------------------- first quantization

/// `(1/√(n!·Π n_j!)) Σ_σ |modes[σ(0)]⟩…|modes[σ(n−1)]⟩` by explicit
/// permutation sum.
fn brute_permanent_state(modes: &[usize], m: usize) -> Vec<Complex64> {
    let n = modes.len();
    let mut tensor = vec![c(0.0, 0.0); m.pow(n as u32)];
    let mut multiplicity = vec![0usize; m];
    for &k in modes {
        multiplicity[k] += 1;
    }
    let norm = (factorial(n) * multiplicity.iter().map(|&k| factorial(k)).product::<f64>()).sqrt();
    for sigma in permutations(n) {
        let index = sigma.iter().fold(0, |acc, &s| acc * m + modes[s]);
        tensor[index] += c(1.0 / norm, 0.0);
    }
    tensor
}

#[test]
fn permanent_state_matches_permutation_sum() {
    let cases: [(&[usize], usize); 6] = [
        (&[0, 1], 2),
        (&[0], 1),
        (&[0, 1, 2], 3),
        (&[0, 0], 2),
        (&[2, 0, 2], 3),
        (&[1, 3, 0, 1], 4),
    ];
    for (modes, m) in cases {
        let s = permanent_state(&SymmetrizedAssignment::new(modes), m).unwrap();
        let oracle = brute_permanent_state(modes, m);
        for (a, b) in s.amplitudes().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-15, "{modes:?}");
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn permanent_state_contracts_to_permanent() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 1..=4usize {
        for _ in 0..10 {
            let m = rng.random_range(n.max(2)..=5);
            let modes: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
            let state = permanent_state(&SymmetrizedAssignment::new(&modes), m).unwrap();
            let phis: Vec<Vec<Complex64>> = (0..n)
                .map(|_| {
                    (0..m)
                        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            // ⟨φ_1|…⟨φ_n|Ψ⟩ by full contraction.
            let mut contraction = c(0.0, 0.0);
            for (index, a) in state.amplitudes().iter().enumerate() {
                let digits = state.decode(index);
                let bra: Complex64 = (0..n).map(|i| phis[i][digits[i]].conj()).product();
                contraction += bra * a;
            }
            let mat = DMatrix::from_fn(n, n, |i, j| phis[i][modes[j]].conj());
            let mut multiplicity = vec![0usize; m];
            for &k in &modes {
                multiplicity[k] += 1;
            }
            let norm =
                (factorial(n) * multiplicity.iter().map(|&k| factorial(k)).product::<f64>()).sqrt();
            let expected = brute_permanent(&mat) / norm;
            assert!((contraction - expected).norm() < 1e-12, "{modes:?}");
        }
    }
}

/// `ψ'[i_1…i_n] = Σ_j Π_p U[i_p][j_p] ψ[j_1…j_n]` over every index pair.
fn brute_evolve(state: &FirstQState, u: &ModeUnitary) -> Vec<Complex64> {
    let len = state.amplitudes().len();
    let n = state.particle_count();
    let mut out = vec![c(0.0, 0.0); len];
    for (i, slot) in out.iter_mut().enumerate() {
        let di = state.decode(i);
        for (j, a) in state.amplitudes().iter().enumerate() {
            let dj = state.decode(j);
            let w: Complex64 = (0..n).map(|p| u.entry(di[p], dj[p])).product();
            *slot += w * a;
        }
    }
    out
}

#[test]
fn evolve_matches_tensor_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..20 {
        let m = rng.random_range(2..=4);
        let photons = rng.random_range(1..=3);
        let v = random_fock_vector(m, photons, &mut rng);
        let state = fock_to_fq(&v).unwrap();
        let u = random_unitary(m, &mut rng);
        let out = firstq::evolve(&state, &u).unwrap();
        let oracle = brute_evolve(&state, &u);
        for (a, b) in out.amplitudes().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(out.symmetry_defect() < 1e-10);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn per_particle_phase_matches_fock_phase() {
    let phi = 0.77;
    let v = FockVector::from_terms(
        3,
        [(vec![2, 0, 0], c(0.6, 0.0)), (vec![0, 1, 1], c(0.0, 0.8))],
    )
    .unwrap();
    let fock_side = fock::phase_shift(&v, ModeIndex(0), phi).unwrap();
    assert!(
        (fock_side.amplitude(&[2, 0, 0]) - c(0.6, 0.0) * Complex64::from_polar(1.0, 2.0 * phi))
            .norm()
            < 1e-15
    );
    let fq_side = firstq::phase_all(&fock_to_fq(&v).unwrap(), ModeIndex(0), phi).unwrap();
    assert!(fq_to_fock(&fq_side).unwrap().distance(&fock_side) < 1e-14);
}

// ---------------------------------------------------------------- maps

#[test]
fn fock_to_fq_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..100 {
        let m = rng.random_range(1..=5);
        let photons = rng.random_range(1..=3);
        let v = random_fock_vector(m, photons, &mut rng);
        let fq = fock_to_fq(&v).unwrap();
        assert!(fq.symmetry_defect() < 1e-12);
        assert!((fq.norm_sqr() - 1.0).abs() < 1e-12);
        let back = fq_to_fock(&fq).unwrap();
        assert!(back.distance(&v) < 1e-10);
    }
}

#[test]
fn fock_to_fq_is_an_isometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..50 {
        let m = rng.random_range(1..=5);
        let photons = rng.random_range(1..=3);
        let a = random_fock_vector(m, photons, &mut rng);
        let b = random_fock_vector(m, photons, &mut rng);
        let fa = fock_to_fq(&a).unwrap();
        let fb = fock_to_fq(&b).unwrap();
        let tensor_inner: Complex64 = fa
            .amplitudes()
            .iter()
            .zip(fb.amplitudes())
            .map(|(x, y)| x.conj() * y)
            .sum();
        assert!((tensor_inner - a.inner(&b)).norm() < 1e-10);
    }
}

#[test]
fn detection_statistics_agree_across_engines() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..30 {
        let m = rng.random_range(2..=4);
        let v = random_fock_vector(m, 3, &mut rng);
        let fq = fock_to_fq(&v).unwrap();
        let mode = ModeIndex(rng.random_range(0..m));
        let fock_branches = fock::detect(&v, mode).unwrap();
        let fq_branches = firstq::detect_mode(&fq, mode).unwrap();
        assert_eq!(fock_branches.len(), fq_branches.len());
        for (a, b) in fock_branches.iter().zip(&fq_branches) {
            assert_eq!(a.count, b.count);
            assert!((a.probability - b.probability).abs() < 1e-10);
            assert!(b.state.symmetry_defect() < 1e-10);
            let mapped = fq_to_fock(&b.state).unwrap();
            assert!(mapped.phase_aligned_distance(&a.state) < 1e-10);
        }
    }
}

#[test]
fn intertwining_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..200 {
        let m = rng.random_range(1..=5);
        let photons = rng.random_range(1..=3);
        let v = random_fock_vector(m, photons, &mut rng);
        let u = random_unitary(m, &mut rng);
        let left = fock_to_fq(&fock::apply_unitary(&v, &u).unwrap()).unwrap();
        let right = firstq::evolve(&fock_to_fq(&v).unwrap(), &u).unwrap();
        assert!(left.distance(&right) < 1e-10);
    }
}

#[test]
fn per_particle_evolution_conserves_schmidt_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..20 {
        let m = rng.random_range(2..=4);
        let n = rng.random_range(2..=3);
        let modes: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
        let state = permanent_state(&SymmetrizedAssignment::new(&modes), m).unwrap();
        let u = random_unitary(m, &mut rng);
        let evolved = firstq::evolve(&state, &u).unwrap();
        for cut in [vec![0], vec![0, 1]] {
            if cut.len() >= n {
                continue;
            }
            let before = state.schmidt_coefficients(&cut);
            let after = evolved.schmidt_coefficients(&cut);
            for (a, b) in before.iter().zip(&after) {
                assert!((a - b).abs() < 1e-9, "{modes:?} cut {cut:?}");
            }
        }
    }
}

#[test]
fn bunched_pair_has_two_equal_schmidt_coefficients() {
    let s = permanent_state(&SymmetrizedAssignment::new(&[0, 1]), 2).unwrap();
    let bs = compile_segment(&[Element::bs(0, 1, FRAC_PI_4, 0.0)], 2).unwrap();
    let out = firstq::evolve(&s, &bs).unwrap();
    let sv = out.schmidt_coefficients(&[0]);
    assert!((sv[0] - sv[1]).abs() < 1e-12);
    let flipped = firstq::phase_all(&out, ModeIndex(1), PI).unwrap();
    assert!(flipped.symmetry_defect() < 1e-15);
}
