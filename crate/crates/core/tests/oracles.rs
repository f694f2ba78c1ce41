mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xxz_core::analytic::*;
use xxz_core::entanglement::{negativity, pure_negativity, Bipartition, EPS_NEG};
use xxz_core::spectral::{eigendecompose, thermal_state, DensityMatrix};
use xxz_core::spinchain::{build_hamiltonian, ChainSpec, Topology};

fn weights(n: usize, v_sign: f64, delta: f64, b_bar: f64, t: f64) -> SpinSectorWeights {
    let spec = ChainSpec::reduced(n, Topology::CyclicNn, v_sign, delta, b_bar).unwrap();
    thermal_weights(&spec, t).unwrap()
}

#[test]
fn library_hamiltonian_matches_brute_force() {
    for (n, topology) in [(2, Topology::CyclicNn), (3, Topology::CyclicNn), (5, Topology::CyclicNn), (4, Topology::FullyConnected)] {
        let spec = ChainSpec::new(n, topology, -0.8, 1.3, 0.45).unwrap();
        let edges = match topology {
            Topology::FullyConnected => common::all_pairs(n),
            _ => common::ring_edges(n),
        };
        let reference = common::hamiltonian(n, &edges, -0.8, 1.3, 0.45);
        let built = build_hamiltonian(&spec).unwrap().to_dense();
        assert!((built - reference).amax() < 1e-14, "n={n} {topology}");
    }
}

#[test]
fn thermal_weights_rebuild_the_gibbs_state() {
    for (n, v, delta, b, t) in [(2, 1.0, 0.3, 0.5, 0.8), (2, -1.0, -2.0, 1.5, 0.2), (3, 1.0, 0.2, 0.6, 0.4), (3, -1.0, -1.0, 0.3, 1.7)] {
        let from_weights = weights(n, v, delta, b, t).to_density();
        let reference = common::gibbs(&common::ring(n, v, delta, b), t);
        assert!((from_weights.matrix() - reference).amax() < 1e-12, "n={n} v={v} Δ={delta}");
    }
}

#[test]
fn three_qubit_random_point_against_dense_path() {
    let p = match weights(3, 1.0, 0.2, 0.6, 0.4) {
        SpinSectorWeights::Three(p) => p,
        _ => unreachable!(),
    };
    let rho = common::gibbs(&common::ring(3, 1.0, 0.2, 0.6), 0.4);
    let dense = common::negativity(&rho, 0b001);
    assert!((three_qubit_global_negativity(&p) - dense).abs() < 1e-12);
    assert!(dense > 0.0);
}

/// A strict inequality and a thresholded numerical value can only disagree
/// when the exact negativity is positive but below `ε_neg`.
fn disagree(condition: bool, exact: f64, dense: f64) -> bool {
    let numeric = dense > EPS_NEG;
    condition != numeric && !(condition && exact <= EPS_NEG)
}

#[test]
fn closed_forms_against_dense_oracle_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut mismatched_conditions = Vec::new();
    for _ in 0..200 {
        let n = if rng.gen_bool(0.5) { 2 } else { 3 };
        let v = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let delta = rng.gen_range(-6.0..2.0);
        let t = rng.gen_range(1e-3..3.0);
        let b_bar = rng.gen_range(0.0..2.0);
        let rho = common::gibbs(&common::ring(n, v, delta, b_bar), t);
        match weights(n, v, delta, b_bar, t) {
            SpinSectorWeights::Two(p) => {
                let dense = common::negativity(&rho, 0b01);
                let exact = two_qubit_negativity(&p);
                assert!((exact - dense).abs() < 1e-9);
                if disagree(two_qubit_entangled(&p), exact, dense) {
                    mismatched_conditions.push((n, v, delta, t, b_bar, dense));
                }
            }
            SpinSectorWeights::Three(p) => {
                let global = common::negativity(&rho, 0b001);
                let exact = three_qubit_global_negativity(&p);
                assert!((exact - global).abs() < 1e-9);
                if disagree(three_qubit_global_condition(&p), exact, global) {
                    mismatched_conditions.push((n, v, delta, t, b_bar, global));
                }
                let pair = common::reduced_negativity(&rho, 3, 0b011, 0b001);
                let exact = two_qubit_negativity(&reduce_weights_3to2(&p));
                assert!((exact - pair).abs() < 1e-9);
                if disagree(pair_condition_n3(&p), exact, pair) {
                    mismatched_conditions.push((n, v, delta, t, b_bar, pair));
                }
            }
        }
    }
    assert!(mismatched_conditions.is_empty(), "{mismatched_conditions:?}");
}

#[test]
fn condition_agrees_with_reduced_weights_on_random_populations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let raw: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0f64).powi(3)).collect();
        let z = raw[..4].iter().sum::<f64>() + 2.0 * (raw[4] + raw[5]);
        let p = ThreeQubitWeights {
            quartet: [raw[0] / z, raw[1] / z, raw[2] / z, raw[3] / z],
            doublet: [raw[4] / z, raw[5] / z],
        };
        let pair = reduce_weights_3to2(&p);
        assert!((pair.total() - 1.0).abs() < 1e-12);
        assert_eq!(pair_condition_n3(&p), two_qubit_entangled(&pair));
        assert_eq!(two_qubit_entangled(&pair), two_qubit_negativity(&pair) > 0.0);
        assert_eq!(three_qubit_global_condition(&p), three_qubit_global_negativity(&p) > 0.0);
    }
}

#[test]
fn reduction_commutes_with_partial_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let raw: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
        let z = raw[..4].iter().sum::<f64>() + 2.0 * (raw[4] + raw[5]);
        let p = ThreeQubitWeights {
            quartet: [raw[0] / z, raw[1] / z, raw[2] / z, raw[3] / z],
            doublet: [raw[4] / z, raw[5] / z],
        };
        let full = p.to_density();
        let direct = reduce_weights_3to2(&p).to_density();
        for keep in [0b011, 0b101, 0b110] {
            let traced = common::partial_trace(full.matrix(), 3, keep);
            assert!((traced - direct.matrix()).amax() < 1e-12);
        }
    }
}

#[test]
fn border_consistency() {
    let eps = 1e-4;
    for t in [0.05, 0.2, 0.5, 1.0, 2.0, 3.0] {
        let d = border_n2(t).unwrap();
        for b in [0.0, 0.7] {
            for v in [1.0, -1.0] {
                let at = |delta| match weights(2, v, delta, b, t) {
                    SpinSectorWeights::Two(p) => two_qubit_entangled(&p),
                    _ => unreachable!(),
                };
                assert!(at(d - eps) && !at(d + eps), "n=2 t={t} b={b} v={v}");
            }
        }
        for v in [1.0, -1.0] {
            let d = border_n3_global(t, v).unwrap();
            for b in [0.0, 1.2] {
                let at = |delta| match weights(3, v, delta, b, t) {
                    SpinSectorWeights::Three(p) => three_qubit_global_condition(&p),
                    _ => unreachable!(),
                };
                assert!(at(d - eps) && !at(d + eps), "n=3 global t={t} b={b} v={v}");
            }
        }
        for (v, b) in [(1.0, 0.0), (1.0, 0.8), (-1.0, 0.8), (-1.0, 2.5)] {
            let at = |delta| match weights(3, v, delta, b, t) {
                SpinSectorWeights::Three(p) => pair_condition_n3(&p),
                _ => unreachable!(),
            };
            match border_n3_pair(t, b, v).unwrap() {
                Some(d) => assert!(at(d - eps) && !at(d + eps), "n=3 pair t={t} b={b} v={v}"),
                None => {
                    for delta in [-50.0, -5.0, 0.0, 1.0] {
                        assert!(!at(delta), "pair entangled past the saturation point t={t} b={b} v={v} Δ={delta}");
                    }
                }
            }
        }
    }
}

#[test]
fn state14_against_explicit_vector() {
    let n = 4;
    for delta in [-3.0, 0.0, 0.5, 1.5, 3.0, 5.0] {
        let (state, bundle) = state14(delta);
        let psi = state.vector();
        let h = common::ring(4, 1.0, delta, 0.0);
        let residual = &h * &psi - &psi * state.energy();
        assert!(residual.amax() < 1e-12, "Δ={delta}");
        let rho = DensityMatrix::pure(n, &psi).unwrap();
        for (label, expected) in bundle.entries() {
            let split = Bipartition::parse(label, n).unwrap();
            let numeric = negativity(&rho, &split, EPS_NEG).unwrap().value;
            assert!((numeric - expected).abs() < 1e-12, "Δ={delta} {label}: {numeric} vs {expected}");
            if split.is_global() {
                assert!((pure_negativity(&psi, &split).unwrap() - expected).abs() < 1e-12);
            }
        }
    }
    // The family is the ground state of the ring below the aligned region.
    for delta in [-3.0, 0.0, 0.5] {
        let ground = common::ring(4, 1.0, delta, 0.0).symmetric_eigen().eigenvalues.min();
        assert!((ground - state14(delta).0.energy()).abs() < 1e-12);
    }
}

#[test]
fn point_values() {
    let w = ThreeQubitWeights { quartet: [0.0, 0.0, 1.0, 0.0], doublet: [0.0, 0.0] };
    assert!((three_qubit_global_negativity(&w) - 2f64.sqrt() / 3.0).abs() < 1e-12);

    // b = 0, v > 0, T -> 0: equal mixture of |3/2, ±1/2>.
    let rho = common::gibbs(&common::ring(3, 1.0, -1.0, 0.0), 1e-3);
    assert!((common::negativity(&rho, 0b001) - (3f64.sqrt() - 1.0) / 3.0).abs() < 1e-9);
    assert!((common::reduced_negativity(&rho, 3, 0b011, 0b001) - 1.0 / 6.0).abs() < 1e-9);

    // v < 0, small b > 0: equal mixture of the two M = -1/2 doublet states.
    let rho = common::gibbs(&common::ring(3, -1.0, 0.0, 0.01), 1e-4);
    assert!((common::negativity(&rho, 0b001) - 2f64.sqrt() / 6.0).abs() < 1e-9);
    assert!((common::reduced_negativity(&rho, 3, 0b011, 0b001) - (2f64.sqrt() - 1.0) / 6.0).abs() < 1e-9);

    // Four-qubit W state with one flipped spin.
    let mut w4 = nalgebra::DVector::zeros(16);
    for s in 0..4 {
        w4[1 << s] = 0.5;
    }
    let rho = DensityMatrix::pure(4, &w4).unwrap();
    let value = |label| negativity(&rho, &Bipartition::parse(label, 4).unwrap(), EPS_NEG).unwrap().value;
    assert!((value("a-bcd") - 3f64.sqrt() / 4.0).abs() < 1e-12);
    assert!((value("ab-cd") - 0.5).abs() < 1e-12);
    assert!((value("ac-bd") - 0.5).abs() < 1e-12);
}

#[test]
fn library_thermal_negativity_matches_oracle_for_larger_rings() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [4, 5, 6] {
        for _ in 0..4 {
            let delta = rng.gen_range(-3.0..2.0);
            let b = rng.gen_range(0.0..2.0);
            let t = rng.gen_range(0.05..2.0);
            let spec = ChainSpec::reduced(n, Topology::CyclicNn, 1.0, delta, b).unwrap();
            let rho = thermal_state(&eigendecompose(&build_hamiltonian(&spec).unwrap()).unwrap(), t).unwrap();
            let reference = common::gibbs(&common::ring(n, 1.0, delta, b), t);
            assert!((rho.matrix() - &reference).amax() < 1e-12);
            let a = rng.gen_range(1..(1u32 << n) - 1);
            let split = Bipartition::global(n, a).unwrap();
            let lib = negativity(&rho, &split, EPS_NEG).unwrap().value;
            assert!((lib - common::negativity(&reference, a as usize)).abs() < 1e-10);
            let pair = Bipartition::parse("a-c", n).unwrap();
            let lib = negativity(&rho, &pair, EPS_NEG).unwrap().value;
            assert!((lib - common::reduced_negativity(&reference, n, 0b101, 0b001)).abs() < 1e-10);
        }
    }
}
