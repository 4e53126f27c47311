//! The gate-built step against independent dense constructions.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sawtooth::circuit::{
    apply_circuit, build_qft, build_step_circuit, build_step_circuit_from, circuit_unitary, uk_angles, ut_angles,
    Circuit, Gate, GateKind,
};
use sawtooth::exact::{exact_step, exact_step_unitary};
use sawtooth::{basis_state, MapParams, StateVector};

/// `F[y, x] = e^{2 pi i x y / N} / sqrt(N)` built entrywise.
fn dft_matrix(dim: usize, sign: f64) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |y, x| {
        C64::from_polar(1.0 / (dim as f64).sqrt(), sign * 2.0 * PI * (x * y) as f64 / dim as f64)
    })
}

fn bit_reversal(dim: usize) -> DMatrix<C64> {
    let n = dim.trailing_zeros();
    DMatrix::from_fn(dim, dim, |r, c| {
        let rev = c.reverse_bits() >> (usize::BITS - n);
        if r == rev {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Dense `U_k` in the momentum basis from the kernel `<theta_b|m> = e^{i m theta_b}/sqrt(N)`.
fn dense_kick(p: &MapParams) -> DMatrix<C64> {
    let dim = p.dim;
    let half = (dim / 2) as f64;
    let kernel = DMatrix::from_fn(dim, dim, |b, bm| {
        let theta = 2.0 * PI * b as f64 / dim as f64;
        C64::from_polar(1.0 / (dim as f64).sqrt(), (bm as f64 - half) * theta)
    });
    let diag = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            let theta = 2.0 * PI * r as f64 / dim as f64;
            C64::from_polar(1.0, p.k * (theta - PI).powi(2) / 2.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    kernel.adjoint() * diag * kernel
}

fn dense_rotation(p: &MapParams) -> DMatrix<C64> {
    let dim = p.dim;
    DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            let m = r as f64 - (dim / 2) as f64;
            C64::from_polar(1.0, -p.period * m * m / 2.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn max_entry_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn qft_matches_dft_matrix() {
    for n in 1..=5u32 {
        let dim = 1usize << n;
        let f = dft_matrix(dim, 1.0);
        let forward = circuit_unitary(&build_qft(n, false)).unwrap();
        assert!(max_entry_distance(forward.matrix(), &f) < 1e-12, "n={n}");

        // gates alone leave the output bit-reversed
        let gates_only =
            Circuit::from_parts(n, build_qft(n, false).gates().to_vec(), (0..n as usize).collect()).unwrap();
        let g = circuit_unitary(&gates_only).unwrap();
        assert!(max_entry_distance(&(bit_reversal(dim) * g.matrix()), &f) < 1e-12);

        let inverse = circuit_unitary(&build_qft(n, true)).unwrap();
        assert!(max_entry_distance(inverse.matrix(), &f.adjoint()) < 1e-12, "n={n}");
    }
}

#[test]
fn kick_only_matches_dense_kernel_product() {
    let p = MapParams::from_kick(3, 1.5 / (2.0 * PI * 7.0 / 8.0), 0.0).unwrap();
    let psi = basis_state(&p, 0).unwrap();
    let out = exact_step(&psi, &p).unwrap();
    let dense = dense_kick(&p);
    for b in 0..8 {
        let expected = dense[(b, 4)];
        assert!((out.amplitudes()[b] - expected).norm() < 1e-12);
    }
}

#[test]
fn exact_unitary_factorizes_into_dense_factors() {
    for (n, l, k) in [(3, 7, 1.5), (4, 3, 2.5), (2, 1, -0.7)] {
        let p = MapParams::from_chaos(n, l, k).unwrap();
        let u = exact_step_unitary(&p).unwrap();
        let dense = dense_rotation(&p) * dense_kick(&p);
        assert!(max_entry_distance(u.matrix(), &dense) < 1e-12);
    }
    // single-factor limits
    let p = MapParams::from_kick(3, 0.0, 1.3).unwrap();
    assert!(max_entry_distance(exact_step_unitary(&p).unwrap().matrix(), &dense_rotation(&p)) < 1e-12);
    let p = MapParams::from_kick(3, 0.8, 0.0).unwrap();
    assert!(max_entry_distance(exact_step_unitary(&p).unwrap().matrix(), &dense_kick(&p)) < 1e-12);
}

#[test]
fn standard_circuit_equals_oracle() {
    let p = MapParams::standard();
    let c = build_step_circuit(&p);
    let d = circuit_unitary(&c)
        .unwrap()
        .aligned_distance(&exact_step_unitary(&p).unwrap());
    assert!(d < 1e-10, "distance {d:e}");
}

#[test]
fn randomized_equivalence_all_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 1..=6u32 {
        for _ in 0..10 {
            let l = rng.random_range(1..=(1i64 << n) * 2);
            let k = rng.random_range(-6.0..6.0);
            let p = MapParams::from_chaos(n, l, k).unwrap();
            let d = circuit_unitary(&build_step_circuit(&p))
                .unwrap()
                .aligned_distance(&exact_step_unitary(&p).unwrap());
            assert!(d < 1e-9, "n={n} l={l} K={k} distance {d:e}");
        }
    }
}

#[test]
fn corrupted_angle_breaks_equivalence() {
    let p = MapParams::standard();
    let mut kick = uk_angles(&p);
    kick.p[1] += 0.05;
    let c = build_step_circuit_from(3, &kick, &ut_angles(&p));
    let d = circuit_unitary(&c)
        .unwrap()
        .aligned_distance(&exact_step_unitary(&p).unwrap());
    assert!(d > 1e-3);
}

#[test]
fn gate_count_identity() {
    for n in 1..=8u32 {
        let p = MapParams::from_chaos(n, 3, 1.5).unwrap();
        let c = build_step_circuit(&p);
        let n = n as usize;
        assert_eq!(c.count(GateKind::H), 2 * n);
        assert_eq!(c.count(GateKind::P), 2 * n);
        assert_eq!(c.count(GateKind::CP), 2 * (n * n - n));
        assert_eq!(c.count(GateKind::SWAP), 0);
        assert_eq!(c.relabel(), (0..n).collect::<Vec<_>>().as_slice());
    }
}

#[test]
fn diagonal_block_order_is_irrelevant() {
    let p = MapParams::standard();
    let kick = uk_angles(&p);
    let reference = circuit_unitary(&build_step_circuit(&p)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        // shuffle the kick block's gates
        let mut block: Vec<Gate> = kick.to_circuit(3).gates().to_vec();
        for i in (1..block.len()).rev() {
            block.swap(i, rng.random_range(0..=i));
        }
        let shuffled = Circuit::from_parts(3, block, vec![0, 1, 2]).unwrap();
        let mut c = build_qft(3, false);
        c.append(&shuffled).unwrap();
        c.append(&build_qft(3, true)).unwrap();
        c.append(&ut_angles(&p).to_circuit(3)).unwrap();
        let u = circuit_unitary(&c).unwrap();
        assert!(max_entry_distance(u.matrix(), reference.matrix()) < 1e-12);
    }
}

#[test]
fn composition_matches_unitary_power() {
    let p = MapParams::from_chaos(4, 5, 2.0).unwrap();
    let u = exact_step_unitary(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let amps: Vec<C64> = (0..16)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut a = StateVector::normalized(amps).unwrap();
    let mut b = a.clone();
    for _ in 0..20 {
        a = exact_step(&a, &p).unwrap();
        b = u.apply(&b).unwrap();
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }
    let d = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    assert!(d < 1e-10);
}

fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n);
    while b == a {
        b = rng.random_range(0..n);
    }
    match rng.random_range(0..4) {
        0 => Gate::H(a),
        1 => Gate::P(a, rng.random_range(-7.0..7.0)),
        2 => Gate::cp(a, b, rng.random_range(-7.0..7.0)),
        _ => Gate::swap(a, b),
    }
}

/// Dense single-gate matrices assembled by Kronecker products.
fn dense_gate(g: &Gate, n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    DMatrix::from_fn(dim, dim, |r, c| {
        let z = C64::new(0.0, 0.0);
        match *g {
            Gate::H(q) => {
                if r & !bit(q) != c & !bit(q) {
                    return z;
                }
                let s = std::f64::consts::FRAC_1_SQRT_2;
                if r & bit(q) != 0 && c & bit(q) != 0 {
                    C64::new(-s, 0.0)
                } else {
                    C64::new(s, 0.0)
                }
            }
            Gate::P(q, t) => {
                if r != c {
                    z
                } else if r & bit(q) != 0 {
                    C64::from_polar(1.0, t)
                } else {
                    C64::new(1.0, 0.0)
                }
            }
            Gate::CP(a, b, t) => {
                if r != c {
                    z
                } else if r & bit(a) != 0 && r & bit(b) != 0 {
                    C64::from_polar(1.0, t)
                } else {
                    C64::new(1.0, 0.0)
                }
            }
            Gate::Swap(a, b) => {
                let ba = (c & bit(a) != 0) as usize;
                let bb = (c & bit(b) != 0) as usize;
                let swapped =
                    (c & !(bit(a) | bit(b))) | if bb == 1 { bit(a) } else { 0 } | if ba == 1 { bit(b) } else { 0 };
                if r == swapped {
                    C64::new(1.0, 0.0)
                } else {
                    z
                }
            }
        }
    })
}

#[test]
fn random_circuits_match_dense_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let gates: Vec<Gate> = (0..20).map(|_| random_gate(&mut rng, 3)).collect();
        let c = Circuit::from_parts(3, gates.clone(), vec![0, 1, 2]).unwrap();
        let dense = gates
            .iter()
            .fold(DMatrix::identity(8, 8), |acc, g| dense_gate(g, 3) * acc);
        let amps: Vec<C64> = (0..8)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let psi = StateVector::normalized(amps).unwrap();
        let out = apply_circuit(&psi, &c).unwrap();
        let expected = &dense * nalgebra::DVector::from_column_slice(psi.amplitudes());
        for (x, y) in out.amplitudes().iter().zip(expected.iter()) {
            assert!((x - y).norm() < 1e-10);
        }
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        let u = circuit_unitary(&c).unwrap();
        assert!(u.unitarity_error() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn append_composes_unitaries(seed in any::<u64>(), perm_a in Just(vec![2usize, 0, 1]), perm_b in Just(vec![1usize, 2, 0])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ga: Vec<Gate> = (0..6).map(|_| random_gate(&mut rng, 3)).collect();
        let gb: Vec<Gate> = (0..6).map(|_| random_gate(&mut rng, 3)).collect();
        let a = Circuit::from_parts(3, ga, perm_a).unwrap();
        let b = Circuit::from_parts(3, gb, perm_b).unwrap();
        let mut ab = a.clone();
        ab.append(&b).unwrap();
        let ua = circuit_unitary(&a).unwrap();
        let ub = circuit_unitary(&b).unwrap();
        let uab = circuit_unitary(&ab).unwrap();
        prop_assert!(max_entry_distance(uab.matrix(), &(ub.matrix() * ua.matrix())) < 1e-12);
    }
}
