//! In-place gate kernels over dense amplitude buffers.
//!
//! Qubit `q` of an `nq`-qubit register addresses bit `nq - 1 - q` of the
//! basis index, so qubit 0 is the most significant bit.

use num_complex::Complex64 as C64;

#[inline]
pub(crate) fn bit_of(nq: u32, q: usize) -> usize {
    1usize << (nq as usize - 1 - q)
}

/// Row-major 2x2 matrix on qubit `q`.
pub(crate) fn apply_1q(amps: &mut [C64], nq: u32, q: usize, m: &[C64; 4]) {
    let mask = bit_of(nq, q);
    for i0 in 0..amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        let a0 = amps[i0];
        let a1 = amps[i1];
        amps[i0] = m[0] * a0 + m[1] * a1;
        amps[i1] = m[2] * a0 + m[3] * a1;
    }
}

/// Row-major 4x4 matrix on `(q0, q1)`; `q0` is the high bit of the local
/// two-qubit index.
pub(crate) fn apply_2q(amps: &mut [C64], nq: u32, q0: usize, q1: usize, m: &[C64; 16]) {
    let m0 = bit_of(nq, q0);
    let m1 = bit_of(nq, q1);
    for base in 0..amps.len() {
        if base & (m0 | m1) != 0 {
            continue;
        }
        let idx = [base, base | m1, base | m0, base | m0 | m1];
        let a = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (r, &ir) in idx.iter().enumerate() {
            amps[ir] = m[4 * r] * a[0] + m[4 * r + 1] * a[1] + m[4 * r + 2] * a[2] + m[4 * r + 3] * a[3];
        }
    }
}

pub(crate) fn apply_h(amps: &mut [C64], nq: u32, q: usize) {
    let mask = bit_of(nq, q);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i0 in 0..amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        let a0 = amps[i0];
        let a1 = amps[i1];
        amps[i0] = (a0 + a1) * s;
        amps[i1] = (a0 - a1) * s;
    }
}

/// Multiplies every amplitude whose bits are all set on `qubits` by `phase`.
pub(crate) fn apply_phase_mask(amps: &mut [C64], mask: usize, phase: C64) {
    for (i, a) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *a *= phase;
        }
    }
}

pub(crate) fn apply_swap(amps: &mut [C64], nq: u32, q0: usize, q1: usize) {
    let m0 = bit_of(nq, q0);
    let m1 = bit_of(nq, q1);
    for i in 0..amps.len() {
        if i & m0 != 0 && i & m1 == 0 {
            amps.swap(i, (i & !m0) | m1);
        }
    }
}

/// `e^{i angle}` with the angle reduced modulo `2 pi` first.
pub(crate) fn phase(angle: f64) -> C64 {
    let a = angle.rem_euclid(2.0 * std::f64::consts::PI);
    C64::from_polar(1.0, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn one_qubit_kernel_matches_hadamard() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = [c(s), c(s), c(s), c(-s)];
        let mut a = vec![c(0.3), c(0.4), C64::new(0.0, 0.5), c(0.1)];
        let mut b = a.clone();
        apply_1q(&mut a, 2, 1, &h);
        apply_h(&mut b, 2, 1);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn swap_kernel_exchanges_bits() {
        let mut a: Vec<C64> = (0..8).map(|i| c(i as f64)).collect();
        apply_swap(&mut a, 3, 0, 2);
        // index 0b100 <-> 0b001, 0b110 <-> 0b011
        assert_eq!(a[1], c(4.0));
        assert_eq!(a[4], c(1.0));
        assert_eq!(a[3], c(6.0));
        assert_eq!(a[2], c(2.0));
    }

    #[test]
    fn two_qubit_swap_matrix_agrees() {
        let z = c(0.0);
        let o = c(1.0);
        let sw = [o, z, z, z, z, z, o, z, z, o, z, z, z, z, z, o];
        let mut a: Vec<C64> = (0..8).map(|i| C64::new(i as f64, -(i as f64))).collect();
        let mut b = a.clone();
        apply_2q(&mut a, 3, 0, 2, &sw);
        apply_swap(&mut b, 3, 0, 2);
        assert_eq!(a, b);
    }
}
