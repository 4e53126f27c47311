//! Direct Floquet evolution `psi -> U_T U_k psi` with fast Fourier transforms.
//!
//! Angle grid `theta_b = 2 pi b / N`, kernel `<theta_b|m> = e^{i m theta_b} / sqrt(N)`
//! with `m = index - N/2`. The momentum offset contributes a `(-1)^b` ramp on
//! the angle side of both transforms; the two ramps cancel around the diagonal
//! kick, so only the standard 0-based transform pair remains.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernels::phase;
use crate::params::MapParams;
use crate::state::{basis_state, MomentumDistribution, StateVector};

/// Largest dimension for dense unitary extraction.
pub const MAX_DENSE_DIM: usize = 64;

/// Dense one-step unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct StepUnitary {
    matrix: DMatrix<C64>,
}

impl StepUnitary {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::domain("step unitary must be square"));
        }
        let u = Self { matrix };
        let err = u.unitarity_error();
        if err > 1e-10 {
            return Err(Error::Invariant(format!("matrix is not unitary (error {err:e})")));
        }
        Ok(u)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        max_identity_deviation(&prod)
    }

    /// Max entrywise distance to `other` after removing the best global phase.
    pub fn aligned_distance(&self, other: &StepUnitary) -> f64 {
        aligned_distance(&self.matrix, &other.matrix)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::domain("state and unitary dimensions differ"));
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let out = &self.matrix * v;
        Ok(StateVector::from_raw(psi.n(), out.as_slice().to_vec()))
    }
}

pub(crate) fn max_identity_deviation(m: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let target = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((m[(r, c)] - target).norm());
        }
    }
    worst
}

/// Aligns `b` to `a` by the phase of `tr(b^dagger a)` and returns the max
/// entrywise distance.
pub fn aligned_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let ph = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * ph).norm())
        .fold(0.0, f64::max)
}

/// Reusable evolution plan for one parameter set.
pub struct ExactStepper {
    params: MapParams,
    kick: Vec<C64>,
    rotation: Vec<C64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl ExactStepper {
    pub fn new(params: &MapParams) -> Self {
        let dim = params.dim;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(dim);
        let inverse = planner.plan_fft_inverse(dim);
        let scratch =
            vec![C64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
        Self {
            params: *params,
            kick: kick_phases(params),
            rotation: rotation_phases(params),
            forward,
            inverse,
            scratch,
        }
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    /// One step in place on a raw amplitude buffer of length `N`.
    pub fn step_in_place(&mut self, amps: &mut [C64]) {
        // momentum -> angle: sum_b' e^{+2 pi i b b'/N}
        self.inverse.process_with_scratch(amps, &mut self.scratch);
        for (a, k) in amps.iter_mut().zip(&self.kick) {
            *a *= k;
        }
        // angle -> momentum: sum_b e^{-2 pi i b b'/N}
        self.forward.process_with_scratch(amps, &mut self.scratch);
        for (a, r) in amps.iter_mut().zip(&self.rotation) {
            *a *= r;
        }
    }

    pub fn step(&mut self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.params.dim {
            return Err(Error::domain(format!(
                "state dimension {} does not match parameters ({})",
                psi.dim(),
                self.params.dim
            )));
        }
        let mut amps = psi.amplitudes().to_vec();
        self.step_in_place(&mut amps);
        Ok(StateVector::from_raw(psi.n(), amps))
    }
}

/// `e^{i k (theta_b - pi)^2 / 2} / N`; the `1/N` carries both transform
/// normalizations.
fn kick_phases(params: &MapParams) -> Vec<C64> {
    let dim = params.dim;
    let norm = 1.0 / dim as f64;
    (0..dim)
        .map(|b| {
            let theta = 2.0 * PI * b as f64 / dim as f64;
            phase(params.k * (theta - PI).powi(2) / 2.0) * norm
        })
        .collect()
}

/// `e^{-i T m^2 / 2}`. With an integer `l`, `T m^2 / 2 = pi l m^2 / N` is
/// reduced exactly in integers.
fn rotation_phases(params: &MapParams) -> Vec<C64> {
    let dim = params.dim;
    let half = params.half_dim();
    (0..dim as i64)
        .map(|b| {
            let m = b - half;
            match params.l {
                Some(l) => {
                    let modulus = 2 * dim as i128;
                    let r = ((l as i128) * (m as i128) * (m as i128)).rem_euclid(modulus);
                    phase(-PI * r as f64 / dim as f64)
                }
                None => phase(-params.period * (m * m) as f64 / 2.0),
            }
        })
        .collect()
}

/// One exact step `U_T U_k psi`.
pub fn exact_step(psi: &StateVector, params: &MapParams) -> Result<StateVector> {
    ExactStepper::new(params).step(psi)
}

/// Dense matrix of one step, built column by column from basis states.
pub fn exact_step_unitary(params: &MapParams) -> Result<StepUnitary> {
    let dim = params.dim;
    if dim > MAX_DENSE_DIM {
        return Err(Error::Capability(format!(
            "dense unitary limited to N <= {MAX_DENSE_DIM}, got {dim}"
        )));
    }
    let mut stepper = ExactStepper::new(params);
    let mut matrix = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[col] = C64::new(1.0, 0.0);
        stepper.step_in_place(&mut amps);
        for (row, a) in amps.into_iter().enumerate() {
            matrix[(row, col)] = a;
        }
    }
    Ok(StepUnitary { matrix })
}

/// Distributions after `0..=steps` kicks from the delta at `m0`.
pub fn exact_evolve(params: &MapParams, m0: i64, steps: usize) -> Result<Vec<MomentumDistribution>> {
    let psi = basis_state(params, m0)?;
    let mut stepper = ExactStepper::new(params);
    let mut amps = psi.into_amplitudes();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(dist_of(&amps));
    for _ in 0..steps {
        stepper.step_in_place(&mut amps);
        out.push(dist_of(&amps));
    }
    Ok(out)
}

fn dist_of(amps: &[C64]) -> MomentumDistribution {
    MomentumDistribution::from_populations(amps.iter().map(|a| a.norm_sqr()).collect())
}

/// Time average of the distributions for steps in `(start, end]`.
pub fn time_averaged_distribution(
    params: &MapParams,
    m0: i64,
    start: usize,
    end: usize,
) -> Result<MomentumDistribution> {
    if end <= start {
        return Err(Error::domain("averaging window is empty"));
    }
    let psi = basis_state(params, m0)?;
    let mut stepper = ExactStepper::new(params);
    let mut amps = psi.into_amplitudes();
    let mut acc = vec![0.0; params.dim];
    for t in 1..=end {
        stepper.step_in_place(&mut amps);
        if t > start {
            for (s, a) in acc.iter_mut().zip(&amps) {
                *s += a.norm_sqr();
            }
        }
    }
    // renormalize by the accumulated mass rather than the step count to absorb round-off
    let total: f64 = acc.iter().sum();
    MomentumDistribution::new(acc.into_iter().map(|w| w / total).collect())
}
