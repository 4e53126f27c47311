//! Pure and mixed states over the `2^n` momentum levels, and the momentum
//! distribution observable.
//!
//! Basis index `b` holds momentum `m = b - N/2`, so with three qubits the
//! state `|100>` is `m = 0` and `|000>` is `m = -4`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MapParams;

const NORM_TOL: f64 = 1e-10;
const DIST_TOL: f64 = 1e-9;

/// Momentum carried by basis index `b` of an `dim`-level register.
pub fn momentum_of_index(b: usize, dim: usize) -> Result<i64> {
    check_dim(dim)?;
    if b >= dim {
        return Err(Error::domain(format!("basis index {b} out of range [0, {dim})")));
    }
    Ok(b as i64 - (dim / 2) as i64)
}

/// Inverse of [`momentum_of_index`].
pub fn index_of_momentum(m: i64, dim: usize) -> Result<usize> {
    check_dim(dim)?;
    let half = (dim / 2) as i64;
    if m < -half || m >= half {
        return Err(Error::domain(format!("momentum {m} out of range [{}, {half})", -half)));
    }
    Ok((m + half) as usize)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::domain(format!("dimension {dim} is not a power of two >= 2")));
    }
    Ok(())
}

fn qubits_for(len: usize) -> Result<u32> {
    check_dim(len)?;
    Ok(len.trailing_zeros())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: u32,
    amps: Vec<C64>,
}

impl StateVector {
    /// Validates length `2^n` and unit norm.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for(amps.len())?;
        let s = Self { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!("state norm {norm} differs from 1")));
        }
        Ok(s)
    }

    /// Unnormalized input is rescaled.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::domain("cannot normalize a zero or non-finite vector"));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(amps)
    }

    pub(crate) fn from_raw(n: u32, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    pub fn computational(n: u32, b: usize) -> Result<Self> {
        let dim = 1usize << n;
        if b >= dim {
            return Err(Error::domain(format!("basis index {b} out of range [0, {dim})")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[b] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn uniform(n: u32) -> Self {
        let dim = 1usize << n;
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self { n, amps: vec![a; dim] }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn momentum_distribution(&self) -> MomentumDistribution {
        MomentumDistribution::from_populations(self.amps.iter().map(|a| a.norm_sqr()).collect())
    }
}

/// Delta state at momentum `m0`.
pub fn basis_state(params: &MapParams, m0: i64) -> Result<StateVector> {
    let b = index_of_momentum(m0, params.dim)?;
    StateVector::computational(params.n, b)
}

/// Row-major `N x N` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: u32,
    entries: Vec<C64>,
}

impl DensityMatrix {
    /// Checks hermiticity, unit trace and positivity.
    pub fn new(n: u32, entries: Vec<C64>) -> Result<Self> {
        let dim = 1usize << n;
        if entries.len() != dim * dim {
            return Err(Error::domain(format!(
                "expected {} entries for n = {n}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let dm = Self { n, entries };
        dm.validate()?;
        Ok(dm)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let dim = a.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(a[r] * a[c].conj());
            }
        }
        Self { n: psi.n(), entries }
    }

    pub fn maximally_mixed(n: u32) -> Self {
        let dim = 1usize << n;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Self { n, entries }
    }

    pub(crate) fn from_raw(n: u32, entries: Vec<C64>) -> Self {
        Self { n, entries }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut Vec<C64> {
        &mut self.entries
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.entries[r * self.dim() + c]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let dim = self.dim();
        DMatrix::from_row_slice(dim, dim, &self.entries)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > NORM_TOL {
            return Err(Error::Invariant(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::Invariant(format!("density matrix trace {tr} differs from 1")));
        }
        let lo = self.min_eigenvalue();
        if lo < -1e-8 {
            return Err(Error::Invariant(format!("density matrix has eigenvalue {lo:e}")));
        }
        Ok(())
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entry(i, i).re).collect()
    }

    pub fn momentum_distribution(&self) -> MomentumDistribution {
        MomentumDistribution::from_populations(self.populations())
    }
}

/// Anything that yields computational-basis populations.
pub trait QuantumState {
    fn momentum_distribution(&self) -> MomentumDistribution;
}

impl QuantumState for StateVector {
    fn momentum_distribution(&self) -> MomentumDistribution {
        StateVector::momentum_distribution(self)
    }
}

impl QuantumState for DensityMatrix {
    fn momentum_distribution(&self) -> MomentumDistribution {
        DensityMatrix::momentum_distribution(self)
    }
}

pub fn momentum_distribution<S: QuantumState>(state: &S) -> MomentumDistribution {
    state.momentum_distribution()
}

/// Probabilities `W_m` over `m in [-N/2, N/2)`, stored by basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    weights: Vec<f64>,
}

/// One serialized `{m, W}` record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub m: i64,
    #[serde(rename = "W")]
    pub w: f64,
}

impl MomentumDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_dim(weights.len())?;
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::Invariant(format!("weight {w} outside [0, 1]")));
        }
        let d = Self { weights };
        d.check_normalized()?;
        Ok(d)
    }

    /// Populations from a valid state; clips round-off below zero.
    pub(crate) fn from_populations(mut weights: Vec<f64>) -> Self {
        for w in weights.iter_mut() {
            *w = w.clamp(0.0, 1.0);
        }
        Self { weights }
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Self::new(vec![1.0 / dim as f64; dim])
    }

    pub fn delta(dim: usize, m0: i64) -> Result<Self> {
        let mut w = vec![0.0; dim];
        w[index_of_momentum(m0, dim)?] = 1.0;
        Self::new(w)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Weights indexed by basis integer `b = m + N/2`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, m: i64) -> Result<f64> {
        Ok(self.weights[index_of_momentum(m, self.dim())?])
    }

    pub fn momenta(&self) -> impl Iterator<Item = i64> + '_ {
        let half = (self.dim() / 2) as i64;
        (0..self.dim() as i64).map(move |b| b - half)
    }

    /// `(m, W_m)` with momenta ascending.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.momenta().zip(self.weights.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let s = self.total();
        if (s - 1.0).abs() > DIST_TOL {
            return Err(Error::Invariant(format!("distribution sums to {s}, not 1")));
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<WeightRecord> {
        self.iter().map(|(m, w)| WeightRecord { m, w }).collect()
    }

    pub fn from_records(records: &[WeightRecord]) -> Result<Self> {
        let dim = records.len();
        check_dim(dim)?;
        let mut weights = vec![f64::NAN; dim];
        for r in records {
            weights[index_of_momentum(r.m, dim)?] = r.w;
        }
        if weights.iter().any(|w| w.is_nan()) {
            return Err(Error::domain("duplicate momentum in records"));
        }
        Self::new(weights)
    }

    /// CSV with header `m,W`, momenta ascending.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,W\n");
        for (m, w) in self.iter() {
            out.push_str(&format!("{m},{w}\n"));
        }
        out
    }

    /// Convex combination `sum_i c_i d_i`; coefficients must sum to one.
    pub fn mixture(parts: &[(f64, &MomentumDistribution)]) -> Result<Self> {
        let dim = parts
            .first()
            .map(|(_, d)| d.dim())
            .ok_or_else(|| Error::domain("empty mixture"))?;
        let mut w = vec![0.0; dim];
        for (c, d) in parts {
            if d.dim() != dim {
                return Err(Error::domain("mixture of distributions with different sizes"));
            }
            for (acc, x) in w.iter_mut().zip(d.weights()) {
                *acc += c * x;
            }
        }
        Self::new(w)
    }
}

impl Serialize for MomentumDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.records().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MomentumDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<WeightRecord>::deserialize(d)?;
        Self::from_records(&records).map_err(serde::de::Error::custom)
    }
}
