//! Sawtooth-map parameter bundle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the dense statevector paths accept.
pub const MAX_QUBITS: u32 = 20;

/// Parameters of one Floquet step `U = U_T U_k`.
///
/// `dim = 2^n` momentum levels, kick strength `k`, kick period `period`
/// and the classical chaos parameter `chaos = k * period`. When built from
/// an integer `l` the period is `2 pi l / dim`, which makes the momentum
/// lattice commensurate with the angle torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub n: u32,
    pub dim: usize,
    /// Momentum-period integer, absent when the period was given directly.
    pub l: Option<i64>,
    pub period: f64,
    pub chaos: f64,
    pub k: f64,
}

impl MapParams {
    /// `period = 2 pi l / 2^n`, `k = chaos / period`.
    pub fn from_chaos(n: u32, l: i64, chaos: f64) -> Result<Self> {
        let dim = dim_for(n)?;
        if l == 0 {
            return Err(Error::domain("l must be nonzero so that the period is positive"));
        }
        if !chaos.is_finite() {
            return Err(Error::domain("chaos parameter must be finite"));
        }
        let period = 2.0 * PI * l as f64 / dim as f64;
        Ok(MapParams {
            n,
            dim,
            l: Some(l),
            period,
            chaos,
            k: chaos / period,
        })
    }

    /// Arbitrary `(k, period)`, including the degenerate `k = 0` and
    /// `period = 0` cases.
    pub fn from_kick(n: u32, k: f64, period: f64) -> Result<Self> {
        let dim = dim_for(n)?;
        if !k.is_finite() || !period.is_finite() {
            return Err(Error::domain("k and period must be finite"));
        }
        Ok(MapParams {
            n,
            dim,
            l: None,
            period,
            chaos: k * period,
            k,
        })
    }

    /// Three qubits, `l = 7`, `K = 1.5`.
    pub fn standard() -> Self {
        Self::from_chaos(3, 7, 1.5).expect("static parameters are valid")
    }

    pub fn half_dim(&self) -> i64 {
        (self.dim / 2) as i64
    }

    /// Same register with a different dimension-free parameter set.
    pub fn with_kick(&self, k: f64, period: f64) -> Result<Self> {
        Self::from_kick(self.n, k, period)
    }
}

fn dim_for(n: u32) -> Result<usize> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::domain(format!(
            "qubit count {n} outside supported range [1, {MAX_QUBITS}]"
        )));
    }
    Ok(1usize << n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let p = MapParams::standard();
        assert_eq!(p.dim, 8);
        assert!((p.period - 2.0 * PI * 7.0 / 8.0).abs() < 1e-15);
        assert!((p.k - 0.2728).abs() < 1e-3);
        assert!((p.k * p.period - 1.5).abs() < 1e-14);
    }

    #[test]
    fn degenerate_kicks_allowed() {
        let p = MapParams::from_kick(3, 0.0, 1.0).unwrap();
        assert_eq!(p.k, 0.0);
        let p = MapParams::from_kick(3, 0.3, 0.0).unwrap();
        assert_eq!(p.period, 0.0);
        assert_eq!(p.chaos, 0.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(MapParams::from_chaos(0, 7, 1.5).is_err());
        assert!(MapParams::from_chaos(21, 7, 1.5).is_err());
        assert!(MapParams::from_chaos(3, 0, 1.5).is_err());
    }
}
