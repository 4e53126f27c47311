//! Quantum sawtooth-map simulation.
//!
//! The crate evolves the kicked sawtooth Floquet operator `U = U_T U_k` two
//! ways: directly with fast Fourier transforms ([`exact`]) and as a gate
//! circuit of P, CP and H gates with a swap-free QFT ([`circuit`]). On top of
//! that it routes the circuit onto device coupling maps ([`device`]),
//! simulates calibrated hardware noise with density matrices ([`noise`]),
//! runs the classical diffusion baseline ([`classical`]) and extracts
//! localization observables ([`analysis`]).

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod classical;
pub mod device;
pub mod error;
pub mod exact;
mod kernels;
pub mod noise;
pub mod params;
pub mod seed;
pub mod state;

pub use error::{Error, Result};
pub use params::MapParams;
pub use state::{
    basis_state, momentum_distribution, momentum_of_index, DensityMatrix, MomentumDistribution, StateVector,
};
