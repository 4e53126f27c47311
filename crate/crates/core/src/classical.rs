//! Classical sawtooth map `I' = I + k (theta - pi)`, `theta' = theta + T I' (mod 2 pi)`.
//!
//! Momentum is unbounded; only the angle lives on the torus. The kick comes
//! before the rotation, as in the quantum step.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MapParams;

/// Minimum ensemble size for a diffusion fit.
pub const MIN_ENSEMBLE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub momentum: f64,
    pub angle: f64,
}

fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2 pi for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// One forward step. The angle must already lie in `[0, 2 pi)`.
pub fn classical_step(point: PhasePoint, params: &MapParams) -> Result<PhasePoint> {
    if !(0.0..TAU).contains(&point.angle) {
        return Err(Error::domain(format!("angle {} outside [0, 2 pi)", point.angle)));
    }
    Ok(step_unchecked(point, params.k, params.period))
}

fn step_unchecked(p: PhasePoint, k: f64, period: f64) -> PhasePoint {
    let momentum = p.momentum + k * (p.angle - PI);
    PhasePoint {
        momentum,
        angle: wrap_angle(p.angle + period * momentum),
    }
}

/// Undoes [`classical_step`]: rotate back, then remove the kick.
pub fn classical_step_inverse(point: PhasePoint, params: &MapParams) -> PhasePoint {
    let angle = wrap_angle(point.angle - params.period * point.momentum);
    PhasePoint {
        momentum: point.momentum - params.k * (angle - PI),
        angle,
    }
}

/// Sum in a fixed binary tree so results do not depend on accumulation order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Trajectories starting at one momentum with random angles.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    points: Vec<PhasePoint>,
    seed: u64,
}

impl ClassicalEnsemble {
    /// Trajectory `j` draws its angle from ChaCha8 stream `j` under `seed`.
    pub fn new(m0: f64, size: usize, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::domain("ensemble must hold at least one trajectory"));
        }
        let points = (0..size)
            .map(|j| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(j as u64);
                PhasePoint {
                    momentum: m0,
                    angle: TAU * rng.random::<f64>(),
                }
            })
            .collect();
        Ok(ClassicalEnsemble { points, seed })
    }

    pub fn from_points(points: Vec<PhasePoint>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !(0.0..TAU).contains(&p.angle)) {
            return Err(Error::domain(format!("angle {} outside [0, 2 pi)", p.angle)));
        }
        Ok(ClassicalEnsemble { points, seed: 0 })
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn step(&mut self, params: &MapParams) {
        for p in self.points.iter_mut() {
            *p = step_unchecked(*p, params.k, params.period);
        }
    }

    pub fn step_back(&mut self, params: &MapParams) {
        for p in self.points.iter_mut() {
            *p = classical_step_inverse(*p, params);
        }
    }

    /// Mean of `(I - m0)^2` and its standard error.
    pub fn second_moment(&self, m0: f64) -> (f64, f64) {
        let sq: Vec<f64> = self.points.iter().map(|p| (p.momentum - m0).powi(2)).collect();
        let n = sq.len() as f64;
        let mean = pairwise_sum(&sq) / n;
        if sq.len() < 2 {
            return (mean, 0.0);
        }
        let dev: Vec<f64> = sq.iter().map(|x| (x - mean).powi(2)).collect();
        let sd = (pairwise_sum(&dev) / (n - 1.0)).sqrt();
        (mean, sd / n.sqrt())
    }
}

/// `(pi^2 / 3) k^2`.
pub fn quasilinear_diffusion(k: f64) -> f64 {
    PI * PI / 3.0 * k * k
}

/// Least-squares slope through the origin of `msd[t]` against `t`, `t >= 1`.
pub fn fit_diffusion(msd: &[f64]) -> Result<f64> {
    if msd.len() < 2 {
        return Err(Error::domain("need at least one step after t = 0"));
    }
    let tm: Vec<f64> = msd.iter().enumerate().skip(1).map(|(t, m)| t as f64 * m).collect();
    let tt: Vec<f64> = (1..msd.len()).map(|t| (t * t) as f64).collect();
    Ok(pairwise_sum(&tm) / pairwise_sum(&tt))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionRun {
    pub params: MapParams,
    pub m0: f64,
    pub trajectories: usize,
    pub steps: usize,
    pub seed: u64,
    /// Second moment about `m0` for `t = 0..=steps`.
    pub msd: Vec<f64>,
    pub stderr: Vec<f64>,
    #[serde(rename = "D_fit")]
    pub d_fit: f64,
    #[serde(rename = "D_quasilinear")]
    pub d_quasilinear: f64,
    /// `D_fit / D_quasilinear`; absent when `k = 0`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSummary {
    #[serde(rename = "D_fit")]
    pub d_fit: f64,
    #[serde(rename = "D_quasilinear")]
    pub d_quasilinear: f64,
    pub ratio: Option<f64>,
}

impl DiffusionRun {
    pub fn summary(&self) -> DiffusionSummary {
        DiffusionSummary {
            d_fit: self.d_fit,
            d_quasilinear: self.d_quasilinear,
            ratio: self.ratio,
        }
    }

    /// `t,msd,stderr` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,msd,stderr\n");
        for (t, (m, e)) in self.msd.iter().zip(&self.stderr).enumerate() {
            s.push_str(&format!("{t},{m},{e}\n"));
        }
        s
    }
}

/// Evolves an ensemble from momentum `m0` and fits `<(Delta m)^2> = D t`.
pub fn diffusion_experiment(params: &MapParams, m0: f64, size: usize, steps: usize, seed: u64) -> Result<DiffusionRun> {
    if size < MIN_ENSEMBLE {
        return Err(Error::domain(format!("ensemble size {size} below {MIN_ENSEMBLE}")));
    }
    if steps == 0 {
        return Err(Error::domain("steps must be at least 1"));
    }
    let mut ens = ClassicalEnsemble::new(m0, size, seed)?;
    let mut msd = Vec::with_capacity(steps + 1);
    let mut stderr = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        if t > 0 {
            ens.step(params);
        }
        let (m, e) = ens.second_moment(m0);
        msd.push(m);
        stderr.push(e);
    }
    let d_fit = fit_diffusion(&msd)?;
    let d_quasilinear = quasilinear_diffusion(params.k);
    Ok(DiffusionRun {
        params: *params,
        m0,
        trajectories: size,
        steps,
        seed,
        msd,
        stderr,
        d_fit,
        d_quasilinear,
        ratio: (d_quasilinear > 0.0).then(|| d_fit / d_quasilinear),
    })
}
