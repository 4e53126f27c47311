//! Observables of momentum distributions and diffusion series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::MomentumDistribution;

/// Bins at or below this weight are left out of the log-linear fit.
pub const FIT_FLOOR: f64 = 1e-12;

/// `msd(t) < BREAK_FACTOR * D * t` marks the break time.
pub const BREAK_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationFit {
    pub ell: f64,
    pub peak: f64,
    /// RMS residual of `ln W` around the fitted line.
    pub residual: f64,
    pub points_used: usize,
}

/// `W(m0)`.
pub fn peak_height(dist: &MomentumDistribution, m0: i64) -> Result<f64> {
    dist.check_normalized()?;
    dist.weight(m0)
}

/// `sum_m (m - m0)^2 W_m`.
pub fn second_moment(dist: &MomentumDistribution, m0: i64) -> Result<f64> {
    dist.check_normalized()?;
    dist.weight(m0)?;
    Ok(dist.iter().map(|(m, w)| ((m - m0) * (m - m0)) as f64 * w).sum())
}

/// `sum_{m < m0} W - sum_{m > m0} W`.
pub fn asymmetry(dist: &MomentumDistribution, m0: i64) -> Result<f64> {
    dist.check_normalized()?;
    dist.weight(m0)?;
    Ok(dist
        .iter()
        .map(|(m, w)| match m.cmp(&m0) {
            std::cmp::Ordering::Less => w,
            std::cmp::Ordering::Greater => -w,
            std::cmp::Ordering::Equal => 0.0,
        })
        .sum())
}

/// Ordinary least squares of `ln W_m` on `|m - m0|` over both sides;
/// `ell = -2 / slope`.
pub fn fit_localization_length(dist: &MomentumDistribution, m0: i64) -> Result<LocalizationFit> {
    dist.check_normalized()?;
    let peak = dist.weight(m0)?;
    let pts: Vec<(f64, f64)> = dist
        .iter()
        .filter(|&(_, w)| w > FIT_FLOOR)
        .map(|(m, w)| ((m - m0).abs() as f64, w.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::FitUndefined(format!("{} bin(s) above the floor", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitUndefined("all usable bins share one distance".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::FitUndefined(format!("non-decaying profile (slope {slope})")));
    }
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(LocalizationFit {
        ell: -2.0 / slope,
        peak,
        residual: (ss / n).sqrt(),
        points_used: pts.len(),
    })
}

/// Smallest `t >= 1` with `msd[t] < 0.5 D t`; `msd[0]` is `t = 0`.
pub fn break_time(msd: &[f64], d: f64) -> Result<Option<usize>> {
    if !(d > 0.0) {
        return Err(Error::domain(format!(
            "diffusion coefficient must be positive, got {d}"
        )));
    }
    Ok(msd
        .iter()
        .enumerate()
        .skip(1)
        .find(|&(t, &m)| m < BREAK_FACTOR * d * t as f64)
        .map(|(t, _)| t))
}

/// Observables bundled for run output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub peak: f64,
    /// Absent when the profile does not admit a fit.
    pub ell: Option<f64>,
    pub residual: Option<f64>,
    pub asymmetry: f64,
    pub msd: f64,
}

pub fn summarize(dist: &MomentumDistribution, m0: i64) -> Result<AnalysisSummary> {
    let fit = match fit_localization_length(dist, m0) {
        Ok(f) => Some(f),
        Err(Error::FitUndefined(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(AnalysisSummary {
        peak: peak_height(dist, m0)?,
        ell: fit.map(|f| f.ell),
        residual: fit.map(|f| f.residual),
        asymmetry: asymmetry(dist, m0)?,
        msd: second_moment(dist, m0)?,
    })
}
