//! Virtual photon-counting experiment: tomography counts, linear-inversion
//! reconstruction and Monte Carlo error bars on central-difference speeds.
//!
//! All randomness comes from generators keyed by `(seed, purpose, resample, l,
//! setting)`, so results do not depend on evaluation order or thread count.

mod montecarlo;
mod rng;
mod tomography;

pub use montecarlo::{mc_series, mc_speed, run_virtual_experiment, SpeedEstimate};
pub use rng::{keyed_rng, poisson, quantize_l, Purpose};
pub use tomography::{
    expected_dataset, reconstruct_state, simulate_counts, tomography_settings, Projector,
    TomographyDataset, TomographySetup, MAX_TOMOGRAPHY_QUBITS,
};

use crate::error::{QslError, Result};
use crate::quantum::{DensityMatrix, Ket, Operator};
use crate::scalar::trace_product_re;
use crate::spectral::Evolution;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Detected events per second summed over the outcomes of one basis.
    pub rate_hz: f64,
    pub integration_s: f64,
    /// Half-width of the central difference, in wavelengths.
    pub delta_l: f64,
    pub resamples: usize,
    pub master_seed: u64,
    pub prep_infidelity: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rate_hz: 13_000.0,
            integration_s: 5.0,
            delta_l: 0.025,
            resamples: 10_000,
            master_seed: 42,
            prep_infidelity: 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resamples == 0 {
            return Err(QslError::InvalidConfig(
                "resamples must be at least 1".into(),
            ));
        }
        if !(self.delta_l > 0.0 && self.delta_l.is_finite()) {
            return Err(QslError::InvalidConfig(format!(
                "delta_l must be positive, got {}",
                self.delta_l
            )));
        }
        if !(self.rate_hz.is_finite()
            && self.integration_s.is_finite()
            && self.rate_hz * self.integration_s >= 1.0)
        {
            return Err(QslError::InvalidConfig(format!(
                "rate_hz·integration_s must be at least 1, got {}",
                self.rate_hz * self.integration_s
            )));
        }
        if !(0.0..1.0).contains(&self.prep_infidelity) {
            return Err(QslError::InvalidConfig(format!(
                "prep_infidelity {} outside [0, 1)",
                self.prep_infidelity
            )));
        }
        Ok(())
    }
}

/// `(1 − ε)|ψ⟩⟨ψ| + ε·I/2^N`.
pub fn degrade_preparation(ket: &Ket<f64>, prep_infidelity: f64) -> Result<DensityMatrix<f64>> {
    if !(0.0..1.0).contains(&prep_infidelity) {
        return Err(QslError::InvalidConfig(format!(
            "prep_infidelity {prep_infidelity} outside [0, 1)"
        )));
    }
    let dim = ket.dim();
    let mut m = ket.projector().map(|z| z * (1.0 - prep_infidelity));
    for d in 0..dim {
        m[(d, d)].re += prep_infidelity / dim as f64;
    }
    DensityMatrix::new(m)
}

/// Largest noiseless central-difference speed `|a(l+Δ) − a(l−Δ)|/(2Δ)` over `l_grid`.
pub fn central_difference_max(
    ev: &Evolution<f64>,
    a_obs: &Operator<f64>,
    l_grid: &[f64],
    delta_l: f64,
) -> Result<f64> {
    let a_at =
        |l: f64| -> Result<f64> { Ok(trace_product_re(ev.rho_at(l)?.entries(), a_obs.entries())) };
    let mut best = 0.0f64;
    for &l in l_grid {
        best = best.max((a_at(l + delta_l)? - a_at(l - delta_l)?).abs() / (2.0 * delta_l));
    }
    Ok(best)
}

/// Preparation infidelity at which the noiseless central-difference maximum
/// equals `target`, found by bisection on `[0, 1)`.
pub fn fit_prep_infidelity(
    ev: &Evolution<f64>,
    a_obs: &Operator<f64>,
    l_grid: &[f64],
    delta_l: f64,
    target: f64,
) -> Result<f64> {
    let at = |eps: f64| {
        central_difference_max(
            &ev.clone().with_prep_infidelity(eps)?,
            a_obs,
            l_grid,
            delta_l,
        )
    };
    let ceiling = at(0.0)?;
    if !(target > 0.0 && target <= ceiling) {
        return Err(QslError::InvalidConfig(format!(
            "target speed {target} outside (0, {ceiling}]"
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-12);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
