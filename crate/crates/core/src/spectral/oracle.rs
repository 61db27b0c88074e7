//! Brute-force quadrature reference for the closed-form dephasing factors.

use nalgebra::Complex;

use super::{JointGaussianGrid, SpectralModel};
use crate::error::{QslError, Result};
use crate::scalar::{cis, Real};

pub const MIN_ORACLE_NODES: usize = 32;

/// `E[exp(i·2πl·Σ_x k_x·ω_x/ω̄)]` evaluated node by node over the joint spectrum.
pub fn quadrature_oracle_gamma<T: Real>(
    model: &SpectralModel<T>,
    k: &[i8],
    l: T,
    nodes_per_axis: usize,
) -> Result<Complex<T>> {
    if nodes_per_axis < MIN_ORACLE_NODES {
        return Err(QslError::TooFewNodes {
            min: MIN_ORACLE_NODES,
            got: nodes_per_axis,
        });
    }
    if k.len() != model.n_photons() {
        return Err(QslError::DimensionMismatch(k.len(), model.n_photons()));
    }
    if k.iter().all(|&x| x == 0) {
        return Ok(Complex::new(T::one(), T::zero()));
    }
    let grid = JointGaussianGrid::new(model, nodes_per_axis)?;
    let two_pi_l = T::two_pi() * l;
    let mut acc = Complex::new(T::zero(), T::zero());
    for (u, w) in grid.iter() {
        let phase = k
            .iter()
            .zip(u)
            .zip(model.rel_mean())
            .fold(T::zero(), |s, ((&kx, &ux), &mx)| {
                s + T::lit(kx as f64) * (mx + ux)
            });
        acc += cis(two_pi_l * phase) * w;
    }
    Ok(acc)
}
