use nalgebra::Complex;

use super::{dephasing_factor, SpectralModel};
use crate::error::{QslError, Result};
use crate::quantum::{qubit_bit, DensityMatrix};
use crate::scalar::{CMatrix, Real};

/// Coherence order of entry `(row, col)`: `+1` per photon in `(H, V)`, `−1` for `(V, H)`.
pub fn coherence_orders(row: usize, col: usize, n: usize) -> Vec<i8> {
    (0..n)
        .map(|q| qubit_bit(col, q, n) as i8 - qubit_bit(row, q, n) as i8)
        .collect()
}

fn check_dims<T: Real>(rho0: &DensityMatrix<T>, model: &SpectralModel<T>) -> Result<()> {
    if rho0.n_qubits() != model.n_photons() {
        return Err(QslError::DimensionMismatch(
            rho0.n_qubits(),
            model.n_photons(),
        ));
    }
    Ok(())
}

/// `ρ(l)` after a single H/V-axis crystal: every entry scaled by its dephasing factor.
pub fn evolve_dephasing<T: Real>(
    rho0: &DensityMatrix<T>,
    model: &SpectralModel<T>,
    l: T,
) -> Result<DensityMatrix<T>> {
    check_dims(rho0, model)?;
    let n = model.n_photons();
    let src = rho0.entries();
    let dim = src.nrows();
    let mut out = src.clone();
    for i in 0..dim {
        for j in (i + 1)..dim {
            let gamma = dephasing_factor(model, &coherence_orders(i, j, n), l)?;
            let v = gamma * src[(i, j)];
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    DensityMatrix::new_unchecked(out)
}

/// Closed-form `dρ/dl`: `dΓ_k/dl = [i·2π·Σμ_x k_x − (2π)²·(kᵀΣk)·l]·Γ_k(l)`.
pub fn dephasing_derivative<T: Real>(
    rho0: &DensityMatrix<T>,
    model: &SpectralModel<T>,
    l: T,
) -> Result<CMatrix<T>> {
    check_dims(rho0, model)?;
    let n = model.n_photons();
    let src = rho0.entries();
    let dim = src.nrows();
    let two_pi = T::two_pi();
    let cov = model.rel_cov();
    let mut out = CMatrix::<T>::zeros(dim, dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let k = coherence_orders(i, j, n);
            let drift = k
                .iter()
                .zip(model.rel_mean())
                .fold(T::zero(), |s, (&kx, &m)| s + T::lit(kx as f64) * m);
            let mut quad = T::zero();
            for r in 0..n {
                for c in 0..n {
                    quad += T::lit((k[r] * k[c]) as f64) * cov[(r, c)];
                }
            }
            let rate = Complex::new(-two_pi * two_pi * quad * l, two_pi * drift);
            let v = rate * dephasing_factor(model, &k, l)? * src[(i, j)];
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    Ok(out)
}
