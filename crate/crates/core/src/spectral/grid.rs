use nalgebra::Complex;

use super::{Axis, JointGaussianGrid, SegmentSpec, SpectralModel};
use crate::error::{QslError, Result};
use crate::quantum::{DensityMatrix, Ket};
use crate::scalar::{cis, cr, CMatrix, CVector, Real};

pub const MIN_NODES_PER_AXIS: usize = 16;
pub const DEFAULT_NODES_PER_AXIS: usize = 64;

type Gate<T> = [[Complex<T>; 2]; 2];

fn mul<T: Real>(a: &Gate<T>, b: &Gate<T>) -> Gate<T> {
    let mut out = [[cr(T::zero()); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// Single-photon propagator through `segments` for relative frequency `f = ω/ω̄`.
fn photon_gate<T: Real>(segments: &[SegmentSpec<T>], f: T) -> Gate<T> {
    let zero = cr(T::zero());
    let mut gate = [[cr(T::one()), zero], [zero, cr(T::one())]];
    let half = T::lit(0.5);
    for seg in segments {
        let phase = T::pi() * f * seg.length;
        let (p, m) = (cis(phase), cis(-phase));
        let step = match seg.axis {
            Axis::Z => [[p, zero], [zero, m]],
            // Hadamard · diag(p, m) · Hadamard
            Axis::X => {
                let s = (p + m) * half;
                let d = (p - m) * half;
                [[s, d], [d, s]]
            }
        };
        gate = mul(&step, &gate);
    }
    gate
}

fn apply_gate<T: Real>(psi: &mut CVector<T>, gate: &Gate<T>, qubit: usize, n: usize) {
    let stride = 1usize << (n - 1 - qubit);
    let dim = psi.len();
    for base in 0..dim {
        if base & stride != 0 {
            continue;
        }
        let (a, b) = (psi[base], psi[base | stride]);
        psi[base] = gate[0][0] * a + gate[0][1] * b;
        psi[base | stride] = gate[1][0] * a + gate[1][1] * b;
    }
}

/// `ρ` after a sequence of birefringent segments, by Gauss–Hermite quadrature over
/// the joint spectrum. Nodes are accumulated in ascending index order.
pub fn evolve_grid<T: Real>(
    ket0: &Ket<T>,
    model: &SpectralModel<T>,
    segments: &[SegmentSpec<T>],
    nodes_per_axis: usize,
) -> Result<DensityMatrix<T>> {
    if nodes_per_axis < MIN_NODES_PER_AXIS {
        return Err(QslError::TooFewNodes {
            min: MIN_NODES_PER_AXIS,
            got: nodes_per_axis,
        });
    }
    let n = model.n_photons();
    if ket0.n_qubits() != n {
        return Err(QslError::DimensionMismatch(ket0.n_qubits(), n));
    }
    if segments.is_empty() {
        return Ok(ket0.to_density());
    }
    let grid = JointGaussianGrid::new(model, nodes_per_axis)?;
    let dim = ket0.dim();
    let mut rho = CMatrix::<T>::zeros(dim, dim);
    let mut psi = ket0.amplitudes().clone();
    for (u, w) in grid.iter() {
        psi.copy_from(ket0.amplitudes());
        for (q, &ux) in u.iter().enumerate() {
            let gate = photon_gate(segments, model.rel_mean()[q] + ux);
            apply_gate(&mut psi, &gate, q, n);
        }
        for c in 0..dim {
            let wc = psi[c].conj() * w;
            for r in 0..dim {
                rho[(r, c)] += psi[r] * wc;
            }
        }
    }
    DensityMatrix::new_unchecked(rho)
}
