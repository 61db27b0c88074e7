//! Gauss–Hermite rules for expectations over (multivariate) normal distributions.

use nalgebra::DMatrix;

use crate::error::{QslError, Result};
use crate::scalar::Real;
use crate::spectral::SpectralModel;

/// Probabilists' Gauss–Hermite rule: `E[f(Z)] ≈ Σ w_i f(x_i)` for `Z ~ N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite<T: Real> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussHermite<T> {
    /// Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix of the
    /// monic recurrence `He_{k+1} = x·He_k − k·He_{k−1}`; weights are the squared
    /// first eigenvector components.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QslError::TooFewNodes { min: 1, got: 0 });
        }
        let mut jacobi = DMatrix::<T>::zeros(n, n);
        for k in 1..n {
            let b = T::lit(k as f64).sqrt();
            jacobi[(k - 1, k)] = b;
            jacobi[(k, k - 1)] = b;
        }
        let eig = jacobi.symmetric_eigen();
        let mut pairs: Vec<(T, T)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
        // symmetrize: the rule is exactly symmetric about zero
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = (pairs[j].0 - pairs[i].0) / T::lit(2.0);
            let w = (pairs[i].1 + pairs[j].1) / T::lit(2.0);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = T::zero();
        }
        let total = pairs.iter().fold(T::zero(), |s, p| s + p.1);
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn expect<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |s, (&x, &w)| s + w * f(x))
    }
}

/// Tensor-product rule along the principal axes of a spectral covariance.
///
/// Axes with vanishing variance collapse to a single node, so a monochromatic
/// model yields exactly one node at the mean.
#[derive(Debug, Clone)]
pub struct JointGaussianGrid<T: Real> {
    /// Relative frequency deviations `u` for every node, photon-major.
    deviations: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Real> JointGaussianGrid<T> {
    pub fn new(model: &SpectralModel<T>, nodes_per_axis: usize) -> Result<Self> {
        let n = model.n_photons();
        let rule = GaussHermite::<T>::new(nodes_per_axis)?;
        let eig = model.rel_cov().clone().symmetric_eigen();
        let largest = eig
            .eigenvalues
            .iter()
            .fold(T::zero(), |m, &x| if x > m { x } else { m });
        let cutoff = largest * T::lit(1e-14);
        // (scale·direction) for every active principal axis, in eigen order
        let mut axes: Vec<Vec<T>> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .expect("finite variances")
        });
        for &a in &order {
            let var = eig.eigenvalues[a];
            if var > cutoff && var > T::zero() {
                let s = var.sqrt();
                axes.push((0..n).map(|x| eig.eigenvectors[(x, a)] * s).collect());
            }
        }
        let total: usize = rule.len().pow(axes.len() as u32);
        let mut deviations = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; axes.len()];
        for _ in 0..total {
            let mut u = vec![T::zero(); n];
            let mut w = T::one();
            for (axis, &i) in axes.iter().zip(&idx) {
                let z = rule.nodes()[i];
                w *= rule.weights()[i];
                for x in 0..n {
                    u[x] += axis[x] * z;
                }
            }
            deviations.push(u);
            weights.push(w);
            // odometer, last axis fastest
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < rule.len() {
                    break;
                }
                *slot = 0;
            }
        }
        Ok(Self {
            deviations,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[T], T)> {
        self.deviations
            .iter()
            .map(|u| u.as_slice())
            .zip(self.weights.iter().copied())
    }
}
