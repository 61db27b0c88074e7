use std::ops::Range;

use nalgebra::Complex;

use super::Operator;
use crate::error::{QslError, Result};
use crate::scalar::{max_abs_entry, CMatrix, Real};

/// Absolute eigenvalue gap below which two eigenvalues share a degeneracy block.
pub const DEFAULT_TOL_DEGEN: f64 = 1e-10;

/// Spectral decomposition `M = V·diag(p)·V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Real> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: CMatrix<T>,
    /// Maximal runs of consecutive eigenvalues whose neighbouring gaps are below the tolerance.
    pub degeneracy_blocks: Vec<Range<usize>>,
}

pub fn eig_hermitian<T: Real>(m: &Operator<T>, tol_degen: T) -> Result<EigenDecomposition<T>> {
    if !m.is_hermitian() {
        return Err(QslError::NotHermitian(f64::NAN));
    }
    Ok(EigenDecomposition::of_hermitian(m.entries(), tol_degen))
}

/// Rotates the phase of `v` so its first largest-magnitude component is real and positive.
fn fix_phase<T: Real>(v: &mut CMatrix<T>, col: usize) {
    let n = v.nrows();
    let mags: Vec<T> = (0..n).map(|r| v[(r, col)].norm_sqr()).collect();
    let top = mags
        .iter()
        .fold(T::zero(), |m, &x| if x > m { x } else { m });
    let cut = top * (T::one() - T::lit(1e-9));
    let Some(pivot) = mags.iter().position(|&x| x >= cut) else {
        return;
    };
    let z = v[(pivot, col)];
    let norm = z.norm_sqr().sqrt();
    if norm > T::zero() {
        let phase = z.conj() / Complex::new(norm, T::zero());
        v.column_mut(col).iter_mut().for_each(|c| *c *= phase);
    }
}

/// Unsorted eigenpairs of a Hermitian matrix. Falls back to cyclic Jacobi
/// rotations when the Householder-based solver breaks down on sparse input.
pub(crate) fn hermitian_eigen<T: Real>(sym: CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = sym.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|x| x.is_finite())
        && eig
            .eigenvectors
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    {
        return (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors);
    }
    jacobi_eigen(sym)
}

const JACOBI_MAX_SWEEPS: usize = 100;

fn jacobi_eigen<T: Real>(mut a: CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = a.nrows();
    let mut v = CMatrix::<T>::identity(n, n);
    let scale = max_abs_entry(&a);
    let floor = scale * T::default_epsilon() * T::default_epsilon();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .fold(T::zero(), |m, (p, q)| m.max(a[(p, q)].norm_sqr().sqrt()));
        if off <= floor {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm_sqr().sqrt();
                if r <= floor {
                    continue;
                }
                // phase that makes the pivot real, then a real rotation that zeroes it
                let phase = apq / Complex::new(r, T::zero());
                let zeta = (a[(q, q)].re - a[(p, p)].re) / (T::lit(2.0) * r);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let gpq = Complex::new(s, T::zero());
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                let gpp = Complex::new(c, T::zero());
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * gpp + y * gqp;
                    a[(k, q)] = x * gpq + y * gqq;
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * gpp + y * gqp;
                    v[(k, q)] = x * gpq + y * gqq;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = x * gpp.conj() + y * gqp.conj();
                    a[(q, k)] = x * gpq.conj() + y * gqq.conj();
                }
                a[(p, q)] = Complex::new(T::zero(), T::zero());
                a[(q, p)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    ((0..n).map(|k| a[(k, k)].re).collect(), v)
}

impl<T: Real> EigenDecomposition<T> {
    /// Decomposes a matrix assumed Hermitian (only its Hermitian part is used).
    pub fn of_hermitian(m: &CMatrix<T>, tol_degen: T) -> Self {
        let sym = (m + m.adjoint()).map(|z| z * T::lit(0.5));
        // entries this far below the scale cannot move the spectrum but can
        // underflow inside the Householder reduction
        let floor = max_abs_entry(&sym) * T::default_epsilon() * T::default_epsilon();
        let sym = sym.map(|z| {
            if z.norm_sqr().sqrt() <= floor {
                Complex::new(T::zero(), T::zero())
            } else {
                z
            }
        });
        let (values, vectors) = hermitian_eigen(sym);
        let dim = m.nrows();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .expect("finite eigenvalues")
        });
        let eigenvalues: Vec<T> = order.iter().map(|&k| values[k]).collect();
        let mut eigenvectors = CMatrix::<T>::zeros(dim, dim);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &vectors.column(src));
            fix_phase(&mut eigenvectors, dst);
        }
        let mut degeneracy_blocks = Vec::new();
        let mut start = 0;
        for k in 1..=dim {
            if k == dim || eigenvalues[k] - eigenvalues[k - 1] >= tol_degen {
                degeneracy_blocks.push(start..k);
                start = k;
            }
        }
        Self {
            eigenvalues,
            eigenvectors,
            degeneracy_blocks,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Within every degeneracy block, rotates the basis so that the block-projected
    /// observable `P·A·P` is diagonal. Sub-blocks are ordered by ascending eigenvalue of `P·A·P`.
    pub fn canonicalize(&mut self, a: &CMatrix<T>) {
        for block in self.degeneracy_blocks.clone() {
            if block.len() < 2 {
                continue;
            }
            let vb = self
                .eigenvectors
                .columns(block.start, block.len())
                .into_owned();
            let projected = vb.adjoint() * a * &vb;
            let inner = EigenDecomposition::of_hermitian(&projected, T::zero());
            let rotated = &vb * &inner.eigenvectors;
            for (offset, col) in block.clone().enumerate() {
                self.eigenvectors.set_column(col, &rotated.column(offset));
                fix_phase(&mut self.eigenvectors, col);
            }
        }
    }

    /// `V†·M·V`: `m` expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, m: &CMatrix<T>) -> CMatrix<T> {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// `V·M·V†`: inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, m: &CMatrix<T>) -> CMatrix<T> {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        let mut scaled = self.eigenvectors.clone();
        for (k, &p) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(p);
        }
        &scaled * self.eigenvectors.adjoint()
    }

    /// Largest entry of `V†V − I`.
    pub fn orthonormality_error(&self) -> T {
        let dim = self.dim();
        max_abs_entry(
            &(self.eigenvectors.adjoint() * &self.eigenvectors - CMatrix::identity(dim, dim)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{
        collective_hamiltonian, make_state, pauli_x, pauli_z, DensityMatrix, StateSpec,
    };
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix<f64> {
        let g = CMatrix::<f64>::from_fn(dim, dim, |_, _| {
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&g + g.adjoint()).map(|z| z * 0.5)
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = eig_hermitian(&pauli_z::<f64>(), 1e-10).unwrap();
        assert_eq!(e.eigenvalues, vec![-1.0, 1.0]);
        assert_eq!(e.degeneracy_blocks, vec![0..1, 1..2]);
    }

    #[test]
    fn projector_spectrum() {
        let plus = make_state::<f64>(&StateSpec::Plus).unwrap();
        let e = eig_hermitian(&plus.to_projector_operator(), 1e-10).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fully_degenerate_block() {
        let mixed = DensityMatrix::<f64>::maximally_mixed(2).unwrap();
        let e = eig_hermitian(&mixed.as_operator(), 1e-10).unwrap();
        assert_eq!(e.degeneracy_blocks, vec![0..4]);
    }

    #[test]
    fn canonicalization_diagonalizes_projected_observable() {
        let mixed = DensityMatrix::<f64>::maximally_mixed(1).unwrap();
        let mut e = eig_hermitian(&mixed.as_operator(), 1e-10).unwrap();
        let x = pauli_x::<f64>();
        e.canonicalize(x.entries());
        let in_basis = e.to_eigenbasis(x.entries());
        assert_abs_diff_eq!(in_basis[(0, 1)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(in_basis[(0, 0)].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(in_basis[(1, 1)].re, 1.0, epsilon = 1e-12);
        assert!(e.orthonormality_error() < 1e-12);
    }

    #[test]
    fn reconstruction_on_random_hermitian_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..1000 {
            let dim = [2, 4, 8, 16][trial % 4];
            let m = random_hermitian(&mut rng, dim);
            let e = EigenDecomposition::of_hermitian(&m, 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(max_abs_entry(&(e.reconstruct() - &m)) <= 1e-10);
            assert!(e.orthonormality_error() <= 1e-10);
        }
    }

    #[test]
    fn collective_hamiltonian_multiplicities() {
        for n in 1..=6usize {
            let h = collective_hamiltonian::<f64>(n).unwrap();
            let e = eig_hermitian(&h, 1e-10).unwrap();
            // blocks ascend from m = n down to m = 0
            assert_eq!(e.degeneracy_blocks.len(), n + 1);
            for (idx, block) in e.degeneracy_blocks.iter().enumerate() {
                let m = n - idx;
                let binom = (0..m).fold(1usize, |acc, k| acc * (n - k) / (k + 1));
                assert_eq!(block.len(), binom);
                for k in block.clone() {
                    assert_abs_diff_eq!(
                        e.eigenvalues[k],
                        PI * (n as f64 - 2.0 * m as f64),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn sparse_ghz_coherence_decomposes() {
        let mut m = CMatrix::<f64>::zeros(16, 16);
        m[(0, 0)] = Complex::new(0.5, 0.0);
        m[(15, 15)] = Complex::new(0.5, 0.0);
        m[(0, 15)] = Complex::from_polar(0.5, -1.8849555921538759);
        m[(15, 0)] = m[(0, 15)].conj();
        let e = EigenDecomposition::of_hermitian(&m, 1e-10);
        assert_abs_diff_eq!(e.eigenvalues[15], 1.0, epsilon = 1e-14);
        assert!(max_abs_entry(&(e.reconstruct() - &m)) <= 1e-14);
        assert!(e.orthonormality_error() <= 1e-14);
    }

    #[test]
    fn jacobi_matches_householder() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 3, 8, 16] {
            let m = random_hermitian(&mut rng, dim);
            let (mut a, _) = hermitian_eigen(m.clone());
            let (mut b, v) = jacobi_eigen(m.clone());
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                dim,
                jacobi_eigen(m.clone())
                    .0
                    .into_iter()
                    .map(|p| Complex::new(p, 0.0)),
            ));
            assert!(max_abs_entry(&(&v * d * v.adjoint() - &m)) <= 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian_flag() {
        let op = Operator::<f64>::general(CMatrix::identity(2, 2)).unwrap();
        assert!(eig_hermitian(&op, 1e-10).is_err());
    }
}
