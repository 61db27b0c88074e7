//! Dense N-qubit states and operators.
//!
//! Qubit 0 is the leftmost tensor factor and the most significant bit of a
//! basis index, with `H ↦ 0` and `V ↦ 1`, so two-qubit basis states are listed
//! as `HH, HV, VH, VV`.

mod eig;
mod states;

pub use eig::{eig_hermitian, EigenDecomposition, DEFAULT_TOL_DEGEN};
pub use states::{
    collective_hamiltonian, collective_sigma_x, hadamard, identity, make_state, pauli_x, pauli_y,
    pauli_z, StateSpec,
};

use nalgebra::Complex;

use crate::error::{QslError, Result};
pub use crate::scalar::trace_product;
use crate::scalar::{max_abs_entry, CMatrix, CVector, Real};

/// Largest supported Hilbert-space dimension (eight qubits).
pub const MAX_DIM: usize = 1 << 8;

pub(crate) fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(QslError::NotPowerOfTwo(dim));
    }
    if dim > MAX_DIM {
        return Err(QslError::DimensionTooLarge(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Value (0 = H, 1 = V) of `qubit` inside basis index `index` of an `n`-qubit register.
#[inline]
pub fn qubit_bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

fn hermitian_deviation<T: Real>(m: &CMatrix<T>) -> T {
    max_abs_entry(&(m - m.adjoint()))
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket<T: Real> {
    n_qubits: usize,
    amplitudes: CVector<T>,
}

impl<T: Real> Ket<T> {
    /// Wraps amplitudes that must already be normalized within `1e-12`.
    pub fn new(amplitudes: CVector<T>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm2 = amplitudes.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        if (norm2 - T::one()).abs() > T::tol(1e-12) {
            return Err(QslError::NotNormalized(norm2.as_f64()));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Scales arbitrary amplitudes to unit norm.
    pub fn normalized(amplitudes: CVector<T>) -> Result<Self> {
        let norm2 = amplitudes.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        if !(norm2 > T::tol(1e-300)) || !norm2.is_finite() {
            return Err(QslError::ZeroAmplitudes);
        }
        let scale = T::one() / norm2.sqrt();
        Self::new(amplitudes.map(|z| z * scale))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket<T>) -> Complex<T> {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> CMatrix<T> {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix {
            n_qubits: self.n_qubits,
            entries: self.projector(),
        }
    }

    pub fn to_projector_operator(&self) -> Operator<T> {
        Operator {
            n_qubits: self.n_qubits,
            entries: self.projector(),
            hermitian: true,
        }
    }
}

/// Physical density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    n_qubits: usize,
    entries: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity and trace within `1e-12` and eigenvalues `≥ −1e-10`.
    pub fn new(entries: CMatrix<T>) -> Result<Self> {
        let rho = Self::new_unchecked(entries)?;
        rho.check_physical(T::tol(1e-10))?;
        Ok(rho)
    }

    /// Only checks the shape; used for outputs of trace- and positivity-preserving maps.
    pub fn new_unchecked(entries: CMatrix<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(QslError::DimensionMismatch(
                entries.nrows(),
                entries.ncols(),
            ));
        }
        let n_qubits = qubits_for_dim(entries.nrows())?;
        Ok(Self { n_qubits, entries })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        qubits_for_dim(dim)?;
        let scale = T::one() / T::lit(dim as f64);
        Ok(Self {
            n_qubits,
            entries: CMatrix::<T>::identity(dim, dim).map(|z| z * scale),
        })
    }

    pub fn check_physical(&self, eig_floor: T) -> Result<()> {
        let dev = hermitian_deviation(&self.entries);
        if dev > T::tol(1e-12) {
            return Err(QslError::NotHermitian(dev.as_f64()));
        }
        let tr = self.entries.trace();
        if (tr.re - T::one()).abs() > T::tol(1e-12) || tr.im.abs() > T::tol(1e-12) {
            return Err(QslError::NonPhysical(format!(
                "trace {} + {}i",
                tr.re.as_f64(),
                tr.im.as_f64()
            )));
        }
        let lowest = eig::hermitian_eigen(self.entries.clone())
            .0
            .iter()
            .fold(T::max_value().unwrap(), |m, &p| if p < m { p } else { m });
        if lowest < -eig_floor {
            return Err(QslError::NonPhysical(format!(
                "eigenvalue {:e}",
                lowest.as_f64()
            )));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix<T> {
        self.entries
    }

    pub fn purity(&self) -> T {
        // Tr[ρ²] = Σ|ρ_ij|² for Hermitian ρ
        self.entries.iter().fold(T::zero(), |s, z| s + z.norm_sqr())
    }

    pub fn as_operator(&self) -> Operator<T> {
        Operator {
            n_qubits: self.n_qubits,
            entries: self.entries.clone(),
            hermitian: true,
        }
    }
}

/// Linear operator on the N-qubit space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T: Real> {
    n_qubits: usize,
    entries: CMatrix<T>,
    hermitian: bool,
}

impl<T: Real> Operator<T> {
    /// Hermitian operator; rejects matrices that deviate from their adjoint by more than `1e-12`.
    pub fn hermitian(entries: CMatrix<T>) -> Result<Self> {
        let op = Self::general(entries)?;
        let dev = hermitian_deviation(&op.entries);
        if dev > T::tol(1e-12) {
            return Err(QslError::NotHermitian(dev.as_f64()));
        }
        Ok(Self {
            hermitian: true,
            ..op
        })
    }

    pub fn general(entries: CMatrix<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(QslError::DimensionMismatch(
                entries.nrows(),
                entries.ncols(),
            ));
        }
        let n_qubits = qubits_for_dim(entries.nrows())?;
        Ok(Self {
            n_qubits,
            entries,
            hermitian: false,
        })
    }

    pub(crate) fn hermitian_unchecked(entries: CMatrix<T>) -> Self {
        let n_qubits = entries.nrows().trailing_zeros() as usize;
        Self {
            n_qubits,
            entries,
            hermitian: true,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `alpha·self + beta·I`.
    pub fn affine(&self, alpha: T, beta: T) -> Self {
        let dim = self.dim();
        let shift = CMatrix::<T>::identity(dim, dim).map(|z| z * beta);
        Self {
            n_qubits: self.n_qubits,
            entries: self.entries.map(|z| z * alpha) + shift,
            hermitian: self.hermitian,
        }
    }
}

/// Tensor product, left argument as the leading (most significant) factor.
pub trait Kron: Sized {
    fn kron(&self, other: &Self) -> Result<Self>;
}

fn kron_dims(a: usize, b: usize) -> Result<usize> {
    qubits_for_dim(a)?;
    qubits_for_dim(b)?;
    let dim = a
        .checked_mul(b)
        .ok_or(QslError::DimensionTooLarge(usize::MAX))?;
    qubits_for_dim(dim)
}

impl<T: Real> Kron for Ket<T> {
    fn kron(&self, other: &Self) -> Result<Self> {
        let n_qubits = kron_dims(self.dim(), other.dim())?;
        Ok(Self {
            n_qubits,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }
}

impl<T: Real> Kron for Operator<T> {
    fn kron(&self, other: &Self) -> Result<Self> {
        let n_qubits = kron_dims(self.dim(), other.dim())?;
        Ok(Self {
            n_qubits,
            entries: self.entries.kronecker(&other.entries),
            hermitian: self.hermitian && other.hermitian,
        })
    }
}

impl<T: Real> Kron for DensityMatrix<T> {
    fn kron(&self, other: &Self) -> Result<Self> {
        let n_qubits = kron_dims(self.dim(), other.dim())?;
        Ok(Self {
            n_qubits,
            entries: self.entries.kronecker(&other.entries),
        })
    }
}

pub fn kron<K: Kron>(a: &K, b: &K) -> Result<K> {
    a.kron(b)
}

/// `k`-fold tensor power.
pub fn kron_power<K: Kron + Clone>(a: &K, k: usize) -> Result<K> {
    if k == 0 {
        return Err(QslError::Empty("tensor power of zero factors"));
    }
    let mut out = a.clone();
    for _ in 1..k {
        out = out.kron(a)?;
    }
    Ok(out)
}

/// Reduced state on the qubits listed in `keep` (kept in ascending order).
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: &[usize]) -> Result<DensityMatrix<T>> {
    let n = rho.n_qubits();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.len() != keep.len() || kept.iter().any(|&q| q >= n) {
        return Err(QslError::InvalidQubitSet {
            keep: keep.to_vec(),
            n,
        });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let sub = |index: usize, qubits: &[usize]| {
        qubits
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | qubit_bit(index, q, n))
    };
    let out_dim = 1usize << kept.len();
    let dim = rho.dim();
    let mut out = CMatrix::<T>::zeros(out_dim, out_dim);
    for i in 0..dim {
        let ti = sub(i, &traced);
        let ki = sub(i, &kept);
        for j in 0..dim {
            if sub(j, &traced) == ti {
                out[(ki, sub(j, &kept))] += rho.entries[(i, j)];
            }
        }
    }
    DensityMatrix::new_unchecked(out)
}

/// `Tr[ρA]` for Hermitian `A`.
pub fn expectation<T: Real>(rho: &DensityMatrix<T>, a: &Operator<T>) -> Result<T> {
    if rho.dim() != a.dim() {
        return Err(QslError::DimensionMismatch(rho.dim(), a.dim()));
    }
    if !a.is_hermitian() {
        return Err(QslError::NotHermitian(f64::NAN));
    }
    let value = trace_product(rho.entries(), a.entries());
    if value.im.abs() > T::tol(1e-8) {
        return Err(QslError::ImaginaryResidue(value.im.as_f64()));
    }
    Ok(value.re)
}

fn psd_sqrt<T: Real>(m: &CMatrix<T>, what: &str) -> Result<CMatrix<T>> {
    let (values, vectors) = eig::hermitian_eigen(m.clone());
    let mut scaled = vectors.clone();
    for (k, &p) in values.iter().enumerate() {
        if p < -T::tol(1e-8) {
            return Err(QslError::NonPhysical(format!(
                "{what} has eigenvalue {:e}",
                p.as_f64()
            )));
        }
        let s = if p > T::zero() { p.sqrt() } else { T::zero() };
        scaled.column_mut(k).scale_mut(s);
    }
    Ok(&scaled * vectors.adjoint())
}

/// Uhlmann fidelity `(Tr√(√ρ σ √ρ))²`, clamped to `[0, 1]`.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(QslError::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let root = psd_sqrt(rho.entries(), "rho")?;
    // reject a non-physical sigma as well
    psd_sqrt(sigma.entries(), "sigma")?;
    let inner = &root * sigma.entries() * &root;
    let inner = (&inner + inner.adjoint()).map(|z| z * T::lit(0.5));
    let sum = eig::hermitian_eigen(inner)
        .0
        .iter()
        .fold(
            T::zero(),
            |s, &p| if p > T::zero() { s + p.sqrt() } else { s },
        );
    let f = sum * sum;
    Ok(if f > T::one() { T::one() } else { f })
}
