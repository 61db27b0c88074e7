//! Named states, Pauli matrices and the collective birefringence Hamiltonian.

use std::fmt;

use nalgebra::Complex;

use super::{kron_power, Ket, Kron, Operator};
use crate::error::{QslError, Result};
use crate::scalar::{cr, CMatrix, CVector, Real};

/// Initial polarization states known to the laboratory.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    H,
    V,
    /// `(|H⟩ + |V⟩)/√2`
    Plus,
    /// `|+⟩^⊗N`
    PlusN(usize),
    /// `(|HH⟩ + |VV⟩)/√2`
    BellPhiPlus,
    /// `(|H⟩^⊗N + |V⟩^⊗N)/√2`
    Ghz(usize),
    /// Qubit with Bloch vector `(1,1,1)/√3`.
    P,
    /// `|P⟩^⊗N`
    PN(usize),
    /// Arbitrary amplitudes in the computational basis, normalized on construction.
    Custom(Vec<(f64, f64)>),
}

impl StateSpec {
    /// Parses a state name together with the particle count used by the N-party families.
    pub fn parse(name: &str, n: usize) -> Result<Self> {
        Ok(match name {
            "H" => Self::H,
            "V" => Self::V,
            "plus" => Self::Plus,
            "plusN" => Self::PlusN(n),
            "bell_phi_plus" => Self::BellPhiPlus,
            "ghz" => Self::Ghz(n),
            "P" => Self::P,
            "PN" => Self::PN(n),
            other => return Err(QslError::UnknownState(other.to_string())),
        })
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Self::H | Self::V | Self::Plus | Self::P => 1,
            Self::BellPhiPlus => 2,
            Self::PlusN(n) | Self::Ghz(n) | Self::PN(n) => *n,
            Self::Custom(a) => a.len().max(1).trailing_zeros() as usize,
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::H => write!(f, "H"),
            Self::V => write!(f, "V"),
            Self::Plus => write!(f, "plus"),
            Self::PlusN(n) => write!(f, "plus^{n}"),
            Self::BellPhiPlus => write!(f, "bell_phi_plus"),
            Self::Ghz(n) => write!(f, "ghz{n}"),
            Self::P => write!(f, "P"),
            Self::PN(n) => write!(f, "P^{n}"),
            Self::Custom(_) => write!(f, "custom"),
        }
    }
}

fn basis<T: Real>(bit: usize) -> Ket<T> {
    let mut amps = CVector::<T>::zeros(2);
    amps[bit] = cr(T::one());
    Ket::new(amps).expect("basis state")
}

fn p_state<T: Real>() -> Ket<T> {
    let s3 = T::lit(3.0).sqrt();
    let denom = (T::lit(3.0) + s3).sqrt();
    let h = (T::one() + s3) / (T::lit(2.0) * denom);
    let amps = CVector::from_vec(vec![Complex::new(h, -h), cr(T::one() / denom)]);
    Ket::normalized(amps).expect("|P> normalizable")
}

fn check_n(n: usize) -> Result<usize> {
    if n == 0 || n > 8 {
        return Err(QslError::DimensionTooLarge(
            1usize.checked_shl(n as u32).unwrap_or(0),
        ));
    }
    Ok(n)
}

pub fn make_state<T: Real>(spec: &StateSpec) -> Result<Ket<T>> {
    let half = T::one() / T::lit(2.0).sqrt();
    match spec {
        StateSpec::H => Ok(basis(0)),
        StateSpec::V => Ok(basis(1)),
        StateSpec::Plus => Ket::new(CVector::from_element(2, cr(half))),
        StateSpec::PlusN(n) => kron_power(&make_state(&StateSpec::Plus)?, check_n(*n)?),
        StateSpec::BellPhiPlus => make_state(&StateSpec::Ghz(2)),
        StateSpec::Ghz(n) => {
            let dim = 1usize << check_n(*n)?;
            let mut amps = CVector::<T>::zeros(dim);
            amps[0] = cr(half);
            amps[dim - 1] = cr(half);
            Ket::new(amps)
        }
        StateSpec::P => Ok(p_state()),
        StateSpec::PN(n) => kron_power(&p_state(), check_n(*n)?),
        StateSpec::Custom(raw) => {
            let amps = CVector::from_iterator(
                raw.len(),
                raw.iter()
                    .map(|&(re, im)| Complex::new(T::lit(re), T::lit(im))),
            );
            Ket::normalized(amps)
        }
    }
}

fn two_by_two<T: Real>(entries: [Complex<T>; 4]) -> Operator<T> {
    Operator::hermitian_unchecked(CMatrix::from_row_slice(2, 2, &entries))
}

pub fn pauli_x<T: Real>() -> Operator<T> {
    let (o, z) = (cr(T::one()), cr(T::zero()));
    two_by_two([z, o, o, z])
}

pub fn pauli_y<T: Real>() -> Operator<T> {
    let z = cr(T::zero());
    let i = Complex::new(T::zero(), T::one());
    two_by_two([z, -i, i, z])
}

pub fn pauli_z<T: Real>() -> Operator<T> {
    let (o, z) = (cr(T::one()), cr(T::zero()));
    two_by_two([o, z, z, -o])
}

pub fn hadamard<T: Real>() -> Operator<T> {
    let h = cr(T::one() / T::lit(2.0).sqrt());
    two_by_two([h, h, h, -h])
}

pub fn identity<T: Real>(n_qubits: usize) -> Operator<T> {
    let dim = 1usize << n_qubits;
    Operator::hermitian_unchecked(CMatrix::identity(dim, dim))
}

fn collective<T: Real>(single: &Operator<T>, n: usize) -> Result<Operator<T>> {
    check_n(n)?;
    let dim = 1usize << n;
    let mut total = CMatrix::<T>::zeros(dim, dim);
    for site in 0..n {
        let mut term = if site == 0 {
            single.clone()
        } else {
            identity(site)
        };
        if site > 0 {
            term = term.kron(single)?;
        }
        if site + 1 < n {
            term = term.kron(&identity(n - site - 1))?;
        }
        total += term.entries();
    }
    let pi = T::pi();
    Ok(Operator::hermitian_unchecked(total.map(|z| z * pi)))
}

/// `π·Σ_x σ_z^(x)` in units where the center wavelength is one.
///
/// Diagonal entry for basis index `b` is `π·(N − 2·popcount(b))`.
pub fn collective_hamiltonian<T: Real>(n: usize) -> Result<Operator<T>> {
    collective(&pauli_z(), n)
}

/// Generator of the 45° noise crystal: `π·Σ_x σ_x^(x)`.
pub fn collective_sigma_x<T: Real>(n: usize) -> Result<Operator<T>> {
    collective(&pauli_x(), n)
}
