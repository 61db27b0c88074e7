//! Speed limits on the expectation value `a(l) = Tr[ρ(l)A]`.
//!
//! The observable is split in the eigenbasis of `ρ` into an off-diagonal
//! (coherent) part `A_C` and a diagonal (incoherent) part `A_I`. Each part's
//! speed is bounded by its spread times the square root of the matching
//! Fisher-information component, which sandwiches the total speed:
//!
//! `max(b_CI⁻, b_IC⁻) ≤ |ȧ| ≤ min(b_CI⁺, b_IC⁺)`, with `b_mn^± = |ȧ_m| ± ΔA_n·√I_n`.

mod search;

pub use search::{golden_section_max, max_speed, GOLDEN_TOL};

use nalgebra::Complex;
use rayon::prelude::*;

use crate::error::{QslError, Result};
use crate::quantum::{collective_hamiltonian, DensityMatrix, EigenDecomposition, Operator};
use crate::scalar::{trace_product_re, CMatrix, Real};
use crate::spectral::Evolution;

/// Threshold on eigenvalue denominators in the Fisher-information sums.
pub const DEFAULT_EPS_P: f64 = 1e-12;
/// `Tr[ρ²]` above `1 − PURITY_SLACK` counts as pure.
pub const PURITY_SLACK: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CoherentIncoherentSplit<T: Real> {
    pub a_c_operator: Operator<T>,
    pub a_i_operator: Operator<T>,
    pub delta_a_c: T,
    pub delta_a_i: T,
    /// Eigenbasis of `ρ` after degeneracy canonicalization against `A`.
    pub basis: EigenDecomposition<T>,
}

fn clamp_sqrt<T: Real>(x: T) -> T {
    if x > T::zero() {
        x.sqrt()
    } else {
        T::zero()
    }
}

/// Splits `a` into coherent and incoherent parts relative to the spectral decomposition of `ρ`.
pub fn split_observable<T: Real>(
    a: &Operator<T>,
    eig: &EigenDecomposition<T>,
) -> Result<CoherentIncoherentSplit<T>> {
    if !a.is_hermitian() {
        return Err(QslError::NotHermitian(f64::NAN));
    }
    if a.dim() != eig.dim() {
        return Err(QslError::DimensionMismatch(a.dim(), eig.dim()));
    }
    let mut basis = eig.clone();
    basis.canonicalize(a.entries());
    let dim = a.dim();
    let rotated = basis.to_eigenbasis(a.entries());
    let p: Vec<T> = basis
        .eigenvalues
        .iter()
        .map(|&x| if x > T::zero() { x } else { T::zero() })
        .collect();

    let mut diag = CMatrix::<T>::zeros(dim, dim);
    let mut off = rotated.clone();
    let (mut mean_i, mut second_i, mut second_c) = (T::zero(), T::zero(), T::zero());
    for j in 0..dim {
        let ajj = rotated[(j, j)].re;
        diag[(j, j)] = rotated[(j, j)];
        off[(j, j)] = Complex::new(T::zero(), T::zero());
        mean_i += p[j] * ajj;
        second_i += p[j] * ajj * ajj;
        let row = (0..dim)
            .filter(|&k| k != j)
            .fold(T::zero(), |s, k| s + rotated[(j, k)].norm_sqr());
        second_c += p[j] * row;
    }
    Ok(CoherentIncoherentSplit {
        a_c_operator: Operator::hermitian_unchecked(basis.from_eigenbasis(&off)),
        a_i_operator: Operator::hermitian_unchecked(basis.from_eigenbasis(&diag)),
        // ⟨A_C⟩ vanishes identically: A_C has no diagonal in the eigenbasis of ρ
        delta_a_c: clamp_sqrt(second_c),
        delta_a_i: clamp_sqrt(second_i - mean_i * mean_i),
        basis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiPair<T: Real> {
    pub qfi_c: T,
    pub qfi_i: T,
}

/// Coherent and incoherent Fisher-information components of `ρ̇` in the eigenbasis of `ρ`.
pub fn qfi_components<T: Real>(
    eig: &EigenDecomposition<T>,
    rho_dot: &CMatrix<T>,
    eps_p: T,
) -> QfiPair<T> {
    let d = eig.to_eigenbasis(rho_dot);
    qfi_in_eigenbasis(&eig.eigenvalues, &d, eps_p)
}

fn qfi_in_eigenbasis<T: Real>(p: &[T], d: &CMatrix<T>, eps_p: T) -> QfiPair<T> {
    let dim = p.len();
    let (mut qfi_c, mut qfi_i) = (T::zero(), T::zero());
    for j in 0..dim {
        if p[j] > eps_p {
            qfi_i += d[(j, j)].norm_sqr() / p[j];
        }
        for k in (j + 1)..dim {
            let denom = p[j] + p[k];
            if denom > eps_p {
                // both orderings (j,k) and (k,j) of the symmetric sum
                qfi_c += T::lit(4.0) * d[(j, k)].norm_sqr() / denom;
            }
        }
    }
    QfiPair { qfi_c, qfi_i }
}

/// Every quantity of the sandwich bound at one point of the evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRecord<T: Real> {
    pub l: T,
    pub a: T,
    /// Signed `Tr[ρ̇A]`; the speed is its magnitude.
    pub a_dot: T,
    pub a_dot_c: T,
    pub a_dot_i: T,
    pub b_ci_plus: T,
    pub b_ci_minus: T,
    pub b_ic_plus: T,
    pub b_ic_minus: T,
    pub lower: T,
    pub upper: T,
    /// `2·ΔA·ΔH`, when a system Hamiltonian generates the evolution.
    pub mt: Option<T>,
    /// `√(a(1−a)·I_C)`, emitted for pure states only.
    pub pure_upper: Option<T>,
    pub qfi_c: T,
    pub qfi_i: T,
    pub delta_a_c: T,
    pub delta_a_i: T,
    pub purity: T,
}

impl<T: Real> BoundsRecord<T> {
    pub fn speed(&self) -> T {
        self.a_dot.abs()
    }

    /// Whether `lower − tol ≤ |ȧ| ≤ upper + tol` fails.
    pub fn violates_sandwich(&self, tol: T) -> bool {
        let s = self.speed();
        !(self.lower - tol <= s && s <= self.upper + tol)
    }

    /// `|ȧ| − lower`: how far the speed sits above the lower bound.
    pub fn lower_gap(&self) -> T {
        self.speed() - self.lower
    }
}

fn spread<T: Real>(rho: &CMatrix<T>, op: &CMatrix<T>) -> T {
    let mean = trace_product_re(rho, op);
    let second = trace_product_re(rho, &(op * op));
    clamp_sqrt(second - mean * mean)
}

/// Evaluates the sandwich bound for `ρ`, `ρ̇` and observable `a_obs`; `h` adds the Mandelstam–Tamm bound.
pub fn bounds_at<T: Real>(
    l: T,
    rho: &DensityMatrix<T>,
    rho_dot: &CMatrix<T>,
    a_obs: &Operator<T>,
    h: Option<&Operator<T>>,
) -> Result<BoundsRecord<T>> {
    let dim = rho.dim();
    if rho_dot.nrows() != dim || a_obs.dim() != dim {
        return Err(QslError::DimensionMismatch(dim, a_obs.dim()));
    }
    let eig =
        EigenDecomposition::of_hermitian(rho.entries(), T::lit(crate::quantum::DEFAULT_TOL_DEGEN));
    let split = split_observable(a_obs, &eig)?;
    let basis = &split.basis;
    let rho_dot_eb = basis.to_eigenbasis(rho_dot);
    let qfi = qfi_in_eigenbasis(&basis.eigenvalues, &rho_dot_eb, T::lit(DEFAULT_EPS_P));

    let a = trace_product_re(rho.entries(), a_obs.entries());
    let a_dot = trace_product_re(rho_dot, a_obs.entries());
    let a_dot_c = trace_product_re(rho_dot, split.a_c_operator.entries());
    let a_dot_i = trace_product_re(rho_dot, split.a_i_operator.entries());

    let reach_c = split.delta_a_c * qfi.qfi_c.sqrt();
    let reach_i = split.delta_a_i * qfi.qfi_i.sqrt();
    let b_ci_plus = a_dot_c.abs() + reach_i;
    let b_ci_minus = a_dot_c.abs() - reach_i;
    let b_ic_plus = a_dot_i.abs() + reach_c;
    let b_ic_minus = a_dot_i.abs() - reach_c;

    let purity = rho.purity();
    let pure_upper = if purity >= T::one() - T::lit(PURITY_SLACK) {
        Some(clamp_sqrt(a * (T::one() - a) * qfi.qfi_c))
    } else {
        None
    };
    let mt = match h {
        Some(h) => {
            if h.dim() != dim {
                return Err(QslError::DimensionMismatch(dim, h.dim()));
            }
            Some(
                T::lit(2.0)
                    * spread(rho.entries(), a_obs.entries())
                    * spread(rho.entries(), h.entries()),
            )
        }
        None => None,
    };

    Ok(BoundsRecord {
        l,
        a,
        a_dot,
        a_dot_c,
        a_dot_i,
        b_ci_plus,
        b_ci_minus,
        b_ic_plus,
        b_ic_minus,
        lower: if b_ci_minus > b_ic_minus {
            b_ci_minus
        } else {
            b_ic_minus
        },
        upper: if b_ci_plus < b_ic_plus {
            b_ci_plus
        } else {
            b_ic_plus
        },
        mt,
        pure_upper,
        qfi_c: qfi.qfi_c,
        qfi_i: qfi.qfi_i,
        delta_a_c: split.delta_a_c,
        delta_a_i: split.delta_a_i,
        purity,
    })
}

/// Bound record of an evolution at `l`, using its preferred `ρ̇` route. The
/// collective Hamiltonian is attached whenever the evolution is unitary.
pub fn record_at<T: Real>(ev: &Evolution<T>, a_obs: &Operator<T>, l: T) -> Result<BoundsRecord<T>> {
    let rho = ev.rho_at(l)?;
    let rho_dot = ev.rho_dot(l, ev.default_method())?;
    let h = if ev.is_unitary() {
        Some(collective_hamiltonian(ev.model().n_photons())?)
    } else {
        None
    };
    bounds_at(l, &rho, &rho_dot, a_obs, h.as_ref())
}

/// Records over a grid, evaluated in parallel and returned in grid order.
pub fn scan<T: Real>(
    ev: &Evolution<T>,
    a_obs: &Operator<T>,
    l_grid: &[T],
) -> Result<Vec<BoundsRecord<T>>> {
    l_grid
        .par_iter()
        .map(|&l| record_at(ev, a_obs, l))
        .collect()
}

/// Signed `ȧ(l)` alone, for refinement searches.
pub fn a_dot_at<T: Real>(ev: &Evolution<T>, a_obs: &Operator<T>, l: T) -> Result<T> {
    let rho_dot = ev.rho_dot(l, ev.default_method())?;
    Ok(trace_product_re(&rho_dot, a_obs.entries()))
}
