use rayon::prelude::*;

use super::{
    dephasing_derivative, evolve_dephasing, evolve_grid, SegmentSpec, SpectralModel,
    DEFAULT_NODES_PER_AXIS,
};
use crate::error::{QslError, Result};
use crate::quantum::{DensityMatrix, Ket};
use crate::scalar::{CMatrix, Real};

/// Internal step of the five-point derivative stencil, in wavelengths.
pub const STENCIL_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoDotMethod {
    Analytic,
    Stencil,
}

/// `l ↦ ρ(l)`: a prepared state sent through a variable H/V-axis crystal of
/// optical path difference `l`, followed by fixed tail segments (noise crystals).
///
/// The preparation may be degraded towards the maximally mixed state; every
/// segment is a mixture of unitaries, hence unital, so the white-noise part is
/// carried through unchanged.
#[derive(Debug, Clone)]
pub struct Evolution<T: Real> {
    initial: Ket<T>,
    prep_infidelity: T,
    model: SpectralModel<T>,
    tail: Vec<SegmentSpec<T>>,
    nodes_per_axis: usize,
}

impl<T: Real> Evolution<T> {
    pub fn new(initial: Ket<T>, model: SpectralModel<T>) -> Result<Self> {
        if initial.n_qubits() != model.n_photons() {
            return Err(QslError::DimensionMismatch(
                initial.n_qubits(),
                model.n_photons(),
            ));
        }
        Ok(Self {
            initial,
            prep_infidelity: T::zero(),
            model,
            tail: Vec::new(),
            nodes_per_axis: DEFAULT_NODES_PER_AXIS,
        })
    }

    pub fn with_tail(mut self, tail: Vec<SegmentSpec<T>>) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_nodes_per_axis(mut self, nodes: usize) -> Self {
        self.nodes_per_axis = nodes;
        self
    }

    /// Mixes the prepared state with white noise: `(1 − ε)|ψ⟩⟨ψ| + ε·I/2^N`.
    pub fn with_prep_infidelity(mut self, eps: T) -> Result<Self> {
        if !(eps >= T::zero() && eps < T::one()) {
            return Err(QslError::InvalidConfig(format!(
                "preparation infidelity {} outside [0, 1)",
                eps.as_f64()
            )));
        }
        self.prep_infidelity = eps;
        Ok(self)
    }

    pub fn initial(&self) -> &Ket<T> {
        &self.initial
    }

    pub fn model(&self) -> &SpectralModel<T> {
        &self.model
    }

    pub fn tail(&self) -> &[SegmentSpec<T>] {
        &self.tail
    }

    pub fn prep_infidelity(&self) -> T {
        self.prep_infidelity
    }

    /// True when only the H/V-axis crystal acts, so closed forms apply.
    pub fn is_pure_dephasing(&self) -> bool {
        self.tail.iter().all(|s| s.length == T::zero())
    }

    /// True for monochromatic pure dephasing: a unitary orbit of the initial state.
    pub fn is_unitary(&self) -> bool {
        self.is_pure_dephasing() && self.model.rel_cov().amax() == T::zero()
    }

    fn prepared(&self) -> DensityMatrix<T> {
        let pure = self.initial.to_density();
        if self.prep_infidelity == T::zero() {
            return pure;
        }
        self.whiten(pure.into_entries())
    }

    fn whiten(&self, m: CMatrix<T>) -> DensityMatrix<T> {
        let dim = m.nrows();
        let eps = self.prep_infidelity;
        let keep = T::one() - eps;
        let white = eps / T::lit(dim as f64);
        let mut out = m.map(|z| z * keep);
        for d in 0..dim {
            out[(d, d)].re += white;
        }
        DensityMatrix::new_unchecked(out).expect("square power-of-two matrix")
    }

    pub fn rho_at(&self, l: T) -> Result<DensityMatrix<T>> {
        if self.is_pure_dephasing() {
            return evolve_dephasing(&self.prepared(), &self.model, l);
        }
        let mut segments = Vec::with_capacity(self.tail.len() + 1);
        segments.push(SegmentSpec::z(l));
        segments.extend_from_slice(&self.tail);
        let pure = evolve_grid(&self.initial, &self.model, &segments, self.nodes_per_axis)?;
        if self.prep_infidelity == T::zero() {
            Ok(pure)
        } else {
            Ok(self.whiten(pure.into_entries()))
        }
    }

    /// `dρ/dl`, made exactly Hermitian and traceless.
    pub fn rho_dot(&self, l: T, method: RhoDotMethod) -> Result<CMatrix<T>> {
        let raw = match method {
            RhoDotMethod::Analytic => {
                if !self.is_pure_dephasing() {
                    return Err(QslError::MethodMismatch);
                }
                dephasing_derivative(&self.prepared(), &self.model, l)?
            }
            RhoDotMethod::Stencil => {
                let h = T::lit(STENCIL_STEP);
                let two = T::lit(2.0);
                let at = |x: T| self.rho_at(x).map(DensityMatrix::into_entries);
                let (m2, m1, p1, p2) = (at(l - two * h)?, at(l - h)?, at(l + h)?, at(l + two * h)?);
                let eight = T::lit(8.0);
                let scale = T::one() / (T::lit(12.0) * h);
                (m2 - p2 + (p1 - m1).map(|z| z * eight)).map(|z| z * scale)
            }
        };
        let dim = raw.nrows();
        let mut sym = (&raw + raw.adjoint()).map(|z| z * T::lit(0.5));
        let shift = sym.trace().re / T::lit(dim as f64);
        for d in 0..dim {
            sym[(d, d)].re -= shift;
            sym[(d, d)].im = T::zero();
        }
        Ok(sym)
    }

    /// Preferred derivative route: closed form when available, stencil otherwise.
    pub fn default_method(&self) -> RhoDotMethod {
        if self.is_pure_dephasing() {
            RhoDotMethod::Analytic
        } else {
            RhoDotMethod::Stencil
        }
    }

    pub fn trajectory(&self, l_grid: &[T], scenario_tag: &str) -> Result<Trajectory<T>> {
        let states = l_grid
            .par_iter()
            .map(|&l| self.rho_at(l))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(l_grid.to_vec(), states, scenario_tag.to_string())
    }
}

/// Samples of `ρ(l)` on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub l_grid: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    pub scenario_tag: String,
}

impl<T: Real> Trajectory<T> {
    pub fn new(
        l_grid: Vec<T>,
        states: Vec<DensityMatrix<T>>,
        scenario_tag: String,
    ) -> Result<Self> {
        if l_grid.len() != states.len() {
            return Err(QslError::DimensionMismatch(l_grid.len(), states.len()));
        }
        if l_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(QslError::InvalidConfig(
                "l grid must be strictly increasing".into(),
            ));
        }
        for rho in &states {
            rho.check_physical(T::tol(1e-10))?;
        }
        Ok(Self {
            l_grid,
            states,
            scenario_tag,
        })
    }
}
