//! Frequency environment of the photons and the dephasing it induces.
//!
//! Each photon's frequency is written as `ω_x = ω̄·(1 + u_x)` with `u` jointly
//! Gaussian. A birefringent segment of optical path difference `l` (in units of
//! the center wavelength) puts the phase `exp(i·2π·(ω_x/ω̄)·l)` on `|H⟩` relative
//! to `|V⟩`. Averaging over `u` turns every density-matrix coherence into a
//! Gaussian characteristic function evaluated at `t = 2π·k·l`.

mod dephasing;
mod evolution;
mod grid;
mod oracle;
mod quadrature;

pub use dephasing::{coherence_orders, dephasing_derivative, evolve_dephasing};
pub use evolution::{Evolution, RhoDotMethod, Trajectory, STENCIL_STEP};
pub use grid::{evolve_grid, DEFAULT_NODES_PER_AXIS, MIN_NODES_PER_AXIS};
pub use oracle::{quadrature_oracle_gamma, MIN_ORACLE_NODES};
pub use quadrature::{GaussHermite, JointGaussianGrid};

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};

use crate::error::{QslError, Result};
use crate::scalar::{cexp, Real};

/// `2·√(2·ln 2)`: ratio between a Gaussian's FWHM and its standard deviation.
pub fn fwhm_per_sigma<T: Real>() -> T {
    T::lit(2.0) * (T::lit(2.0) * T::lit(2.0).ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralKind {
    Monochromatic,
    Decorrelated,
    /// Photon pair from a narrow continuous-wave pump: anti-correlated frequencies.
    Correlated,
}

impl FromStr for SpectralKind {
    type Err = QslError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monochromatic" => Ok(Self::Monochromatic),
            "decorrelated" => Ok(Self::Decorrelated),
            "correlated" => Ok(Self::Correlated),
            other => Err(QslError::InvalidModel(format!(
                "unknown source kind `{other}`"
            ))),
        }
    }
}

impl fmt::Display for SpectralKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Monochromatic => "monochromatic",
            Self::Decorrelated => "decorrelated",
            Self::Correlated => "correlated",
        })
    }
}

/// Joint Gaussian distribution of the relative photon frequencies `ω_x/ω̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel<T: Real> {
    kind: SpectralKind,
    center_wavelength_nm: T,
    rel_mean: Vec<T>,
    rel_cov: DMatrix<T>,
    /// `Var(Σω)/ω̄²` fixed by the pump, when the kind is correlated.
    sum_variance: Option<T>,
}

impl<T: Real> SpectralModel<T> {
    /// General model with unit relative means. `rel_cov` must be symmetric PSD.
    pub fn from_covariance(
        kind: SpectralKind,
        center_wavelength_nm: T,
        rel_cov: DMatrix<T>,
    ) -> Result<Self> {
        let n = rel_cov.nrows();
        if n == 0 || n > 8 || !rel_cov.is_square() {
            return Err(QslError::InvalidModel(format!(
                "covariance must be n×n with 1 ≤ n ≤ 8, got {}×{}",
                rel_cov.nrows(),
                rel_cov.ncols()
            )));
        }
        if !(center_wavelength_nm > T::zero()) {
            return Err(QslError::InvalidModel(
                "center wavelength must be positive".into(),
            ));
        }
        let asym = (&rel_cov - rel_cov.transpose()).amax();
        if asym > T::tol(1e-15) {
            return Err(QslError::InvalidModel("covariance is not symmetric".into()));
        }
        let lowest = rel_cov
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(T::zero(), |m, &x| if x < m { x } else { m });
        if lowest < -T::tol(1e-15) {
            return Err(QslError::InvalidModel(format!(
                "covariance has negative eigenvalue {:e}",
                lowest.as_f64()
            )));
        }
        if kind == SpectralKind::Monochromatic && rel_cov.amax() != T::zero() {
            return Err(QslError::InvalidModel(
                "monochromatic model must have zero covariance".into(),
            ));
        }
        Ok(Self {
            kind,
            center_wavelength_nm,
            rel_mean: vec![T::one(); n],
            rel_cov,
            sum_variance: None,
        })
    }

    pub fn monochromatic(n: usize) -> Result<Self> {
        Self::from_covariance(
            SpectralKind::Monochromatic,
            T::lit(808.0),
            DMatrix::zeros(n, n),
        )
    }

    pub fn kind(&self) -> SpectralKind {
        self.kind
    }

    pub fn n_photons(&self) -> usize {
        self.rel_mean.len()
    }

    pub fn center_wavelength_nm(&self) -> T {
        self.center_wavelength_nm
    }

    pub fn rel_mean(&self) -> &[T] {
        &self.rel_mean
    }

    pub fn rel_cov(&self) -> &DMatrix<T> {
        &self.rel_cov
    }

    pub fn sum_variance(&self) -> Option<T> {
        self.sum_variance
    }

    /// Per-photon relative standard deviation `σ_r`.
    pub fn rel_std(&self, photon: usize) -> T {
        self.rel_cov[(photon, photon)].sqrt()
    }

    /// Marginal model of the listed photons.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() || keep.iter().any(|&q| q >= self.n_photons()) {
            return Err(QslError::InvalidModel(format!("invalid marginal {keep:?}")));
        }
        let cov = DMatrix::from_fn(keep.len(), keep.len(), |r, c| {
            self.rel_cov[(keep[r], keep[c])]
        });
        let kind = match (self.kind, keep.len()) {
            (SpectralKind::Correlated, 1) => SpectralKind::Decorrelated,
            (k, _) => k,
        };
        let mut m = Self::from_covariance(kind, self.center_wavelength_nm, cov)?;
        if keep.len() == self.n_photons() {
            m.sum_variance = self.sum_variance;
        }
        Ok(m)
    }
}

fn positive<T: Real>(value: Option<T>, what: &str) -> Result<T> {
    match value {
        Some(v) if v > T::zero() && v.is_finite() => Ok(v),
        Some(_) => Err(QslError::InvalidModel(format!("{what} must be positive"))),
        None => Err(QslError::InvalidModel(format!("{what} is required"))),
    }
}

/// Builds a Gaussian model from the filter and pump bandwidths of the source.
///
/// The filter FWHM sets the per-photon relative width; for a correlated pair the
/// pump FWHM (at half the center wavelength) fixes the variance of the sum frequency.
pub fn model_from_optics<T: Real>(
    kind: SpectralKind,
    center_nm: T,
    filter_fwhm_nm: Option<T>,
    pump_fwhm_nm: Option<T>,
    n: usize,
) -> Result<SpectralModel<T>> {
    if n == 0 || n > 8 {
        return Err(QslError::InvalidModel(format!(
            "photon count {n} outside 1..=8"
        )));
    }
    if !(center_nm > T::zero()) {
        return Err(QslError::InvalidModel(
            "center wavelength must be positive".into(),
        ));
    }
    let k = fwhm_per_sigma::<T>();
    match kind {
        SpectralKind::Monochromatic => {
            SpectralModel::from_covariance(kind, center_nm, DMatrix::zeros(n, n))
        }
        SpectralKind::Decorrelated => {
            let sigma = positive(filter_fwhm_nm, "filter FWHM")? / center_nm / k;
            SpectralModel::from_covariance(
                kind,
                center_nm,
                DMatrix::from_diagonal_element(n, n, sigma * sigma),
            )
        }
        SpectralKind::Correlated => {
            if n != 2 {
                return Err(QslError::InvalidModel(format!(
                    "correlated sources are limited to photon pairs, got n = {n}"
                )));
            }
            let sigma = positive(filter_fwhm_nm, "filter FWHM")? / center_nm / k;
            let pump_center = center_nm / T::lit(2.0);
            let pump_rel = positive(pump_fwhm_nm, "pump FWHM")? / pump_center / k;
            let sum_variance = (T::lit(2.0) * pump_rel) * (T::lit(2.0) * pump_rel);
            let var = sigma * sigma;
            let cross = (sum_variance - T::lit(2.0) * var) / T::lit(2.0);
            let cov = DMatrix::from_row_slice(2, 2, &[var, cross, cross, var]);
            let mut model = SpectralModel::from_covariance(kind, center_nm, cov)?;
            model.sum_variance = Some(sum_variance);
            Ok(model)
        }
    }
}

/// `χ(t) = exp(i·Σ μ_x t_x − ½·tᵀΣt)`.
pub fn characteristic_function<T: Real>(model: &SpectralModel<T>, t: &[T]) -> Result<Complex<T>> {
    let n = model.n_photons();
    if t.len() != n {
        return Err(QslError::DimensionMismatch(t.len(), n));
    }
    let phase = t
        .iter()
        .zip(&model.rel_mean)
        .fold(T::zero(), |s, (&ti, &mi)| s + ti * mi);
    let mut quad = T::zero();
    for r in 0..n {
        for c in 0..n {
            quad += t[r] * model.rel_cov[(r, c)] * t[c];
        }
    }
    Ok(cexp(Complex::new(-quad / T::lit(2.0), phase)))
}

/// Coherence orders must lie in `{−1, 0, 1}`.
fn check_orders(k: &[i8], n: usize) -> Result<()> {
    if k.len() != n {
        return Err(QslError::DimensionMismatch(k.len(), n));
    }
    if k.iter().any(|&x| !(-1..=1).contains(&x)) {
        return Err(QslError::InvalidModel(format!(
            "coherence orders {k:?} outside {{-1,0,1}}"
        )));
    }
    Ok(())
}

/// Dephasing factor `Γ_k(l) = χ(2π·k·l)` multiplying a coherence of order `k`.
pub fn dephasing_factor<T: Real>(model: &SpectralModel<T>, k: &[i8], l: T) -> Result<Complex<T>> {
    check_orders(k, model.n_photons())?;
    let two_pi_l = T::two_pi() * l;
    let t: Vec<T> = k.iter().map(|&kx| T::lit(kx as f64) * two_pi_l).collect();
    characteristic_function(model, &t)
}

/// Optic-axis orientation of a birefringent segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Along `H`/`V`: the variable evolution crystal.
    Z,
    /// At 45°, along `|±⟩`: the noise crystal.
    X,
}

impl FromStr for Axis {
    type Err = QslError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z" => Ok(Self::Z),
            "x" => Ok(Self::X),
            other => Err(QslError::InvalidModel(format!("unknown axis `{other}`"))),
        }
    }
}

/// One birefringent crystal; `length` is the optical path difference in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSpec<T: Real> {
    pub axis: Axis,
    pub length: T,
}

impl<T: Real> SegmentSpec<T> {
    pub fn z(length: T) -> Self {
        Self {
            axis: Axis::Z,
            length,
        }
    }

    pub fn x(length: T) -> Self {
        Self {
            axis: Axis::X,
            length,
        }
    }
}
