//! Quantum speed limits for photonic qubits under spectral dephasing.
//!
//! A polarization state passes through a birefringent crystal of optical path
//! difference `l` (in wavelengths). The finite photon bandwidth turns the
//! polarization-dependent phase into dephasing. [`bounds`] evaluates the
//! coherent/incoherent sandwich bounds on `|d⟨A⟩/dl|` along that evolution and
//! [`experiment`] emulates the tomographic measurement with Poisson counts.
//!
//! The numerical core is generic over [`Real`]; the aliases below fix it to
//! `f64` or `f32`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod quantum;
pub mod scalar;
pub mod spectral;

pub use bounds::{
    bounds_at, max_speed, record_at, scan, BoundsRecord, CoherentIncoherentSplit, QfiPair,
};
pub use error::{QslError, Result};
pub use experiment::{ExperimentConfig, SpeedEstimate, TomographyDataset};
pub use quantum::{make_state, DensityMatrix, EigenDecomposition, Ket, Operator, StateSpec};
pub use scalar::Real;
pub use spectral::{model_from_optics, Evolution, SegmentSpec, SpectralKind, SpectralModel};

pub type Ket64 = Ket<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type Operator64 = Operator<f64>;
pub type SpectralModel64 = SpectralModel<f64>;
pub type Evolution64 = Evolution<f64>;
pub type BoundsRecord64 = BoundsRecord<f64>;

pub type Ket32 = Ket<f32>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type Operator32 = Operator<f32>;
pub type SpectralModel32 = SpectralModel<f32>;
pub type Evolution32 = Evolution<f32>;
pub type BoundsRecord32 = BoundsRecord<f32>;
