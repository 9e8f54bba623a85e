//! Noise-unbiased quantum frequency estimation under spatially correlated dephasing.
//!
//! Modules, bottom-up:
//! - [`specfun`]: Gamma, complex polygamma, Lambert W, Chebyshev polynomials.
//! - [`noise`]: spin-boson spectral density, overlap integrals, pair coefficients.
//! - [`exactsim`]: exact density-matrix evolution for up to 12 qubits.
//! - [`estimators`]: standard and ratio estimators, outcome statistics, closed-form uncertainties.
//! - [`oat`]: squeezed-state angles and short-time collective-spin moments.
//! - [`optimize`]: spatial function, optimal times and spacings, scaling sweeps.

pub mod error;
pub mod estimators;
pub mod exactsim;
pub mod noise;
pub mod oat;
pub mod optimize;
pub mod specfun;

pub use error::{Error, Result};

pub use estimators::{EstimatorKind, EstimatorStats, GhzProbabilities, MomentSet};
pub use exactsim::{CollectiveSpinOps, DensityMatrix, StateKind};
pub use noise::{BasisString, DynamicCoefficients, LatticeGeometry, NoiseParams};
pub use oat::{ExpansionCoefficients, OatAngles};
pub use optimize::{OptimumRecord, ScalingFit, SolveMethod, StateFamily};
pub use specfun::{ComplexValue, WBranch};

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
