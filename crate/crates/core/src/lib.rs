//! Numerical engine for laboratory-frame elastic scattering.
//!
//! The crate is organised around the objects a scattering calculation needs:
//!
//! * [`kinematics`]: momenta, kinetic energies and the elastic two-body
//!   conservation solver used to place detectors.
//! * [`greenfn`]: closed-form and FFT-built retarded free propagators, and
//!   spectral propagation of fields on a periodic box.
//! * [`born`]: potentials, box-normalized momentum grids, the Born-series
//!   T-matrix and the time-ordered Dyson terms of a finite system.
//! * [`transition`]: transition amplitudes and probabilities, reciprocity
//!   residuals, detector amplitudes and golden-rule rates.
//! * [`smatrix`]: exact and perturbative interaction-picture evolution,
//!   S-matrix, unitarity and the final-state sum rule.
//!
//! Natural units are used throughout: ħ = 1, masses and momenta dimensionless.

pub mod born;
pub mod error;
pub mod greenfn;
pub mod kinematics;
pub mod quadrature;
pub mod smatrix;
pub mod transition;

pub use error::{Result, ScatterError};
