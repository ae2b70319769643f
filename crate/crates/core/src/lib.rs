//! Hybrid-field channel estimation for extremely large antenna arrays.
//!
//! The channel seen by a long uniform linear array is a superposition of
//! planar-wave (far-field) and spherical-wave (near-field) paths. This crate
//! generates such channels, builds a joint angular/polar dictionary for them
//! and recovers the channel from a single correlated pilot observation with
//! a residual-thresholded greedy pursuit whose selected atoms are refined
//! off the grid with scalar gradient steps.
//!
//! Module map:
//!
//! - [`channel`]: steering vectors, scene sampling, Rician channel synthesis.
//! - [`dictionary`]: column-normalized hybrid dictionary with atom metadata.
//! - [`observation`]: pilot correlation model and SNR/noise conversion.
//! - [`estimator`]: ε-thresholded pursuit with single-column refinement.
//! - [`baselines`]: LS, LMMSE and oracle-sparsity OMP reference estimators.
//! - [`harness`]: NMSE, Monte-Carlo sweeps, complexity formulas, CSV output.

pub mod baselines;
pub mod channel;
pub mod dictionary;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod observation;

pub use error::{Error, Result};

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;
/// Column vector of complex samples.
pub type CVector = nalgebra::DVector<C64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
