//! Simultaneous measurement of a linear transfer function and the power
//! spectral density of the residual noise at the output of a disturbed
//! system, from one campaign of randomized periodic excitations.
//!
//! The toolkit has five parts:
//!
//! * [`numerics`] — precision-critical primitives (FFT conventions, ordered
//!   summation, exact-argument trig tables, inverse complementary error
//!   function, double-double accumulation),
//! * [`window`] — construction and verification of the power-complementary
//!   window sequences the method requires, plus a catalog of classical
//!   windows with feasibility flags,
//! * [`signals`] — excitation ensembles: random multitone, complex chirp,
//!   a crest-factor-controlled real chirp, and Gaussian vectors,
//! * [`engine`] — the measurement core: windowed folding, streaming
//!   covariance accumulation, the estimators and their confidence regions,
//! * [`systems`] — simulated devices under test with queryable theoretical
//!   responses and noise spectra for end-to-end checks.

pub mod engine;
pub mod error;
pub mod numerics;
pub mod signals;
pub mod systems;
pub mod window;

pub use error::{Error, Result};
pub use num_complex::Complex64;
