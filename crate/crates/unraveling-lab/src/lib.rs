//! Unravelings of repeated quantum measurement processes.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense complex linear algebra, spectral radii, matrix
//!   exponentials, stationary vectors and Legendre transforms.
//! * [`instrument`]: quantum instruments in Kraus form, word probabilities,
//!   outcome reversal and the standing-assumption checks.
//! * [`pmp`]: matrix-product measures and their hidden-Markov and
//!   function-Markov representations.
//! * [`entropy`]: entropy production, entropic pressure, rate functions,
//!   error exponents, weak-Gibbs diagnostics and entropy rates.
//! * [`catalog`]: every instrument family together with its closed forms.
//! * [`keepswitch`]: the analytic apparatus for the Keep–Switch family.
//! * [`rotational`]: the rotational instrument and continued fractions.

pub mod catalog;
pub mod entropy;
pub mod instrument;
pub mod keepswitch;
pub mod numerics;
pub mod pmp;
pub mod rotational;

pub use numerics::{CMatrix, CVector, ProbVector, C64};

/// Library version, recorded in every artifact header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
