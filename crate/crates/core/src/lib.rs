//! Floquet micro-motion as a synthetic momentum.
//!
//! A driven two-band lattice model `H(k1, k2, t)` is turned into the static
//! three-dimensional family `H_F(k1, k2, alpha)`, where `alpha` is the initial
//! phase of the drive. The crate computes the Hopf invariant of that family,
//! the linking number of its pole preimages, and the open-boundary quasienergy
//! spectra whose edge states the invariant predicts.

pub mod bloch;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod runner;
pub mod strip;
pub mod topology;

pub use error::{Error, Result};
