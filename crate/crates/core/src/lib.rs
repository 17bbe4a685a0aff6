//! Numerical convex analysis on symmetric tensor grids.
//!
//! The crate implements three transforms, each with a fast path and a
//! brute-force oracle: the infimum convolution with quadratic cost (the
//! Moreau envelope `H`), the Legendre/polar transform, and the functional
//! Steiner symmetrization. Around them sit Gaussian expectation machinery
//! (Gauss-Hermite quadrature, weighted trapezoid sums), a Hermite spectral
//! toolbox, and a verification harness that turns a family of Gaussian
//! functional inequalities into pass/fail reports with measured margins.
//!
//! Every integral in a report is labelled with the path that produced it,
//! so the results can be audited end to end.

pub mod error;
pub mod fclass;
pub mod gauss;
pub mod grid;
pub mod hermite;
pub mod transforms;
pub mod verify;

mod special;

pub use error::{Error, Result};
