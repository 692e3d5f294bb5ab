//! Rational approximation of large vector- and matrix-valued functions.
//!
//! The central routine samples a function `f: C -> C^N` on a finite target
//! set, compresses the samples with a random probing matrix, runs the
//! set-valued AAA algorithm on the few sketched components, and lifts the
//! resulting support points and weights back to a barycentric approximant of
//! the full function. Around it sit bound calculators for the sketching error,
//! a Monte Carlo harness that checks them, and a strong linearization of the
//! barycentric approximant for nonlinear eigenvalue problems.

pub mod aaa;
pub mod analysis;
pub mod driver;
pub mod error;
pub mod kernel;
pub mod linearize;
pub mod model;
pub mod problems;
pub mod sketch;

pub use error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;
