//! Numerical building blocks shared by the rest of the crate.

mod gamma;
mod qz;
mod rng;
mod svd;

pub use gamma::{ln_gamma, regularized_lower_gamma};
pub use qz::{generalized_eigen_ratios, generalized_eigenvalues, EigenRatio, INFINITE_BETA_TOL};
pub use rng::{derive_seed, SeededStream};
pub use svd::{singular_values, smallest_right_singular_vector, spectral_norm, RowReducer};
