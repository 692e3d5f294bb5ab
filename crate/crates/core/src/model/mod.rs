//! Grids, vector- and matrix-valued functions, split forms, and barycentric
//! rational models.

mod barycentric;
mod function;
mod grid;

pub use barycentric::{barycentric_quotient, relerr_from_samples, sigma_uniform_relerr, BarycentricModel, ErrorNorm};
pub use function::{
    devectorize, eval_split, nonzeros, vectorize, Coefficient, Evaluator, ScalarFn, Sparsity, SplitForm, SplitTerm,
    VectorFunction,
};
pub use grid::{DomainSpec, TargetGrid};
