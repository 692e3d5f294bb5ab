//! Built-in test problems, problem files and sampling grids.

mod builtin;
mod expr;
mod file;
mod sampling;

pub use builtin::{
    artificial, builtin, delay, lowrank_residual, rational_model, rational_toy, split_large, Problem, BUILTINS,
};
pub use expr::{BinOp, Expr, Func};
pub use file::{MatrixSpec, ProblemFile, Scalar, TermSpec};
pub use sampling::{make_grid, GridSpec};
