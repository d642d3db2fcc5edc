//! Expressions, exact and high-precision scalars, and linear algebra.

pub mod expr;
pub mod jet;
pub mod matrix;
pub mod multi_index;
pub mod parse;
pub mod poly;
pub mod ratfunc;
pub mod real;
pub mod sample;
pub mod scalar;

pub use expr::{Expr, Func};
pub use jet::Jet;
pub use matrix::Matrix;
pub use multi_index::{multi_indices, subsets, MultiIndex};
pub use parse::parse;
pub use poly::Poly;
pub use ratfunc::RatFunc;
pub use real::Real;
pub use scalar::{Differentiable, EvalDomain, Field, Numeric, Scalar};
