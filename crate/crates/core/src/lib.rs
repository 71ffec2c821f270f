//! MATLANG: a small matrix query language with `inv` and `eigen`.
//!
//! The crate parses and typechecks programs, evaluates them over exact
//! Gaussian rationals or complex doubles, translates them into relational
//! algebra with summation, compiles the algebra of binary relations into
//! MATLANG, and emits existential real-arithmetic formulas in SMT-LIB form.

// Index loops read better in the numeric kernels; type errors carry the
// offending subexpression and are off the hot path.
#![allow(clippy::needless_range_loop, clippy::result_large_err)]

pub mod ast;
pub mod binrel;
pub mod builtins;
pub mod corpus;
pub mod eigen;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod par;
pub mod parse;
pub mod pretty;
pub mod reals;
pub mod relalg;
pub mod scalar;
pub mod typecheck;

pub use ast::{Expr, MatrixType, Schema, SizeTerm, TypeClass};
pub use eval::{eval, EvalConfig, EvalError};
pub use matrix::{Instance, Matrix};
pub use parse::{parse, parse_schema, ParseError};
pub use pretty::pretty_print;
pub use scalar::{GaussRat, Scalar, Tower};
pub use typecheck::{check_conformance, typecheck, SizeAssignment, TypeError, TypeErrorKind};
