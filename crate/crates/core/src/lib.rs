//! Numerical verification of operator-mean inequalities over real symmetric
//! positive definite matrices.
//!
//! The crate is layered bottom-up:
//!
//! - [`spectral`]: symmetric matrices, Jacobi eigendecomposition, functional
//!   calculus, Loewner order.
//! - [`means`]: weighted arithmetic, harmonic and geometric means, Specht and
//!   Kantorovich constants.
//! - [`majorization`]: prefix-sum comparators, eigenvalue products, Olson order.
//! - [`catalog`]: named scalar functions, transforms and sampled class checks.
//! - [`generate`]: seeded instance generators.
//! - [`suite`]: one check per inequality, suite runner and replay.

pub mod catalog;
pub mod error;
pub mod exec;
pub mod expr;
pub mod generate;
pub mod majorization;
pub mod means;
pub mod spectral;
pub mod suite;

pub use catalog::{builtin_catalog, FunctionClass, FunctionSpec, Interval, SampleVerdict};
pub use error::{Error, Result};
pub use exec::Execution;
pub use expr::Expr;
pub use means::{ConstantBundle, ConstantsVariant, Weight};
pub use spectral::{HermMatrix, Spectrum, Tolerance};
