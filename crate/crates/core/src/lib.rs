//! Nonnegative matrix and tensor factorization toolkit.
//!
//! Approximates a nonnegative matrix `A` by a low-rank product `U V^T` with
//! elementwise-nonnegative factors, minimizing the Frobenius error. The crate
//! collects the classical descent methods behind one solver interface
//! (multiplicative rules, projected gradient with Armijo or first-order step
//! control, alternating NNLS) together with rank-one residue iteration (RRI,
//! also known as HALS), its damped and constrained generalizations, column
//! regularization, and the extension to Kruskal tensors.
//!
//! SVD-based baselines (truncated SVD, its nonnegative part, the rank-one
//! global optimum) provide independent oracles for the nonnegative problem.

// Indexed loops over rows/columns/modes are the house style here.
#![allow(clippy::needless_range_loop)]

pub mod constraint;
pub mod error;
pub mod matrix;
pub mod model;
pub mod nnls;
pub mod regularized;
pub mod rng;
pub mod solvers;
pub mod svd;
pub mod tensor;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, DenseVector};
pub use model::{FactorPair, KktResidual, StopRule};
pub use solvers::{Algorithm, SolverConfig, SolverReport, StopReason};
