//! Robust (minimax) optimization over families of non-convex objectives.
//!
//! The [`robust`] module reduces worst-case optimization to repeated calls of
//! an approximate Bayesian oracle. [`submodular`], [`influence`] and
//! [`learning`] instantiate it for cardinality-constrained submodular
//! maximization, robust influence maximization and corruption-robust
//! classification.
//!
//! Algorithms are generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the common choices.

pub mod error;
pub mod influence;
pub mod learning;
pub mod rng;
pub mod robust;
pub mod scalar;
pub mod stats;
pub mod submodular;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type WeightVector64 = robust::WeightVector<f64>;
pub type WeightVector32 = robust::WeightVector<f32>;
pub type RobustRun64<X> = robust::RobustRunResult<X, f64>;
pub type CoverageObjective64 = submodular::CoverageObjective<f64>;
pub type FractionalSolution64 = submodular::FractionalSolution<f64>;
pub type MlpParams32 = learning::MlpParams<f32>;
pub type MlpParams64 = learning::MlpParams<f64>;
