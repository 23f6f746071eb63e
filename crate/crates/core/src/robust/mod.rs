//! Minimax optimization over a finite (or parameterized) family of
//! objectives by reduction to an approximate Bayesian oracle.

mod infinite;
mod oracle;
mod reduction;
mod weights;

pub use infinite::{
    eta_infinite_default, run_infinite_robust, ConvexParamSet, EuclideanBall, InfiniteRunResult,
    ParamLoss, ProbabilitySimplex, SimplexMixture,
};
pub use oracle::{
    pure_minimax, BayesianOracle, ExactFiniteOracle, FnOracle, LossMatrixView, RoundContext,
    TableLosses,
};
pub use reduction::{
    average_solution, bottleneck_from_table, bottleneck_of_distribution, regret_bound,
    reward_regret_bound, run_improper_robust, MwuConfig, RegretBound, RobustRunResult, RANGE_SLACK,
};
pub use weights::{
    eta_default, eta_gamma, mwu_weights, simplex_projection, ObjectiveSense, WeightVector,
    WEIGHT_SUM_TOLERANCE,
};
