//! Monotone submodular maximization under a cardinality constraint.

mod coverage;
mod greedy;
mod objective;
mod set;

pub use coverage::{
    concave_relaxation_value, fractional_bayesian_oracle, independent_rounding,
    project_capped_simplex, robust_coverage_fractional, CoverageObjective, CoverageState,
    FractionalSolution, RelaxationFamily, RobustFractional, BUDGET_TOLERANCE,
};
pub use greedy::{greedy_oracle, GreedyOracle};
pub use objective::{
    check_monotone_submodular, ObjectiveFamily, SetFunction, SubmodularObjective, Verdict,
    EXHAUSTIVE_LIMIT,
};
pub use set::{union_bicriterion, GroundSet, ItemSet};
