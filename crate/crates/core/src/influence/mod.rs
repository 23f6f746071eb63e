//! Robust influence maximization under uncertain edge sets.
//!
//! Influence is deterministic reachability: `f_G(S)` is the fraction of nodes
//! reachable from `S` in `G`, seeds included. Uncertainty is modelled by `m`
//! independently edge-sampled copies of a base graph.

mod experiment;
mod graph;
mod objective;

pub use experiment::{
    baseline_individual, baseline_perturbed, baseline_uniform_greedy, binomial, bottleneck_influence,
    exhaustive_best_single, perturbed_weights, robust_influence, single_solution_metrics,
    SingleSolutionMetrics, EXHAUSTIVE_SET_LIMIT, PERTURB_ITERATIONS,
};
pub use graph::{sample_subgraph, DirectedGraph};
pub use objective::{influence_value, InfluenceInstance, InfluenceObjective, ReachState};
