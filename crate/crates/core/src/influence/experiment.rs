//! Robust influence maximization and the comparison baselines.

use crate::error::{Error, Result};
use crate::influence::objective::InfluenceInstance;
use crate::rng::SplitMix64;
use crate::robust::{
    bottleneck_of_distribution, run_improper_robust, simplex_projection, MwuConfig, ObjectiveSense,
    RobustRunResult, WeightVector,
};
use crate::scalar::Scalar;
use crate::submodular::{greedy_oracle, GreedyOracle, ItemSet, ObjectiveFamily};

/// Largest number of `k`-subsets [`exhaustive_best_single`] will enumerate.
pub const EXHAUSTIVE_SET_LIMIT: u128 = 1_000_000;

/// Iteration cap of the rescale-and-reproject loop in [`perturbed_weights`].
pub const PERTURB_ITERATIONS: usize = 20;

/// Reward-sense multiplicative weights with the greedy oracle over the
/// instance's normalized influence functions.
///
/// The returned bottleneck is normalized; see [`InfluenceInstance::denormalize`].
pub fn robust_influence<F: Scalar>(
    instance: &InfluenceInstance,
    k: usize,
    rounds: usize,
    eta: F,
    seed: u64,
) -> Result<RobustRunResult<ItemSet, F>> {
    let family = ObjectiveFamily::new(&instance.objectives);
    let mut oracle = GreedyOracle::new(&instance.objectives, k);
    let config = MwuConfig::new(rounds, eta, ObjectiveSense::Reward, seed)?;
    run_improper_robust(&family, &mut oracle, &config)
}

/// Normalized bottleneck influence `min_i E_{S~P} f_i(S)` of the uniform
/// distribution over `sets`.
pub fn bottleneck_influence<F: Scalar>(instance: &InfluenceInstance, sets: &[ItemSet]) -> Result<F> {
    let family = ObjectiveFamily::new(&instance.objectives);
    bottleneck_of_distribution(sets, &family, ObjectiveSense::Reward)
}

/// One greedy set per subgraph; the baseline plays them uniformly.
pub fn baseline_individual<F: Scalar>(instance: &InfluenceInstance, k: usize) -> Result<Vec<ItemSet>> {
    (0..instance.m())
        .map(|i| {
            let w = WeightVector::<F>::point_mass(instance.m(), i)?;
            greedy_oracle(&instance.objectives, &w, k)
        })
        .collect()
}

/// Greedy against the uniform mixture of the subgraphs.
pub fn baseline_uniform_greedy<F: Scalar>(instance: &InfluenceInstance, k: usize) -> Result<ItemSet> {
    let w = WeightVector::<F>::uniform(instance.m())?;
    greedy_oracle(&instance.objectives, &w, k)
}

/// A random distribution at ℓ1 distance `distance` from uniform.
///
/// Draws a random sign for every coordinate, steps from the uniform vector
/// along that sign pattern, projects onto the simplex and rescales the step
/// until the projected point sits at the requested distance (at most
/// [`PERTURB_ITERATIONS`] rescalings). Distances beyond the reachable maximum
/// end at the farthest point found.
pub fn perturbed_weights<F: Scalar>(m: usize, distance: F, rng: &mut SplitMix64) -> Result<WeightVector<F>> {
    let uniform = WeightVector::<F>::uniform(m)?;
    if !distance.is_finite() || distance < F::zero() {
        return Err(Error::invalid(format!("perturbation distance {distance} must be finite and >= 0")));
    }
    let signs: Vec<F> = (0..m)
        .map(|_| if rng.bernoulli(0.5) { F::one() } else { -F::one() })
        .collect();
    if distance == F::zero() {
        return Ok(uniform);
    }
    let u = F::one() / F::of_usize(m);
    let tol = F::of(1e-12);
    let mut scale = distance / F::of_usize(m);
    let mut best = uniform.clone();
    for _ in 0..PERTURB_ITERATIONS {
        let raw: Vec<F> = signs.iter().map(|&s| u + scale * s).collect();
        let w = simplex_projection(&raw)?;
        let got = w.l1_distance(&uniform);
        best = w;
        if got == F::zero() || (got - distance).abs() <= tol {
            break;
        }
        scale *= distance / got;
    }
    Ok(best)
}

/// Greedy against `T` random distributions whose ℓ1 distances from uniform
/// track the reference run's weight history round by round.
pub fn baseline_perturbed<F: Scalar>(
    instance: &InfluenceInstance,
    k: usize,
    reference: &[WeightVector<F>],
    seed: u64,
) -> Result<Vec<ItemSet>> {
    if reference.is_empty() {
        return Err(Error::Empty("reference weight history"));
    }
    let mut rng = SplitMix64::new(seed);
    reference
        .iter()
        .map(|w_t| {
            let w = perturbed_weights(instance.m(), w_t.l1_from_uniform(), &mut rng)?;
            greedy_oracle(&instance.objectives, &w, k)
        })
        .collect()
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `k`-set maximizing `min_i f_i(S)`, by enumeration in lexicographic
/// order (first maximizer wins). Refuses more than [`EXHAUSTIVE_SET_LIMIT`] sets.
pub fn exhaustive_best_single<F: Scalar>(instance: &InfluenceInstance, k: usize) -> Result<(ItemSet, F)> {
    let n = instance.node_count();
    if k > n {
        return Err(Error::invalid(format!("budget k = {k} exceeds {n} nodes")));
    }
    let count = binomial(n, k);
    if count > EXHAUSTIVE_SET_LIMIT {
        return Err(Error::TooLarge {
            n: count.min(usize::MAX as u128) as usize,
            limit: EXHAUSTIVE_SET_LIMIT as usize,
        });
    }
    let mut marks = vec![0u32; n];
    let mut stamp = 0u32;
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, usize)> = None;
    loop {
        // Worst graph for this set; stop early once it cannot beat the incumbent.
        let mut worst = usize::MAX;
        for obj in &instance.objectives {
            stamp = stamp.wrapping_add(1);
            if stamp == 0 {
                marks.fill(0);
                stamp = 1;
            }
            worst = worst.min(obj.reached_count(&idx, &mut marks, stamp));
            if matches!(best, Some((_, b)) if worst <= b) {
                break;
            }
        }
        if !matches!(best, Some((_, b)) if worst <= b) {
            best = Some((idx.clone(), worst));
        }
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                let (set, reached) = best.expect("at least one set enumerated");
                let value = F::of_usize(reached) / F::of_usize(n);
                return Ok((ItemSet::new(set)?, value));
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Quality of the best single seed set among a run's iterates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleSolutionMetrics<F> {
    /// `max_{S in P} min_i f_i(S)`, normalized.
    pub best_single: F,
    /// `best_single` over the distribution's bottleneck.
    pub best_single_ratio: F,
    /// `best_single` over `max_S min_i f_i(S)`, when enumeration is feasible.
    pub exhaustive_ratio: Option<F>,
}

/// Compares the best recorded seed set with the run's distribution and, when
/// `C(|V|, k)` is at most [`EXHAUSTIVE_SET_LIMIT`], with the best single set
/// overall. A ratio of two zeros is reported as 1.
pub fn single_solution_metrics<F: Scalar>(
    run: &RobustRunResult<ItemSet, F>,
    instance: &InfluenceInstance,
) -> Result<SingleSolutionMetrics<F>> {
    let best_single = run
        .loss_table
        .iter()
        .map(|row| ObjectiveSense::Reward.worst(row).unwrap_or_else(F::zero))
        .fold(None, |acc: Option<F>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or(Error::Empty("run"))?;
    let ratio = |num: F, den: F| if den == F::zero() { F::one() } else { num / den };
    let k = run.solutions.iter().map(ItemSet::len).max().unwrap_or(0);
    let exhaustive_ratio = if binomial(instance.node_count(), k) <= EXHAUSTIVE_SET_LIMIT {
        let (_, opt) = exhaustive_best_single::<F>(instance, k)?;
        Some(ratio(best_single, opt))
    } else {
        None
    };
    Ok(SingleSolutionMetrics {
        best_single,
        best_single_ratio: ratio(best_single, run.bottleneck),
        exhaustive_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::influence::graph::DirectedGraph;
    use crate::robust::eta_default;

    /// Two stars on 6 nodes: in `G_0` node 0 reaches 1 and 2, in `G_1` node 3
    /// reaches 4 and 5.
    fn two_star() -> InfluenceInstance {
        let base = DirectedGraph::new(6, vec![(0, 1), (0, 2), (3, 4), (3, 5)]).unwrap();
        let g0 = DirectedGraph::new(6, vec![(0, 1), (0, 2)]).unwrap();
        let g1 = DirectedGraph::new(6, vec![(3, 4), (3, 5)]).unwrap();
        InfluenceInstance::from_graphs(base, vec![g0, g1], 1.0, 0).unwrap()
    }

    #[test]
    fn single_graph_run_repeats_greedy() {
        let base = DirectedGraph::new(5, vec![(0, 1), (1, 2), (3, 4)]).unwrap();
        let inst = InfluenceInstance::from_graphs(base.clone(), vec![base], 1.0, 0).unwrap();
        let run = robust_influence(&inst, 1, 5, 0.3f64, 1).unwrap();
        let greedy = baseline_uniform_greedy::<f64>(&inst, 1).unwrap();
        assert!(run.solutions.iter().all(|s| *s == greedy));
        assert_eq!(baseline_individual::<f64>(&inst, 1).unwrap(), vec![greedy]);
    }

    #[test]
    fn two_star_oscillates() {
        let inst = two_star();
        // Brute force over singletons: the best single set secures only 1/6 on
        // the graph it misses, while each star centre gives 3/6 on its own graph.
        let (_, opt) = exhaustive_best_single::<f64>(&inst, 1).unwrap();
        assert!((opt - 1.0 / 6.0).abs() < 1e-15);
        let run = robust_influence(&inst, 1, 200, eta_default::<f64>(2, 200), 3).unwrap();
        let centres: Vec<usize> = run.solutions.iter().map(|s| s.as_slice()[0]).collect();
        assert!(centres.iter().all(|&c| c == 0 || c == 3));
        assert!(centres.contains(&0) && centres.contains(&3));
        // Half of the single-graph optimum 3/6, plus the 1/6 a centre gives the other graph.
        assert!((run.bottleneck - 2.0 / 6.0).abs() < 0.02, "{}", run.bottleneck);
        let uniform = baseline_uniform_greedy::<f64>(&inst, 1).unwrap();
        assert_eq!(uniform.as_slice(), &[0]);
        let b: f64 = bottleneck_influence(&inst, &[uniform]).unwrap();
        assert!(b <= run.bottleneck);
    }

    #[test]
    fn zero_distance_perturbation_is_uniform_greedy() {
        let inst = two_star();
        let reference = vec![WeightVector::<f64>::uniform(2).unwrap(); 4];
        let sets = baseline_perturbed(&inst, 1, &reference, 9).unwrap();
        let uniform = baseline_uniform_greedy::<f64>(&inst, 1).unwrap();
        assert_eq!(sets, vec![uniform; 4]);
    }

    #[test]
    fn perturbation_hits_requested_distance() {
        let mut rng = SplitMix64::new(4);
        for &d in &[0.05f64, 0.3, 0.9] {
            let w = perturbed_weights(10, d, &mut rng).unwrap();
            assert!((w.l1_from_uniform() - d).abs() < 1e-9, "{d}");
        }
        let w = perturbed_weights(2, 0.4f64, &mut rng).unwrap();
        assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(100, 2), 4950);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert!(binomial(7115, 10) > EXHAUSTIVE_SET_LIMIT);
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        let base = DirectedGraph::complete(7).unwrap();
        let inst = InfluenceInstance::sample(base, 3, 0.25, 5).unwrap();
        let (set, value) = exhaustive_best_single::<f64>(&inst, 2).unwrap();
        let mut best = -1.0f64;
        let mut arg = ItemSet::empty();
        for a in 0..7 {
            for b in a + 1..7 {
                let s = ItemSet::new(vec![a, b]).unwrap();
                let v = inst
                    .graphs
                    .iter()
                    .map(|g| crate::influence::influence_value::<f64>(g, &s).unwrap())
                    .fold(f64::INFINITY, f64::min);
                if v > best {
                    best = v;
                    arg = s;
                }
            }
        }
        assert_eq!(set, arg);
        assert!((value - best).abs() < 1e-15);
    }

    #[test]
    fn metrics_trivial_cases() {
        let inst = two_star();
        let run = robust_influence(&inst, 1, 1, 0.5f64, 0).unwrap();
        let m = single_solution_metrics(&run, &inst).unwrap();
        assert_eq!(m.best_single_ratio, 1.0);
        assert!(m.exhaustive_ratio.is_some());
    }
}
