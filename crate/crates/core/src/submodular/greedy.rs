use crate::error::{Error, Result};
use crate::robust::{BayesianOracle, RoundContext, WeightVector};
use crate::scalar::Scalar;
use crate::submodular::objective::SubmodularObjective;
use crate::submodular::set::ItemSet;

/// Greedy maximization of `Σ_i w[i] f_i` under the cardinality constraint `|S| <= k`.
///
/// Each of the `k` rounds adds the item with the largest weighted marginal
/// gain, ties broken toward the lowest index. Objectives with zero weight are
/// skipped, which leaves every sum unchanged.
pub fn greedy_oracle<F, O>(objectives: &[O], weights: &WeightVector<F>, k: usize) -> Result<ItemSet>
where
    F: Scalar,
    O: SubmodularObjective<F>,
{
    let first = objectives.first().ok_or(Error::Empty("objective list"))?;
    if objectives.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: objectives.len(),
            found: weights.len(),
        });
    }
    let n = first.ground_size();
    if let Some(o) = objectives.iter().find(|o| o.ground_size() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: o.ground_size(),
        });
    }
    if k > n {
        return Err(Error::invalid(format!("budget k = {k} exceeds ground set size {n}")));
    }

    let active: Vec<(usize, F)> = weights
        .as_slice()
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, w)| w > F::zero())
        .collect();
    let mut states: Vec<O::State> = objectives.iter().map(|o| o.empty_state()).collect();
    let mut chosen = vec![false; n];
    let mut set = ItemSet::empty();

    for _ in 0..k {
        let mut best: Option<(usize, F)> = None;
        for item in (0..n).filter(|&j| !chosen[j]) {
            let mut gain = F::zero();
            for &(i, w) in &active {
                gain += w * objectives[i].gain(&states[i], item);
            }
            match best {
                Some((_, g)) if gain <= g => {}
                _ => best = Some((item, gain)),
            }
        }
        let (item, _) = best.expect("k <= n leaves a candidate");
        chosen[item] = true;
        set.insert(item);
        for (o, s) in objectives.iter().zip(states.iter_mut()) {
            o.insert(s, item);
        }
    }
    Ok(set)
}

/// [`greedy_oracle`] as a reward-sense Bayesian oracle (`α = 1 - 1/e`).
pub struct GreedyOracle<'a, O> {
    objectives: &'a [O],
    k: usize,
}

impl<'a, O> GreedyOracle<'a, O> {
    pub fn new(objectives: &'a [O], k: usize) -> Self {
        Self { objectives, k }
    }
}

impl<F, O> BayesianOracle<ItemSet, F> for GreedyOracle<'_, O>
where
    F: Scalar,
    O: SubmodularObjective<F>,
{
    fn solve(&mut self, weights: &WeightVector<F>, _ctx: &RoundContext) -> Result<ItemSet> {
        greedy_oracle(self.objectives, weights, self.k)
    }

    fn alpha(&self) -> F {
        F::one() - (-F::one()).exp()
    }
}
