//! Weighted coverage functions, their concave relaxation and the fractional
//! robust pipeline built on it.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::robust::{
    average_solution, eta_default, run_improper_robust, BayesianOracle, LossMatrixView, MwuConfig,
    ObjectiveSense, RobustRunResult, RoundContext, WeightVector,
};
use crate::scalar::{ordered_sum, Scalar};
use crate::submodular::objective::SubmodularObjective;
use crate::submodular::set::ItemSet;

/// `f(S) = Σ_{e covered by S} w_e / Σ_e w_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageObjective<F> {
    element_weights: Vec<F>,
    /// Elements covered by each item.
    covers: Vec<Vec<usize>>,
    total: F,
}

impl<F: Scalar> CoverageObjective<F> {
    pub fn new(element_weights: Vec<F>, covers: Vec<Vec<usize>>) -> Result<Self> {
        if element_weights.iter().any(|w| !w.is_finite() || *w < F::zero()) {
            return Err(Error::invalid("element weights must be finite and nonnegative"));
        }
        let e = element_weights.len();
        let mut covers = covers;
        for c in &mut covers {
            c.sort_unstable();
            c.dedup();
            if let Some(&bad) = c.iter().find(|&&el| el >= e) {
                return Err(Error::invalid(format!("element {bad} out of range for {e} elements")));
            }
        }
        let total = ordered_sum(element_weights.iter().copied());
        Ok(Self {
            element_weights,
            covers,
            total,
        })
    }

    pub fn num_items(&self) -> usize {
        self.covers.len()
    }

    pub fn num_elements(&self) -> usize {
        self.element_weights.len()
    }

    pub fn covers(&self, item: usize) -> &[usize] {
        &self.covers[item]
    }

    fn normalize(&self, v: F) -> F {
        if self.total > F::zero() {
            v / self.total
        } else {
            F::zero()
        }
    }

    /// Per-element fractional load `Σ_{j: e ∈ C_j} x_j`.
    fn loads(&self, x: &[F]) -> Vec<F> {
        let mut load = vec![F::zero(); self.num_elements()];
        for (j, &xj) in x.iter().enumerate() {
            for &e in &self.covers[j] {
                load[e] += xj;
            }
        }
        load
    }

    /// Normalized concave relaxation `Σ_e w_e min{1, load_e} / Σ_e w_e`.
    pub fn relaxation(&self, x: &[F]) -> F {
        let load = self.loads(x);
        self.normalize(ordered_sum(
            self.element_weights
                .iter()
                .zip(&load)
                .map(|(&w, &l)| w * l.min(F::one())),
        ))
    }

    /// A supergradient of [`Self::relaxation`]: element `e` contributes
    /// `w_e / Σw` to each covering item while `load_e < 1`, nothing at or above the kink.
    pub fn relaxation_supergradient(&self, x: &[F]) -> Vec<F> {
        let load = self.loads(x);
        self.covers
            .iter()
            .map(|c| {
                self.normalize(ordered_sum(
                    c.iter()
                        .filter(|&&e| load[e] < F::one())
                        .map(|&e| self.element_weights[e]),
                ))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageState<F> {
    covered: Vec<bool>,
    _marker: std::marker::PhantomData<F>,
}

impl<F: Scalar> SubmodularObjective<F> for CoverageObjective<F> {
    type State = CoverageState<F>;

    fn ground_size(&self) -> usize {
        self.num_items()
    }

    fn value(&self, set: &ItemSet) -> F {
        let mut covered = vec![false; self.num_elements()];
        for j in set.iter() {
            for &e in &self.covers[j] {
                covered[e] = true;
            }
        }
        self.normalize(ordered_sum(
            self.element_weights
                .iter()
                .zip(&covered)
                .filter(|(_, &c)| c)
                .map(|(&w, _)| w),
        ))
    }

    fn empty_state(&self) -> Self::State {
        CoverageState {
            covered: vec![false; self.num_elements()],
            _marker: std::marker::PhantomData,
        }
    }

    fn gain(&self, state: &Self::State, item: usize) -> F {
        self.normalize(ordered_sum(
            self.covers[item]
                .iter()
                .filter(|&&e| !state.covered[e])
                .map(|&e| self.element_weights[e]),
        ))
    }

    fn insert(&self, state: &mut Self::State, item: usize) {
        for &e in &self.covers[item] {
            state.covered[e] = true;
        }
    }
}

/// Tolerance on the budget constraint of a fractional solution.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// A point of `{x ∈ [0,1]^n : Σ x_j <= k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution<F> {
    x: Vec<F>,
    budget: usize,
}

impl<F: Scalar> FractionalSolution<F> {
    pub fn new(x: Vec<F>, budget: usize) -> Result<Self> {
        if x.iter().any(|v| !(*v >= F::zero() && *v <= F::one())) {
            return Err(Error::invalid("fractional coordinates must lie in [0, 1]"));
        }
        let total = ordered_sum(x.iter().copied());
        if total.to_f64_lossy() > budget as f64 + BUDGET_TOLERANCE {
            return Err(Error::invalid(format!("coordinates sum to {total} > budget {budget}")));
        }
        Ok(Self { x, budget })
    }

    pub fn as_slice(&self) -> &[F] {
        &self.x
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Evaluates the normalized concave relaxation of `cov` at `x`.
pub fn concave_relaxation_value<F: Scalar>(
    cov: &CoverageObjective<F>,
    x: &FractionalSolution<F>,
) -> Result<F> {
    if x.dim() != cov.num_items() {
        return Err(Error::DimensionMismatch {
            expected: cov.num_items(),
            found: x.dim(),
        });
    }
    Ok(cov.relaxation(x.as_slice()))
}

/// Euclidean projection onto `{0 <= x <= 1, Σx <= k}`.
///
/// Clips to the box; if the budget is violated, bisects on the multiplier `λ`
/// of `Σ clip(v - λ, 0, 1) = k` until the budget residual is below `1e-10`.
pub fn project_capped_simplex<F: Scalar>(v: &[F], k: usize) -> Vec<F> {
    let clip = |lambda: F| -> Vec<F> {
        v.iter()
            .map(|&x| (x - lambda).max(F::zero()).min(F::one()))
            .collect()
    };
    let budget = F::of_usize(k);
    let boxed = clip(F::zero());
    if ordered_sum(boxed.iter().copied()) <= budget {
        return boxed;
    }
    let mut lo = F::zero();
    let mut hi = v.iter().copied().fold(F::zero(), F::max);
    let tol = F::of(1e-10);
    for _ in 0..200 {
        let mid = (lo + hi) / F::of(2.0);
        let s = ordered_sum(clip(mid));
        if (s - budget).abs() <= tol {
            hi = mid;
            break;
        }
        if s > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The upper end of the bracket is always budget-feasible.
    clip(hi)
}

/// Maximizes `Σ_i w[i] F_i(x)` over `{x ∈ [0,1]^n : Σx <= k}` by projected
/// supergradient ascent with constant step `diameter / √steps`, returning the
/// best iterate seen.
pub fn fractional_bayesian_oracle<F: Scalar>(
    covs: &[CoverageObjective<F>],
    weights: &WeightVector<F>,
    k: usize,
    steps: usize,
) -> Result<FractionalSolution<F>> {
    let n = covs.first().ok_or(Error::Empty("coverage objective list"))?.num_items();
    if covs.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: covs.len(),
            found: weights.len(),
        });
    }
    if let Some(c) = covs.iter().find(|c| c.num_items() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.num_items(),
        });
    }
    if steps == 0 {
        return Err(Error::invalid("supergradient ascent needs at least one step"));
    }
    let k_eff = k.min(n);
    let objective = |x: &[F]| -> F {
        ordered_sum(
            covs.iter()
                .zip(weights.as_slice())
                .filter(|(_, &w)| w > F::zero())
                .map(|(c, &w)| w * c.relaxation(x)),
        )
    };
    // The feasible set sits inside the box and within l1 radius k of the origin.
    let diameter = F::of_usize((2 * k_eff).min(n).max(1)).sqrt();
    let step = diameter / F::of_usize(steps).sqrt();

    let start = if n == 0 {
        Vec::new()
    } else {
        vec![(F::of_usize(k_eff) / F::of_usize(n)).min(F::one()); n]
    };
    let mut x = project_capped_simplex(&start, k_eff);
    let mut best_val = objective(&x);
    let mut best = x.clone();
    for _ in 0..steps {
        let mut grad = vec![F::zero(); n];
        for (c, &w) in covs.iter().zip(weights.as_slice()) {
            if w > F::zero() {
                for (g, s) in grad.iter_mut().zip(c.relaxation_supergradient(&x)) {
                    *g += w * s;
                }
            }
        }
        let moved: Vec<F> = x.iter().zip(&grad).map(|(&xi, &g)| xi + step * g).collect();
        x = project_capped_simplex(&moved, k_eff);
        let val = objective(&x);
        if val > best_val {
            best_val = val;
            best = x.clone();
        }
    }
    FractionalSolution::new(best, k)
}

/// Relaxation values `F_i(x)` as a reward family over fractional points.
pub struct RelaxationFamily<'a, F> {
    pub covs: &'a [CoverageObjective<F>],
}

impl<F: Scalar> LossMatrixView<Vec<F>, F> for RelaxationFamily<'_, F> {
    fn num_objectives(&self) -> usize {
        self.covs.len()
    }

    fn evaluate(&self, objective: usize, x: &Vec<F>) -> F {
        self.covs[objective].relaxation(x)
    }
}

struct FractionalOracle<'a, F> {
    covs: &'a [CoverageObjective<F>],
    k: usize,
    steps: usize,
}

impl<F: Scalar> BayesianOracle<Vec<F>, F> for FractionalOracle<'_, F> {
    fn solve(&mut self, weights: &WeightVector<F>, _ctx: &RoundContext) -> Result<Vec<F>> {
        Ok(fractional_bayesian_oracle(self.covs, weights, self.k, self.steps)?
            .as_slice()
            .to_vec())
    }

    fn alpha(&self) -> F {
        F::one()
    }
}

#[derive(Debug, Clone)]
pub struct RobustFractional<F> {
    /// Average of the per-round fractional responses.
    pub solution: FractionalSolution<F>,
    pub run: RobustRunResult<Vec<F>, F>,
}

impl<F: Scalar> RobustFractional<F> {
    /// `min_i F_i(x*)` at the averaged point.
    pub fn worst_case_value(&self, covs: &[CoverageObjective<F>]) -> F {
        covs.iter()
            .map(|c| c.relaxation(self.solution.as_slice()))
            .fold(F::infinity(), F::min)
    }
}

/// Robust fractional coverage: reward-sense multiplicative weights with the
/// fractional oracle, then the average of the iterates (feasible by convexity,
/// and no worse than the distribution by concavity).
pub fn robust_coverage_fractional<F: Scalar>(
    covs: &[CoverageObjective<F>],
    k: usize,
    rounds: usize,
    steps: usize,
    seed: u64,
) -> Result<RobustFractional<F>> {
    let family = RelaxationFamily { covs };
    let mut oracle = FractionalOracle { covs, k, steps };
    let config = MwuConfig::new(
        rounds,
        eta_default(covs.len(), rounds),
        ObjectiveSense::Reward,
        seed,
    )?;
    let run = run_improper_robust(&family, &mut oracle, &config)?;
    let mean = average_solution(&run.solutions)?;
    // Averaging can push the sum a few ulps over the budget.
    let mean = project_capped_simplex(&mean, k.min(mean.len()));
    Ok(RobustFractional {
        solution: FractionalSolution::new(mean, k)?,
        run,
    })
}

/// Includes each item `j` independently with probability `x_j`.
pub fn independent_rounding<F: Scalar>(x: &FractionalSolution<F>, seed: u64) -> ItemSet {
    let mut rng = SplitMix64::new(seed);
    let items = x
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &p)| rng.unit_f64() < p.to_f64_lossy())
        .map(|(j, _)| j)
        .collect();
    ItemSet::new(items).expect("indices are distinct")
}
