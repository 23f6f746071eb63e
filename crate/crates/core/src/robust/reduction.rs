//! The oracle-efficient improper robust optimization loop.
//!
//! An adversary runs multiplicative weights over the `m` objectives while the
//! learner best-responds through a Bayesian oracle. The uniform distribution
//! over the learner's iterates is approximately minimax optimal.

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::robust::oracle::{BayesianOracle, LossMatrixView, RoundContext};
use crate::robust::weights::{mwu_weights, ObjectiveSense, WeightVector};
use crate::scalar::{ordered_mean, Scalar};

/// Slack on the `[0, 1]` range check of realized objective values.
pub const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuConfig<F> {
    pub rounds: usize,
    pub eta: F,
    pub sense: ObjectiveSense,
    pub seed: u64,
}

impl<F: Scalar> MwuConfig<F> {
    pub fn new(rounds: usize, eta: F, sense: ObjectiveSense, seed: u64) -> Result<Self> {
        let cfg = Self {
            rounds,
            eta,
            sense,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::invalid("round count must be at least 1"));
        }
        // eta = 0 is admitted: it pins the adversary to the uniform distribution.
        if !self.eta.is_finite() || self.eta < F::zero() {
            return Err(Error::invalid(format!("step size {} must be finite and >= 0", self.eta)));
        }
        Ok(())
    }

    /// Seed handed to the oracle in `round`.
    pub fn round_seed(&self, round: usize) -> u64 {
        derive_seed(self.seed, round as u64, 0)
    }
}

/// Everything recorded by [`run_improper_robust`].
#[derive(Debug, Clone, PartialEq)]
pub struct RobustRunResult<X, F> {
    pub solutions: Vec<X>,
    pub weight_history: Vec<WeightVector<F>>,
    /// `loss_table[t][i] = L_i(x_t)`.
    pub loss_table: Vec<Vec<F>>,
    pub bottleneck: F,
    pub sense: ObjectiveSense,
}

impl<X, F: Scalar> RobustRunResult<X, F> {
    pub fn rounds(&self) -> usize {
        self.solutions.len()
    }

    /// `(1/T) Σ_t L_i(x_t)` for every objective.
    pub fn objective_means(&self) -> Vec<F> {
        column_means(&self.loss_table)
    }

    /// Bottleneck of the prefix distribution over `x_1..x_t`, for each `t`.
    pub fn bottleneck_prefixes(&self) -> Vec<F> {
        let m = self.loss_table.first().map_or(0, Vec::len);
        let mut sums = vec![F::zero(); m];
        let mut out = Vec::with_capacity(self.loss_table.len());
        for (t, row) in self.loss_table.iter().enumerate() {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v;
            }
            let n = F::of_usize(t + 1);
            let means: Vec<F> = sums.iter().map(|&s| s / n).collect();
            out.push(self.sense.worst(&means).unwrap_or_else(F::zero));
        }
        out
    }

    /// `‖w_{t+1} - w_t‖₁` for consecutive rounds.
    pub fn weight_drift(&self) -> Vec<F> {
        self.weight_history
            .windows(2)
            .map(|p| p[1].l1_distance(&p[0]))
            .collect()
    }
}

fn column_means<F: Scalar>(table: &[Vec<F>]) -> Vec<F> {
    let m = table.first().map_or(0, Vec::len);
    (0..m)
        .map(|i| ordered_mean(table.iter().map(|row| row[i])).unwrap_or_else(F::zero))
        .collect()
}

/// Worst objective mean of a loss table: max for losses, min for rewards.
pub fn bottleneck_from_table<F: Scalar>(table: &[Vec<F>], sense: ObjectiveSense) -> Result<F> {
    if table.is_empty() {
        return Err(Error::Empty("solution list"));
    }
    sense
        .worst(&column_means(table))
        .ok_or(Error::Empty("objective family"))
}

/// Worst-case expected objective of the uniform distribution over `solutions`.
pub fn bottleneck_of_distribution<X, F, L>(
    solutions: &[X],
    losses: &L,
    sense: ObjectiveSense,
) -> Result<F>
where
    F: Scalar,
    L: LossMatrixView<X, F> + ?Sized,
{
    if solutions.is_empty() {
        return Err(Error::Empty("solution list"));
    }
    let m = losses.num_objectives();
    let table: Vec<Vec<F>> = solutions
        .iter()
        .map(|x| {
            let mut row = vec![F::zero(); m];
            losses.evaluate_all(x, &mut row);
            row
        })
        .collect();
    bottleneck_from_table(&table, sense)
}

/// Component-wise mean of equal-length solution vectors.
pub fn average_solution<F: Scalar>(solutions: &[Vec<F>]) -> Result<Vec<F>> {
    let first = solutions.first().ok_or(Error::Empty("solution list"))?;
    let d = first.len();
    if let Some(bad) = solutions.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    Ok(column_means(solutions))
}

/// Guarantee of the reduction in the form `multiplier · τ + additive`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretBound<F> {
    pub multiplier: F,
    pub additive: F,
}

impl<F: Scalar> RegretBound<F> {
    pub fn at(&self, tau: F) -> F {
        self.multiplier * tau + self.additive
    }
}

/// Loss-sense guarantee of the reduction.
///
/// Without `eta` (the default step size) it is `α·τ + √(2 ln m / T)`; with an
/// explicit `eta` it is `α(1+η)·τ + ln m / (η T)`.
pub fn regret_bound<F: Scalar>(m: usize, rounds: usize, alpha: F, eta: Option<F>) -> RegretBound<F> {
    let ln_m = F::of_usize(m.max(1)).ln();
    let t = F::of_usize(rounds.max(1));
    match eta {
        None => RegretBound {
            multiplier: alpha,
            additive: (F::of(2.0) * ln_m / t).sqrt(),
        },
        Some(eta) => RegretBound {
            multiplier: alpha * (F::one() + eta),
            additive: ln_m / (eta * t),
        },
    }
}

/// Reward-sense counterpart: the bottleneck is at least `multiplier·τ - additive`,
/// with multiplier `α` (default step) or `α(1-η)`.
pub fn reward_regret_bound<F: Scalar>(
    m: usize,
    rounds: usize,
    alpha: F,
    eta: Option<F>,
) -> RegretBound<F> {
    let mut b = regret_bound(m, rounds, alpha, eta);
    if let Some(eta) = eta {
        b.multiplier = alpha * (F::one() - eta);
    }
    b
}

/// Runs `config.rounds` rounds of multiplicative weights against `oracle`.
///
/// Round `t` plays `w_t = mwu_weights(Σ_{τ<t} L(x_τ))`, asks the oracle for
/// `x_t`, and records `L_i(x_t)` for every objective.
pub fn run_improper_robust<X, F, L, O>(
    losses: &L,
    oracle: &mut O,
    config: &MwuConfig<F>,
) -> Result<RobustRunResult<X, F>>
where
    F: Scalar,
    L: LossMatrixView<X, F> + ?Sized,
    O: BayesianOracle<X, F> + ?Sized,
{
    config.validate()?;
    let m = losses.num_objectives();
    if m == 0 {
        return Err(Error::Empty("objective family"));
    }
    let lo = F::of(-RANGE_SLACK);
    let hi = F::of(1.0 + RANGE_SLACK);

    let mut cumulative = vec![F::zero(); m];
    let mut solutions = Vec::with_capacity(config.rounds);
    let mut weight_history = Vec::with_capacity(config.rounds);
    let mut loss_table = Vec::with_capacity(config.rounds);

    for round in 0..config.rounds {
        let weights = mwu_weights(&cumulative, config.eta, config.sense)?;
        let ctx = RoundContext {
            round,
            seed: config.round_seed(round),
        };
        let x = oracle
            .solve(&weights, &ctx)
            .map_err(|e| Error::OracleFailed {
                round,
                source: Box::new(e),
            })?;
        let mut row = vec![F::zero(); m];
        losses.evaluate_all(&x, &mut row);
        for (objective, &v) in row.iter().enumerate() {
            if !(v >= lo && v <= hi) {
                return Err(Error::LossOutOfRange {
                    round,
                    objective,
                    value: v.to_f64_lossy(),
                });
            }
        }
        for (c, &v) in cumulative.iter_mut().zip(&row) {
            *c += v;
        }
        solutions.push(x);
        weight_history.push(weights);
        loss_table.push(row);
    }

    let bottleneck = bottleneck_from_table(&loss_table, config.sense)?;
    Ok(RobustRunResult {
        solutions,
        weight_history,
        loss_table,
        bottleneck,
        sense: config.sense,
    })
}
