//! Robust optimization against a continuum of losses `L(·, w)`, `w ∈ W`, with
//! the adversary running lazily projected gradient ascent over `W`.

use crate::error::{Error, Result};
use crate::robust::oracle::{ExactFiniteOracle, LossMatrixView, RoundContext};
use crate::robust::reduction::MwuConfig;
use crate::robust::weights::{simplex_projection, ObjectiveSense, WeightVector};
use crate::scalar::{ordered_sum, Scalar};

/// A closed convex parameter set with Euclidean projection.
pub trait ConvexParamSet<F> {
    fn dim(&self) -> usize;

    /// Nearest point of the set in Euclidean norm.
    fn project(&self, v: &[F]) -> Result<Vec<F>>;

    /// `max_{w ∈ W} ‖w‖₂`.
    fn radius(&self) -> F;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbabilitySimplex {
    pub dim: usize,
}

impl<F: Scalar> ConvexParamSet<F> for ProbabilitySimplex {
    fn dim(&self) -> usize {
        self.dim
    }

    fn project(&self, v: &[F]) -> Result<Vec<F>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(simplex_projection(v)?.into_inner())
    }

    fn radius(&self) -> F {
        F::one()
    }
}

/// Centered Euclidean ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanBall<F> {
    pub dim: usize,
    pub radius: F,
}

impl<F: Scalar> ConvexParamSet<F> for EuclideanBall<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn project(&self, v: &[F]) -> Result<Vec<F>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        let norm = ordered_sum(v.iter().map(|&x| x * x)).sqrt();
        if norm <= self.radius {
            Ok(v.to_vec())
        } else {
            let scale = self.radius / norm;
            Ok(v.iter().map(|&x| x * scale).collect())
        }
    }

    fn radius(&self) -> F {
        self.radius
    }
}

/// A loss `L(x, w)` concave in the adversary parameter `w`, together with the
/// learner's Bayesian oracle for a fixed `w`.
pub trait ParamLoss<X, F> {
    fn value(&self, x: &X, w: &[F]) -> F;

    /// `∇_w L(x, w)`.
    fn grad_w(&self, x: &X, w: &[F]) -> Vec<F>;

    fn solve(&mut self, w: &[F], ctx: &RoundContext) -> Result<X>;
}

/// The finite family embedded in the simplex: `L(x, w) = Σ_i w[i] L_i(x)`.
pub struct SimplexMixture<X, L> {
    oracle: ExactFiniteOracle<X, L>,
    losses: L,
}

impl<X: Clone, L: Clone> SimplexMixture<X, L> {
    pub fn new(space: Vec<X>, losses: L) -> Result<Self> {
        Ok(Self {
            oracle: ExactFiniteOracle::new(space, losses.clone(), ObjectiveSense::Loss)?,
            losses,
        })
    }
}

impl<X, F, L> ParamLoss<X, F> for SimplexMixture<X, L>
where
    X: Clone,
    F: Scalar,
    L: LossMatrixView<X, F>,
{
    fn value(&self, x: &X, w: &[F]) -> F {
        let grad = self.grad_w(x, w);
        ordered_sum(grad.iter().zip(w).map(|(&g, &wi)| g * wi))
    }

    fn grad_w(&self, x: &X, _w: &[F]) -> Vec<F> {
        let mut row = vec![F::zero(); self.losses.num_objectives()];
        self.losses.evaluate_all(x, &mut row);
        row
    }

    fn solve(&mut self, w: &[F], _ctx: &RoundContext) -> Result<X> {
        let weights = WeightVector::new(w.to_vec())?;
        let idx = self.oracle.best_index(&weights)?;
        Ok(self.oracle.space()[idx].clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfiniteRunResult<X, F> {
    pub solutions: Vec<X>,
    pub params: Vec<Vec<F>>,
    /// `L(x_t, w_t)` per round.
    pub values: Vec<F>,
    pub eta: F,
}

/// Step size `max_{w∈W} ‖w‖₂ / √(2T)`.
pub fn eta_infinite_default<F: Scalar>(radius: F, rounds: usize) -> F {
    radius / (F::of(2.0) * F::of_usize(rounds.max(1))).sqrt()
}

/// Adversary by lazy projected gradient ascent, learner by oracle.
///
/// Each round projects the scaled gradient accumulator onto `W`, asks the
/// oracle for a response to that parameter, then adds `∇_w L(x_t, w_t)` to the
/// accumulator. `eta = 0` selects [`eta_infinite_default`].
pub fn run_infinite_robust<X, F, P, W>(
    problem: &mut P,
    param_set: &W,
    rounds: usize,
    eta: F,
    seed: u64,
) -> Result<InfiniteRunResult<X, F>>
where
    F: Scalar,
    P: ParamLoss<X, F> + ?Sized,
    W: ConvexParamSet<F> + ?Sized,
{
    if rounds == 0 {
        return Err(Error::invalid("round count must be at least 1"));
    }
    if !eta.is_finite() || eta < F::zero() {
        return Err(Error::invalid(format!("step size {eta} must be finite and >= 0")));
    }
    let eta = if eta == F::zero() {
        eta_infinite_default(param_set.radius(), rounds)
    } else {
        eta
    };
    // Reuse the finite loop's seed derivation so both variants see the same round seeds.
    let seeds = MwuConfig::new(rounds, eta, ObjectiveSense::Loss, seed)?;
    let dim = param_set.dim();
    let mut theta = vec![F::zero(); dim];
    let mut solutions = Vec::with_capacity(rounds);
    let mut params = Vec::with_capacity(rounds);
    let mut values = Vec::with_capacity(rounds);

    for round in 0..rounds {
        let scaled: Vec<F> = theta.iter().map(|&g| eta * g).collect();
        let w = param_set.project(&scaled)?;
        let ctx = RoundContext {
            round,
            seed: seeds.round_seed(round),
        };
        let x = problem.solve(&w, &ctx).map_err(|e| Error::OracleFailed {
            round,
            source: Box::new(e),
        })?;
        let grad = problem.grad_w(&x, &w);
        if grad.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: grad.len(),
            });
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { round });
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t += *g;
        }
        values.push(problem.value(&x, &w));
        solutions.push(x);
        params.push(w);
    }

    Ok(InfiniteRunResult {
        solutions,
        params,
        values,
        eta,
    })
}
