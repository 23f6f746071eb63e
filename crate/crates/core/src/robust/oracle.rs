use crate::error::{Error, Result};
use crate::robust::weights::{ObjectiveSense, WeightVector};
use crate::scalar::Scalar;

/// A finite family of objectives `L_1..L_m` over solutions of type `X`.
///
/// `evaluate` must be pure: the same `(i, x)` always yields the same value,
/// which must lie in `[0, 1]`.
pub trait LossMatrixView<X, F> {
    fn num_objectives(&self) -> usize;

    fn evaluate(&self, objective: usize, x: &X) -> F;

    /// Fills `out[i] = evaluate(i, x)`. Override when objectives share work.
    fn evaluate_all(&self, x: &X, out: &mut [F]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.evaluate(i, x);
        }
    }
}

impl<X, F, L: LossMatrixView<X, F> + ?Sized> LossMatrixView<X, F> for &L {
    fn num_objectives(&self) -> usize {
        (**self).num_objectives()
    }
    fn evaluate(&self, objective: usize, x: &X) -> F {
        (**self).evaluate(objective, x)
    }
    fn evaluate_all(&self, x: &X, out: &mut [F]) {
        (**self).evaluate_all(x, out)
    }
}

/// Per-round information handed to an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundContext {
    /// Zero-based round index.
    pub round: usize,
    /// Seed of this round's random substream.
    pub seed: u64,
}

/// Approximately solves the Bayesian problem for a fixed distribution over
/// objectives: for losses, returns `x` with `E_w[L(x)] <= α · min_x E_w[L(x)]`.
pub trait BayesianOracle<X, F> {
    fn solve(&mut self, weights: &WeightVector<F>, ctx: &RoundContext) -> Result<X>;

    /// Declared approximation factor.
    fn alpha(&self) -> F;
}

/// Adapts a closure into a [`BayesianOracle`].
pub struct FnOracle<G, F> {
    solve: G,
    alpha: F,
}

impl<G, F> FnOracle<G, F> {
    pub fn new(alpha: F, solve: G) -> Self {
        Self { solve, alpha }
    }
}

impl<X, F, G> BayesianOracle<X, F> for FnOracle<G, F>
where
    F: Scalar,
    G: FnMut(&WeightVector<F>, &RoundContext) -> Result<X>,
{
    fn solve(&mut self, weights: &WeightVector<F>, ctx: &RoundContext) -> Result<X> {
        (self.solve)(weights, ctx)
    }

    fn alpha(&self) -> F {
        self.alpha
    }
}

/// Objectives given as an explicit table over solution indices:
/// `rows[x][i] = L_i(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableLosses<F> {
    rows: Vec<Vec<F>>,
    m: usize,
}

impl<F: Scalar> TableLosses<F> {
    pub fn new(rows: Vec<Vec<F>>) -> Result<Self> {
        let m = rows.first().map(Vec::len).ok_or(Error::Empty("loss table"))?;
        if m == 0 {
            return Err(Error::Empty("loss table row"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        Ok(Self { rows, m })
    }

    pub fn num_solutions(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, x: usize) -> &[F] {
        &self.rows[x]
    }

    /// Table of `1 - L_i(x)`.
    pub fn complement(&self) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&v| F::one() - v).collect())
                .collect(),
            m: self.m,
        }
    }
}

impl<F: Scalar> LossMatrixView<usize, F> for TableLosses<F> {
    fn num_objectives(&self) -> usize {
        self.m
    }

    fn evaluate(&self, objective: usize, x: &usize) -> F {
        self.rows[*x][objective]
    }
}

/// Exact oracle over an enumerable solution space (`α = 1`).
///
/// Minimizes (losses) or maximizes (rewards) `E_{I~w}[L_I(x)]` by brute force;
/// ties go to the lowest index in the space.
pub struct ExactFiniteOracle<X, L> {
    space: Vec<X>,
    losses: L,
    sense: ObjectiveSense,
}

impl<X, L> ExactFiniteOracle<X, L> {
    pub fn new(space: Vec<X>, losses: L, sense: ObjectiveSense) -> Result<Self> {
        if space.is_empty() {
            return Err(Error::Empty("solution space"));
        }
        Ok(Self {
            space,
            losses,
            sense,
        })
    }

    pub fn space(&self) -> &[X] {
        &self.space
    }

    /// Index in the space of the best response to `weights`.
    pub fn best_index<F>(&self, weights: &WeightVector<F>) -> Result<usize>
    where
        F: Scalar,
        L: LossMatrixView<X, F>,
    {
        let m = self.losses.num_objectives();
        if weights.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: weights.len(),
            });
        }
        let mut row = vec![F::zero(); m];
        let mut best: Option<(usize, F)> = None;
        for (idx, x) in self.space.iter().enumerate() {
            self.losses.evaluate_all(x, &mut row);
            let value = weights.expectation(&row);
            match best {
                Some((_, b)) if !self.sense.improves(value, b) => {}
                _ => best = Some((idx, value)),
            }
        }
        Ok(best.expect("space is nonempty").0)
    }
}

impl<X, F, L> BayesianOracle<X, F> for ExactFiniteOracle<X, L>
where
    X: Clone,
    F: Scalar,
    L: LossMatrixView<X, F>,
{
    fn solve(&mut self, weights: &WeightVector<F>, _ctx: &RoundContext) -> Result<X> {
        let idx = self.best_index(weights)?;
        Ok(self.space[idx].clone())
    }

    fn alpha(&self) -> F {
        F::one()
    }
}

/// Brute-force pure minimax value over a finite table: `min_x max_i L_i(x)`
/// for losses, `max_x min_i f_i(x)` for rewards.
pub fn pure_minimax<F: Scalar>(table: &TableLosses<F>, sense: ObjectiveSense) -> F {
    let mut best: Option<F> = None;
    for x in 0..table.num_solutions() {
        let worst = sense.worst(table.row(x)).expect("rows are nonempty");
        best = Some(match best {
            Some(b) if !sense.improves(worst, b) => b,
            _ => worst,
        });
    }
    best.expect("table is nonempty")
}
