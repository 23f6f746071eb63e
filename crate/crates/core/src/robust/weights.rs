use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, Scalar};

/// Slack allowed on the normalization of a [`WeightVector`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Whether the objectives are losses to be minimized in the worst case or
/// rewards to be maximized in the worst case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveSense {
    Loss,
    Reward,
}

impl ObjectiveSense {
    /// `true` if `a` is strictly better than `b` for the learner.
    pub fn improves<F: Scalar>(self, a: F, b: F) -> bool {
        match self {
            ObjectiveSense::Loss => a < b,
            ObjectiveSense::Reward => a > b,
        }
    }

    /// The worst of a set of per-objective values: max for losses, min for rewards.
    pub fn worst<F: Scalar>(self, values: &[F]) -> Option<F> {
        let mut it = values.iter().copied();
        let first = it.next()?;
        Some(it.fold(first, |acc, v| match self {
            ObjectiveSense::Loss => acc.max(v),
            ObjectiveSense::Reward => acc.min(v),
        }))
    }
}

/// Adversary distribution over the `m` objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<F> {
    weights: Vec<F>,
}

impl<F: Scalar> WeightVector<F> {
    /// Validates nonnegativity and normalization (within [`WEIGHT_SUM_TOLERANCE`]).
    pub fn new(weights: Vec<F>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("weight vector"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < F::zero())
        {
            return Err(Error::InvalidWeights(format!("entry {i} is {w}")));
        }
        let total = ordered_sum(weights.iter().copied());
        if (total - F::one()).abs().to_f64_lossy() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("entries sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Empty("weight vector"));
        }
        Ok(Self {
            weights: vec![F::one() / F::of_usize(m); m],
        })
    }

    pub fn point_mass(m: usize, index: usize) -> Result<Self> {
        if index >= m {
            return Err(Error::invalid(format!("point mass index {index} >= {m}")));
        }
        let mut weights = vec![F::zero(); m];
        weights[index] = F::one();
        Ok(Self { weights })
    }

    /// Normalizes nonnegative `raw` weights into a distribution.
    pub fn normalized(raw: Vec<F>) -> Result<Self> {
        if raw.iter().any(|w| !w.is_finite() || *w < F::zero()) {
            return Err(Error::InvalidWeights("negative or non-finite raw weight".into()));
        }
        let total = ordered_sum(raw.iter().copied());
        if total.is_nan() || total <= F::zero() {
            return Err(Error::InvalidWeights("raw weights sum to zero".into()));
        }
        Self::new(raw.into_iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.weights
    }

    pub fn into_inner(self) -> Vec<F> {
        self.weights
    }

    pub fn get(&self, i: usize) -> F {
        self.weights[i]
    }

    /// `Σ_i w[i]·values[i]`, left to right.
    pub fn expectation(&self, values: &[F]) -> F {
        debug_assert_eq!(values.len(), self.weights.len());
        ordered_sum(self.weights.iter().zip(values).map(|(&w, &v)| w * v))
    }

    pub fn l1_distance(&self, other: &Self) -> F {
        ordered_sum(
            self.weights
                .iter()
                .zip(&other.weights)
                .map(|(&a, &b)| (a - b).abs()),
        )
    }

    pub fn l1_from_uniform(&self) -> F {
        let u = F::one() / F::of_usize(self.len());
        ordered_sum(self.weights.iter().map(|&w| (w - u).abs()))
    }
}

/// Step size `√(ln m / (2T))`; zero when there is a single objective.
pub fn eta_default<F: Scalar>(m: usize, rounds: usize) -> F {
    let m = F::of_usize(m.max(1));
    let t = F::of_usize(rounds.max(1));
    (m.ln() / (F::of(2.0) * t)).sqrt()
}

/// Step size `√(ln m / 2) · T^(-γ)`; `γ = 0.5` recovers [`eta_default`].
pub fn eta_gamma<F: Scalar>(m: usize, rounds: usize, gamma: F) -> F {
    let c = (F::of_usize(m.max(1)).ln() / F::of(2.0)).sqrt();
    c * F::of_usize(rounds.max(1)).powf(-gamma)
}

/// Exponential weights over cumulative objective values.
///
/// Losses get `w[i] ∝ exp(η·cum[i])`, rewards `w[i] ∝ exp(-η·cum[i])`, so the
/// adversary always leans toward the objective the learner is doing worst on.
/// The largest exponent is subtracted before exponentiating.
pub fn mwu_weights<F: Scalar>(
    cumulative: &[F],
    eta: F,
    sense: ObjectiveSense,
) -> Result<WeightVector<F>> {
    if cumulative.is_empty() {
        return Err(Error::Empty("cumulative objective values"));
    }
    if cumulative.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("cumulative objective values"));
    }
    if !eta.is_finite() || eta < F::zero() {
        return Err(Error::invalid(format!("step size {eta} must be finite and >= 0")));
    }
    let sign = match sense {
        ObjectiveSense::Loss => F::one(),
        ObjectiveSense::Reward => -F::one(),
    };
    let exponents: Vec<F> = cumulative.iter().map(|&c| sign * eta * c).collect();
    let peak = exponents
        .iter()
        .copied()
        .fold(F::neg_infinity(), F::max);
    let raw: Vec<F> = exponents.iter().map(|&e| (e - peak).exp()).collect();
    let total = ordered_sum(raw.iter().copied());
    Ok(WeightVector {
        weights: raw.into_iter().map(|r| r / total).collect(),
    })
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn simplex_projection<F: Scalar>(v: &[F]) -> Result<WeightVector<F>> {
    if v.is_empty() {
        return Err(Error::Empty("vector to project"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("vector to project"));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut prefix = F::zero();
    let mut theta = F::zero();
    for (j, &u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - F::one()) / F::of_usize(j + 1);
        if u - candidate > F::zero() {
            theta = candidate;
        }
    }
    let mut weights: Vec<F> = v.iter().map(|&x| (x - theta).max(F::zero())).collect();
    // Renormalize away the last ulp of drift so the invariant holds exactly-ish.
    let total = ordered_sum(weights.iter().copied());
    if total > F::zero() {
        for w in &mut weights {
            *w /= total;
        }
    }
    WeightVector::new(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn eta_default_examples() {
        assert_eq!(eta_default::<f64>(1, 10), 0.0);
        assert_abs_diff_eq!(eta_default::<f64>(4, 50), (4f64.ln() / 100.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(eta_default::<f64>(4, 50), 0.11774, epsilon = 1e-5);
        assert_abs_diff_eq!(eta_default::<f64>(10, 200), 0.07587, epsilon = 1e-5);
    }

    #[test]
    fn eta_gamma_examples() {
        assert_abs_diff_eq!(eta_gamma::<f64>(4, 50, 0.5), eta_default::<f64>(4, 50), epsilon = 1e-15);
        assert_abs_diff_eq!(eta_gamma::<f64>(4, 50, 0.1), 0.563010, epsilon = 1e-6);
        assert_abs_diff_eq!(eta_gamma::<f64>(2, 1, 1.0), 0.5887, epsilon = 1e-4);
    }

    #[test]
    fn mwu_weights_examples() {
        let w = mwu_weights(&[0.0f64; 5], 0.7, ObjectiveSense::Loss).unwrap();
        assert!(w.as_slice().iter().all(|&x| (x - 0.2).abs() < 1e-15));

        let ln2 = 2f64.ln();
        let w = mwu_weights(&[1.0, 0.0], ln2, ObjectiveSense::Loss).unwrap();
        assert_abs_diff_eq!(w.get(0), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.get(1), 1.0 / 3.0, epsilon = 1e-12);

        let w = mwu_weights(&[1.0, 0.0], ln2, ObjectiveSense::Reward).unwrap();
        assert_abs_diff_eq!(w.get(0), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.get(1), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn mwu_weights_survive_huge_exponents() {
        let w = mwu_weights(&[1e6f64, 1e6 - 1.0], 10.0, ObjectiveSense::Loss).unwrap();
        assert!(w.get(0) > 0.99);
        assert!(w.as_slice().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn mwu_weights_reject_corrupted_state() {
        assert!(matches!(
            mwu_weights(&[0.0, f64::NAN], 0.1, ObjectiveSense::Loss),
            Err(Error::NonFinite(_))
        ));
        assert!(mwu_weights(&[0.0, f64::INFINITY], 0.1, ObjectiveSense::Loss).is_err());
    }

    #[test]
    fn projection_examples() {
        let w = simplex_projection(&[2.0f64, 0.0]).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 0.0]);
        let w = simplex_projection(&[3.5f64; 4]).unwrap();
        assert!(w.as_slice().iter().all(|&x| (x - 0.25).abs() < 1e-15));
        let inside = [0.1f64, 0.6, 0.3];
        let w = simplex_projection(&inside).unwrap();
        for (a, b) in w.as_slice().iter().zip(inside) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5f64, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.6f64, 0.5]).is_err());
        assert!(WeightVector::new(vec![1.5f64, -0.5]).is_err());
        assert!(WeightVector::<f64>::new(vec![]).is_err());
        assert!(WeightVector::<f64>::point_mass(3, 3).is_err());
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_nonexpansive(
            u in prop::collection::vec(-5.0f64..5.0, 1..9),
            shift in prop::collection::vec(-5.0f64..5.0, 9),
        ) {
            let v: Vec<f64> = u.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let pu = simplex_projection(&u).unwrap();
            let pv = simplex_projection(&v).unwrap();
            let ppu = simplex_projection(pu.as_slice()).unwrap();
            for (a, b) in pu.as_slice().iter().zip(ppu.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
            let diff_p: Vec<f64> = pu.as_slice().iter().zip(pv.as_slice()).map(|(a, b)| a - b).collect();
            let diff: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
            prop_assert!(norm(&diff_p) <= norm(&diff) + 1e-12);
        }

        #[test]
        fn mwu_weights_are_distributions(
            cum in prop::collection::vec(0.0f64..1000.0, 1..10),
            eta in 0.0f64..3.0,
            reward in any::<bool>(),
        ) {
            let sense = if reward { ObjectiveSense::Reward } else { ObjectiveSense::Loss };
            let w = mwu_weights(&cum, eta, sense).unwrap();
            let total: f64 = w.as_slice().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            prop_assert!(w.as_slice().iter().all(|&x| x >= 0.0));
        }
    }
}
