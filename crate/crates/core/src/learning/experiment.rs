//! Robust training against a corruption set, its baselines and the
//! bottleneck-loss criteria.

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::learning::corruption::{CorruptedCopies, CorruptionSet};
use crate::learning::data::LabeledDataset;
use crate::learning::mlp::MlpParams;
use crate::learning::oracle::{train_oracle, Method, TrainConfig, TrainingOracle};
use crate::robust::{eta_gamma, run_improper_robust, LossMatrixView, MwuConfig, ObjectiveSense, RobustRunResult, WeightVector};
use crate::scalar::Scalar;

/// Cross-entropy is divided by this cap and clipped to 1 before it reaches
/// the multiplicative weights; a uniform prediction costs `ln 10`, half the cap.
pub const LOSS_CAP: f64 = 2.0 * std::f64::consts::LN_10;

const EVAL_CHUNK: usize = 512;

/// `ln p_θ(y_n | x_n)` for every row, accumulated in `f64`.
pub fn label_log_probs<F: Scalar>(params: &MlpParams<F>, x: &Array2<f32>, labels: &[u8]) -> Result<Vec<f64>> {
    if x.nrows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: labels.len(),
        });
    }
    let mut out = Vec::with_capacity(labels.len());
    let mut start = 0;
    while start < x.nrows() {
        let end = (start + EVAL_CHUNK).min(x.nrows());
        let chunk: Array2<F> = x.slice(s![start..end, ..]).mapv(|v| F::of(v as f64));
        let logits = params.logits(chunk.view())?;
        for (row, &y) in logits.rows().into_iter().zip(&labels[start..end]) {
            let row: Vec<f64> = row.iter().map(|v| v.to_f64_lossy()).collect();
            out.push(log_softmax(&row)[y as usize]);
        }
        start = end;
    }
    Ok(out)
}

fn log_softmax(row: &[f64]) -> Vec<f64> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    row.iter().map(|v| v - lse).collect()
}

/// Mean cross-entropy of `params` on `x`.
pub fn mean_cross_entropy<F: Scalar>(params: &MlpParams<F>, x: &Array2<f32>, labels: &[u8]) -> Result<f64> {
    let lp = label_log_probs(params, x, labels)?;
    if lp.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    Ok(-lp.iter().sum::<f64>() / lp.len() as f64)
}

/// `L_i(θ) = min(1, CE(θ; validation corrupted by c_i) / LOSS_CAP)`.
pub struct ValidationLosses<'a> {
    pub copies: &'a CorruptedCopies,
}

impl<F: Scalar> LossMatrixView<MlpParams<F>, F> for ValidationLosses<'_> {
    fn num_objectives(&self) -> usize {
        self.copies.m()
    }

    fn evaluate(&self, objective: usize, x: &MlpParams<F>) -> F {
        // A failed evaluation maps to NaN, which the robust loop rejects as out of range.
        match mean_cross_entropy(x, &self.copies.copies[objective], &self.copies.labels) {
            Ok(ce) => F::of((ce / LOSS_CAP).min(1.0)),
            Err(_) => F::nan(),
        }
    }
}

/// Raw (unscaled) cross-entropy of every solution on every copy:
/// `table[t][i] = CE(θ_t; copy i)`.
pub fn raw_loss_table<F: Scalar>(solutions: &[MlpParams<F>], copies: &CorruptedCopies) -> Result<Vec<Vec<f64>>> {
    solutions
        .iter()
        .map(|p| copies.copies.iter().map(|x| mean_cross_entropy(p, x, &copies.labels)).collect())
        .collect()
}

/// Robust training: multiplicative weights over the corruptions of `cset`,
/// scored on the fixed validation copies, with `method` as the oracle and
/// step size `√(ln m / 2) · T^-γ`.
#[allow(clippy::too_many_arguments)]
pub fn robust_train<F: Scalar>(
    train: &LabeledDataset,
    validation: &CorruptedCopies,
    cset: &CorruptionSet,
    rounds: usize,
    cfg: &TrainConfig,
    method: Method,
    gamma: F,
    seed: u64,
) -> Result<RobustRunResult<MlpParams<F>, F>> {
    let eta = eta_gamma(cset.m(), rounds, gamma);
    run_training(train, validation, cset, rounds, cfg, method, eta, seed)
}

#[allow(clippy::too_many_arguments)]
fn run_training<F: Scalar>(
    train: &LabeledDataset,
    validation: &CorruptedCopies,
    cset: &CorruptionSet,
    rounds: usize,
    cfg: &TrainConfig,
    method: Method,
    eta: F,
    seed: u64,
) -> Result<RobustRunResult<MlpParams<F>, F>> {
    if validation.m() != cset.m() {
        return Err(Error::DimensionMismatch {
            expected: cset.m(),
            found: validation.m(),
        });
    }
    let losses = ValidationLosses { copies: validation };
    let mut oracle = TrainingOracle {
        method,
        train,
        cset,
        cfg: *cfg,
    };
    let config = MwuConfig::new(rounds, eta, ObjectiveSense::Loss, seed)?;
    run_improper_robust(&losses, &mut oracle, &config)
}

/// Uniform-distribution baseline: the robust loop with the distribution held
/// at uniform (`η = 0`). The usual comparison runs it with the Hybrid oracle.
pub fn baseline_uniform<F: Scalar>(
    train: &LabeledDataset,
    validation: &CorruptedCopies,
    cset: &CorruptionSet,
    rounds: usize,
    cfg: &TrainConfig,
    method: Method,
    seed: u64,
) -> Result<RobustRunResult<MlpParams<F>, F>> {
    run_training(train, validation, cset, rounds, cfg, method, F::zero(), seed)
}

fn fixed_schedule<F: Scalar>(
    train: &LabeledDataset,
    cset: &CorruptionSet,
    rounds: usize,
    cfg: &TrainConfig,
    seed: u64,
    corruption_at: impl Fn(usize) -> usize,
) -> Result<Vec<MlpParams<F>>> {
    if rounds == 0 {
        return Err(Error::invalid("round count must be at least 1"));
    }
    let seeds = MwuConfig::new(rounds, F::zero(), ObjectiveSense::Loss, seed)?;
    (0..rounds)
        .map(|t| {
            let w = WeightVector::<F>::point_mass(cset.m(), corruption_at(t))?;
            let cfg = TrainConfig {
                seed: seeds.round_seed(t),
                ..*cfg
            };
            Ok(train_oracle(Method::Hybrid, &w, train, cset, &cfg)?.params)
        })
        .collect()
}

/// Individual-corruption baseline: every round trains on corruption `i` only.
pub fn baseline_individual<F: Scalar>(
    i: usize,
    train: &LabeledDataset,
    cset: &CorruptionSet,
    rounds: usize,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<Vec<MlpParams<F>>> {
    if i >= cset.m() {
        return Err(Error::invalid(format!("corruption index {i} outside 0..{}", cset.m())));
    }
    fixed_schedule(train, cset, rounds, cfg, seed, |_| i)
}

/// Even-split baseline: round `t` trains on corruption `t mod m`.
pub fn baseline_even_split<F: Scalar>(
    train: &LabeledDataset,
    cset: &CorruptionSet,
    rounds: usize,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<Vec<MlpParams<F>>> {
    let m = cset.m();
    fixed_schedule(train, cset, rounds, cfg, seed, |t| t % m)
}

/// Both bottleneck criteria, with their per-corruption components.
#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckLosses {
    /// `mean_t CE(θ_t; copy i)` per corruption.
    pub individual_by_corruption: Vec<f64>,
    /// `CE(mean_t p_{θ_t}; copy i)` per corruption.
    pub ensemble_by_corruption: Vec<f64>,
    pub individual: f64,
    pub ensemble: f64,
}

/// Evaluates both criteria in one pass over the solutions.
///
/// The ensemble's log-probability of the label is a log-sum-exp of the
/// members' log-probabilities, so it never loses precision to underflow.
pub fn bottleneck_losses<F: Scalar>(solutions: &[MlpParams<F>], data: &CorruptedCopies) -> Result<BottleneckLosses> {
    if solutions.is_empty() {
        return Err(Error::Empty("solution list"));
    }
    let t = solutions.len() as f64;
    let mut individual_by_corruption = Vec::with_capacity(data.m());
    let mut ensemble_by_corruption = Vec::with_capacity(data.m());
    for x in &data.copies {
        let lps: Vec<Vec<f64>> = solutions
            .iter()
            .map(|p| label_log_probs(p, x, &data.labels))
            .collect::<Result<_>>()?;
        let n = data.labels.len();
        if n == 0 {
            return Err(Error::Empty("evaluation set"));
        }
        let individual = lps.iter().map(|lp| -lp.iter().sum::<f64>() / n as f64).sum::<f64>() / t;
        let mut ensemble = 0.0;
        for j in 0..n {
            let max = lps.iter().map(|lp| lp[j]).fold(f64::NEG_INFINITY, f64::max);
            let lse = max + lps.iter().map(|lp| (lp[j] - max).exp()).sum::<f64>().ln();
            ensemble -= lse - t.ln();
        }
        individual_by_corruption.push(individual);
        ensemble_by_corruption.push(ensemble / n as f64);
    }
    let worst = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BottleneckLosses {
        individual: worst(&individual_by_corruption),
        ensemble: worst(&ensemble_by_corruption),
        individual_by_corruption,
        ensemble_by_corruption,
    })
}

/// Worst corruption's mean cross-entropy, averaged over the solutions.
pub fn individual_bottleneck_loss<F: Scalar>(solutions: &[MlpParams<F>], data: &CorruptedCopies) -> Result<f64> {
    Ok(bottleneck_losses(solutions, data)?.individual)
}

/// Worst corruption's mean cross-entropy of the averaged prediction.
pub fn ensemble_bottleneck_loss<F: Scalar>(solutions: &[MlpParams<F>], data: &CorruptedCopies) -> Result<f64> {
    Ok(bottleneck_losses(solutions, data)?.ensemble)
}

/// Class maximizing the mean softmax output of the solutions; ties go to the
/// lowest class.
pub fn ensemble_predict<F: Scalar>(solutions: &[MlpParams<F>], img: &[f32]) -> Result<usize> {
    let first = solutions.first().ok_or(Error::Empty("solution list"))?;
    let x: Vec<F> = img.iter().map(|&v| F::of(v as f64)).collect();
    let view = ArrayView2::from_shape((1, x.len()), &x).map_err(|e| Error::invalid(e.to_string()))?;
    let mut mean = vec![0.0f64; first.classes()];
    for p in solutions {
        let logits = p.logits(view)?;
        let row: Vec<f64> = logits.row(0).iter().map(|v| v.to_f64_lossy()).collect();
        for (m, lp) in mean.iter_mut().zip(log_softmax(&row)) {
            *m += lp.exp();
        }
    }
    let mut best = 0;
    for (c, &v) in mean.iter().enumerate() {
        if v > mean[best] {
            best = c;
        }
    }
    Ok(best)
}
