use ndarray::Array2;

use crate::error::{Error, Result};
use crate::learning::corruption::CorruptionSet;
use crate::learning::data::{LabeledDataset, NUM_CLASSES};
use crate::learning::mlp::MlpParams;
use crate::rng::{derive_seed, SplitMix64};
use crate::robust::{BayesianOracle, RoundContext, WeightVector};
use crate::scalar::Scalar;

// Substream indices under a training seed.
const STREAM_INIT: u64 = 0;
const STREAM_SCHEDULE: u64 = 1;
const STREAM_CHOICE: u64 = 2;
const STREAM_NOISE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Number of mini-batch SGD steps.
    pub steps: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            steps: 500,
            batch_size: 100,
            hidden: 1024,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.steps == 0 || self.batch_size == 0 || self.hidden == 0 {
            return Err(Error::invalid("steps, batch size and hidden size must be positive"));
        }
        Ok(())
    }
}

/// How a training oracle turns a distribution over corruptions into a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Each training image gets one corruption drawn from `w`.
    Hybrid,
    /// Every image is seen under every corruption; per-copy losses are combined with weights `w`.
    Composite,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Hybrid => "hybrid",
            Method::Composite => "composite",
        }
    }
}

/// Final parameters and the per-step training loss.
#[derive(Debug, Clone)]
pub struct Trained<F> {
    pub params: MlpParams<F>,
    pub batch_losses: Vec<F>,
}

/// Seed of the noise applied to training image `image` under corruption
/// `corruption` at SGD step `step`.
pub fn training_noise_seed(seed: u64, step: usize, image: usize, corruption: usize) -> u64 {
    derive_seed(derive_seed(seed, STREAM_NOISE, step as u64), image as u64, corruption as u64)
}

/// Mini-batches drawn without replacement, reshuffling after every pass.
struct BatchSchedule {
    order: Vec<usize>,
    pos: usize,
    batch: usize,
    rng: SplitMix64,
}

impl BatchSchedule {
    fn new(n: usize, batch: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        Self {
            order,
            pos: 0,
            batch: batch.min(n),
            rng,
        }
    }

    fn next_batch(&mut self) -> Vec<usize> {
        if self.pos + self.batch > self.order.len() {
            self.rng.shuffle(&mut self.order);
            self.pos = 0;
        }
        let out = self.order[self.pos..self.pos + self.batch].to_vec();
        self.pos += self.batch;
        out
    }
}

/// Trains a fresh net on `train` corrupted according to `w` and `method`.
///
/// Both methods share the initialization, the batch sequence and the noise
/// seeds, so a one-hot `w` gives the same parameters under either method.
pub fn train_oracle<F: Scalar>(
    method: Method,
    w: &WeightVector<F>,
    train: &LabeledDataset,
    cset: &CorruptionSet,
    cfg: &TrainConfig,
) -> Result<Trained<F>> {
    cfg.validate()?;
    if w.len() != cset.m() {
        return Err(Error::DimensionMismatch {
            expected: cset.m(),
            found: w.len(),
        });
    }
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let (h, wd) = (train.height, train.width);
    let d = train.dim();
    let mut params = MlpParams::<F>::init(d, cfg.hidden, NUM_CLASSES, derive_seed(cfg.seed, STREAM_INIT, 0))?;
    let mut schedule = BatchSchedule::new(train.len(), cfg.batch_size, derive_seed(cfg.seed, STREAM_SCHEDULE, 0));
    let weights: Vec<f64> = w.as_slice().iter().map(|v| v.to_f64_lossy()).collect();
    let active: Vec<usize> = (0..cset.m()).filter(|&i| w.get(i) > F::zero()).collect();
    let lr = F::of(cfg.learning_rate);
    let mut buf = vec![0.0f32; d];
    let mut batch_losses = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        let batch = schedule.next_batch();
        let b = batch.len();
        let inv_b = F::one() / F::of_usize(b);
        // (image index, corruption index, row weight) for every row of the step's matrix.
        let rows: Vec<(usize, usize, F)> = match method {
            Method::Hybrid => {
                let mut choice = SplitMix64::new(derive_seed(cfg.seed, STREAM_CHOICE, step as u64));
                batch.iter().map(|&j| (j, choice.categorical(&weights), inv_b)).collect()
            }
            Method::Composite => active
                .iter()
                .flat_map(|&i| batch.iter().map(move |&j| (j, i, w.get(i) * inv_b)))
                .collect(),
        };
        let mut x = Array2::<F>::zeros((rows.len(), d));
        let mut labels = Vec::with_capacity(rows.len());
        let mut row_weights = Vec::with_capacity(rows.len());
        for (mut out, &(j, i, rw)) in x.rows_mut().into_iter().zip(&rows) {
            let src = train.images.row(j);
            let src = src.as_slice().expect("dataset rows are contiguous");
            cset.specs[i].apply_into(src, h, wd, training_noise_seed(cfg.seed, step, j, i), &mut buf);
            for (o, &v) in out.iter_mut().zip(&buf) {
                *o = F::of(v as f64);
            }
            labels.push(train.labels[j]);
            row_weights.push(rw);
        }
        let (loss, grad) = params.loss_and_grad(x.view(), &labels, &row_weights)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite("training loss"));
        }
        params.sgd_step(&grad, lr);
        batch_losses.push(loss);
    }
    Ok(Trained { params, batch_losses })
}

pub fn train_oracle_hybrid<F: Scalar>(
    w: &WeightVector<F>,
    train: &LabeledDataset,
    cset: &CorruptionSet,
    cfg: &TrainConfig,
) -> Result<MlpParams<F>> {
    Ok(train_oracle(Method::Hybrid, w, train, cset, cfg)?.params)
}

pub fn train_oracle_composite<F: Scalar>(
    w: &WeightVector<F>,
    train: &LabeledDataset,
    cset: &CorruptionSet,
    cfg: &TrainConfig,
) -> Result<MlpParams<F>> {
    Ok(train_oracle(Method::Composite, w, train, cset, cfg)?.params)
}

/// Training oracle for the robust loop; each round trains with the round's seed.
pub struct TrainingOracle<'a> {
    pub method: Method,
    pub train: &'a LabeledDataset,
    pub cset: &'a CorruptionSet,
    pub cfg: TrainConfig,
}

impl<F: Scalar> BayesianOracle<MlpParams<F>, F> for TrainingOracle<'_> {
    fn solve(&mut self, weights: &WeightVector<F>, ctx: &RoundContext) -> Result<MlpParams<F>> {
        let cfg = TrainConfig { seed: ctx.seed, ..self.cfg };
        Ok(train_oracle(self.method, weights, self.train, self.cset, &cfg)?.params)
    }

    /// Gradient descent on a non-convex loss carries no approximation
    /// guarantee; the declared factor is nominal.
    fn alpha(&self) -> F {
        F::one()
    }
}
