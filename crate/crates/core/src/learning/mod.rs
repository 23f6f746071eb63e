//! Corruption-robust digit classification.
//!
//! A one-hidden-layer ReLU network with softmax output is the learner; the
//! Hybrid and Composite training procedures act as Bayesian oracles for a
//! distribution over image corruptions.

mod corruption;
mod data;
mod experiment;
mod mlp;
mod oracle;

pub use corruption::{
    apply_corruption, CorruptedCopies, CorruptionSet, CorruptionSpec, CHECKER_BLOCK, CHECKER_LEVEL, GRADIENT_MAX,
    SHRINK_FACTOR, TINT_LEVEL,
};
pub use data::{DatasetRole, Image, LabeledDataset, NUM_CLASSES};
pub use experiment::{
    baseline_even_split, baseline_individual, baseline_uniform, bottleneck_losses, ensemble_bottleneck_loss,
    ensemble_predict, individual_bottleneck_loss, label_log_probs, mean_cross_entropy, raw_loss_table, robust_train,
    BottleneckLosses, ValidationLosses, LOSS_CAP,
};
pub use mlp::MlpParams;
pub use oracle::{
    train_oracle, train_oracle_composite, train_oracle_hybrid, training_noise_seed, Method, TrainConfig, Trained,
    TrainingOracle,
};
