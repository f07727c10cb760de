//! Contrastive push-pull training: hinge loss over (center, window, negative)
//! triples with uniform negative sampling and plain SGD.

mod config;
mod hogwild;
mod loss;
mod sgd;
mod train;

pub use config::{TrainConfig, LR_FLOOR};
pub use loss::{triple_gradient, triple_loss, TripleGradient};
pub use train::{
    throughput_benchmark, train, train_from_counts, train_from_counts_with_progress, train_with_progress,
    EpochStats, ProgressFn, ProgressRecord, ThroughputReport, TrainStats,
};
