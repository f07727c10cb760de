//! Contrastive word model: co-occurrence counting, push-pull embedding training,
//! co-occurrence geometry diagnostics and analogy / similarity evaluation.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod scalar;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Real;

/// Single-precision embeddings, the default storage type.
pub type Embeddings = model::EmbeddingMatrix<f32>;
/// Double-precision embeddings, used for gradient and fixed-point checks.
pub type Embeddings64 = model::EmbeddingMatrix<f64>;
