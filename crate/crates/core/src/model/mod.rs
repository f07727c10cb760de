//! Embedding matrix, normalization, retrieval and persistence.

mod io;
mod matrix;

pub use io::{
    load_binary, load_text, read_binary, read_text, save_binary, save_text, write_binary, write_text,
    EMBEDDINGS_MAGIC, EMBEDDINGS_VERSION,
};
pub use matrix::{normalize, EmbeddingMatrix, NormalizedView, TopK, EPS_NORM};
pub(crate) use matrix::{rank_order, select_top};
