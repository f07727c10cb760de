//! Corpus ingestion: vocabulary construction and windowed co-occurrence counting.

mod cooc;
mod io;
pub mod synthetic;
mod vocab;

pub use cooc::{count_cooccurrences, count_cooccurrences_sharded, CooccurrenceRows, CooccurrenceStore};
pub use io::{
    load_counts, load_vocab, read_counts, read_vocab, save_counts, save_vocab, write_counts,
    write_vocab, COUNTS_MAGIC, COUNTS_VERSION,
};
pub use vocab::{tokenize, IdCorpus, Vocabulary, OOV};
