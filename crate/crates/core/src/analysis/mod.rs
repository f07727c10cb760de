//! Geometry of co-occurrence profiles and of trained embeddings.

mod cvector;
mod diagnostics;
mod synth;
mod zeta;

pub use diagnostics::{pearson, EmbeddingDiagnostics, NormFrequencyFit, ResidualReport, Summary};
pub use cvector::{CVector, CooccurrenceStats, Marginal, Quadruple};
pub use synth::{
    realize_corpus, satisfies_condition, theorem1_batch, theorem1_synthesize, SyntheticStore, Theorem1Config,
};
pub use zeta::{
    diagnose_quadruple, population_quadruples, write_diagnostics, write_plot_data, zeta_distribution, Population,
    QuadrupleDiagnostics, ZetaPopulation,
};
