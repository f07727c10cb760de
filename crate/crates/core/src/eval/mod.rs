//! Analogy and word-similarity evaluation of trained embeddings.

mod analogy;
mod metrics;
mod recovery;
mod report;
mod similarity;

pub use analogy::{AnalogyPair, AnalogyQuery, AnalogySet, Category, Coverage, MultiAnswer, ResolvedCategory};
pub use metrics::{auc, average_ranks, mean_vector, msm, offset_scores, pcs, pcs_from_scores, spearman, DEFAULT_PCS_SUBSETS};
pub use recovery::{
    parallelogram_recovery, recovery_rates, trapezoid_recovery, zeta_stratified_recovery, Rate, RecoveryReport,
    Retrieval, Stratum, StratifiedReport, COLLINEARITY_THRESHOLD, ZETA_BAND,
};
pub use report::{
    category_offsets, evaluate, Aggregate, CategoryReport, EvalConfig, EvalReport, ReferenceValues, PCS_SCORING,
    SCHEMA_VERSION,
};
pub use similarity::{
    load_similarity, parse_similarity, word_similarity, SimilarityPair, SimilarityReport, MIN_SIMILARITY_PAIRS,
};
