use std::fmt::Write as _;

use super::analogy::{AnalogyQuery, AnalogySet, Coverage, MultiAnswer};
use super::metrics::{msm, pcs, DEFAULT_PCS_SUBSETS};
use super::recovery::{recovery_rates, zeta_stratified_recovery, RecoveryReport, StratifiedReport};
use super::similarity::SimilarityReport;
use crate::analysis::CooccurrenceStats;
use crate::error::{Error, Result};
use crate::model::{EmbeddingMatrix, NormalizedView};
use crate::scalar::Real;

pub const SCHEMA_VERSION: u32 = 1;
pub const PCS_SCORING: &str = "cosine of each offset to the mean true offset";

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub ks: Vec<usize>,
    pub pcs_subsets: usize,
    pub seed: u64,
    pub multi_answer: MultiAnswer,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            ks: vec![1, 5],
            pcs_subsets: DEFAULT_PCS_SUBSETS,
            seed: 1,
            multi_answer: MultiAnswer::First,
        }
    }
}

/// Published full-scale figures, kept for side-by-side comparison only.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReferenceValues {
    pub pcs: f64,
    pub msm: f64,
    pub parallelogram: f64,
    pub wordsim: f64,
    pub stratified_near_one: [String; 2],
    pub stratified_other: [String; 2],
    pub note: String,
}

impl Default for ReferenceValues {
    fn default() -> Self {
        ReferenceValues {
            pcs: 0.677,
            msm: 0.469,
            parallelogram: 0.27,
            wordsim: 0.66,
            stratified_near_one: ["0.652 (137/210)".into(), "0.871 (183/210)".into()],
            stratified_other: ["0.800 (619/774)".into(), "0.862 (667/774)".into()],
            note: "full-Wikipedia training, D=300; not expected at desk scale".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CategoryReport {
    pub name: String,
    pub pairs: usize,
    pub pairs_in_vocab: usize,
    pub pcs: Option<f64>,
    pub msm: Option<f64>,
    /// Why PCS or MSM is missing.
    pub note: Option<String>,
    pub coverage: Coverage,
    pub recovery: RecoveryReport,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Aggregate {
    /// Mean over categories with a defined value.
    pub pcs: Option<f64>,
    pub msm: Option<f64>,
    pub coverage: Coverage,
    pub recovery: RecoveryReport,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub config: EvalConfig,
    pub pcs_scoring: String,
    pub categories: Vec<CategoryReport>,
    pub aggregate: Aggregate,
    pub stratified: Option<StratifiedReport>,
    pub similarity: Option<SimilarityReport>,
    pub reference: ReferenceValues,
}

fn offset<T: Real>(view: &NormalizedView<T>, a: u32, b: u32) -> Vec<T> {
    view.row(a).iter().zip(view.row(b)).map(|(&x, &y)| x - y).collect()
}

/// True offsets `v̂_{a_i} − v̂_{b_i}` and false offsets `v̂_{a_i} − v̂_{b_j}`, `i ≠ j`,
/// over the non-degenerate pairs of one category.
pub fn category_offsets<T: Real>(view: &NormalizedView<T>, pairs: &[(u32, Vec<u32>)]) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let ok: Vec<(u32, u32)> = pairs
        .iter()
        .map(|(a, bs)| (*a, bs[0]))
        .filter(|&(a, b)| !view.is_degenerate(a) && !view.is_degenerate(b) && a != b)
        .collect();
    let pos = ok.iter().map(|&(a, b)| offset(view, a, b)).collect();
    let mut neg = Vec::new();
    for (i, &(a, _)) in ok.iter().enumerate() {
        for (j, &(_, b)) in ok.iter().enumerate() {
            if i != j && a != b {
                neg.push(offset(view, a, b));
            }
        }
    }
    (pos, neg)
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn merge_recovery(into: &mut RecoveryReport, r: &RecoveryReport) {
    if into.ks.is_empty() {
        *into = r.clone();
        return;
    }
    for (a, b) in into.parallelogram.iter_mut().zip(&r.parallelogram) {
        a.hits += b.hits;
        a.total += b.total;
    }
    for (a, b) in into.trapezoid.iter_mut().zip(&r.trapezoid) {
        a.hits += b.hits;
        a.total += b.total;
    }
    into.skipped += r.skipped;
}

/// PCS, MSM and recovery per category and in aggregate; the stratified table
/// when co-occurrence statistics for the same vocabulary are supplied.
pub fn evaluate<T: Real>(
    m: &EmbeddingMatrix<T>,
    set: &AnalogySet,
    stats: Option<&CooccurrenceStats<'_>>,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if cfg.ks.is_empty() || cfg.ks.contains(&0) {
        return Err(Error::InvalidConfig("ks must be a non-empty list of positive ranks".into()));
    }
    let view = m.normalized();
    let vocab = m.vocab();
    let resolved = set.resolve(vocab);
    let (queries, coverage) = set.queries(vocab, cfg.multi_answer);
    let mut categories = Vec::with_capacity(resolved.len());
    let mut agg_recovery = RecoveryReport::default();
    for (ci, res) in resolved.iter().enumerate() {
        let (pos, neg) = category_offsets(&view, &res.pairs);
        let mut note = None;
        let pcs_v = match pcs(&pos, &neg, cfg.pcs_subsets, cfg.seed.wrapping_add(ci as u64)) {
            Ok(v) => Some(v),
            Err(e) => {
                note = Some(e.to_string());
                None
            }
        };
        let msm_v = match msm(&pos) {
            Ok(v) => Some(v),
            Err(e) => {
                note.get_or_insert_with(|| e.to_string());
                None
            }
        };
        let cat_queries: Vec<AnalogyQuery> = queries.iter().filter(|q| q.category == ci).cloned().collect();
        let recovery = recovery_rates(&view, &cat_queries, &cfg.ks);
        merge_recovery(&mut agg_recovery, &recovery);
        let (_, cat_cov) = AnalogySet::from_categories(vec![set.categories[ci].clone()]).queries(vocab, cfg.multi_answer);
        categories.push(CategoryReport {
            name: res.name.clone(),
            pairs: res.total_pairs,
            pairs_in_vocab: res.pairs.len(),
            pcs: pcs_v,
            msm: msm_v,
            note,
            coverage: cat_cov,
            recovery,
        });
    }
    if agg_recovery.ks.is_empty() {
        agg_recovery = recovery_rates(&view, &[], &cfg.ks);
    }
    let stratified = match stats {
        Some(s) => Some(zeta_stratified_recovery(&view, s, &queries, &cfg.ks)?),
        None => None,
    };
    Ok(EvalReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        pcs_scoring: PCS_SCORING.into(),
        aggregate: Aggregate {
            pcs: mean_defined(categories.iter().map(|c| c.pcs)),
            msm: mean_defined(categories.iter().map(|c| c.msm)),
            coverage,
            recovery: agg_recovery,
        },
        categories,
        stratified,
        similarity: None,
        reference: ReferenceValues::default(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.3}"))
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::parse(e.column() as u64, e.to_string()))
    }

    /// Plain-text tables: analogy scores, recovery, stratified recovery, similarity.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let ks = &self.config.ks;
        let _ = writeln!(s, "{:<40} {:>7} {:>7} {:>9}", "category", "PCS", "MSM", "pairs");
        for c in &self.categories {
            let _ = writeln!(
                s,
                "{:<40} {:>7} {:>7} {:>4}/{:<4}",
                c.name,
                opt(c.pcs),
                opt(c.msm),
                c.pairs_in_vocab,
                c.pairs
            );
        }
        let _ = writeln!(
            s,
            "{:<40} {:>7} {:>7}   (reference {:.3} / {:.3})",
            "mean",
            opt(self.aggregate.pcs),
            opt(self.aggregate.msm),
            self.reference.pcs,
            self.reference.msm
        );
        let cov = &self.aggregate.coverage;
        let _ = writeln!(
            s,
            "\nquadruples: {} evaluated of {} ({} out of vocabulary, {} repeated word); answers: {:?}",
            cov.evaluated, cov.total, cov.out_of_vocabulary, cov.repeated_word, self.config.multi_answer
        );
        let _ = writeln!(s, "\n{:<14} {}", "recovery", ks.iter().map(|k| format!("{:>20}", format!("k={k}"))).collect::<String>());
        let rec = &self.aggregate.recovery;
        for (name, rates) in [("parallelogram", &rec.parallelogram), ("trapezoid", &rec.trapezoid)] {
            let _ = writeln!(s, "{:<14} {}", name, rates.iter().map(|r| format!("{:>20}", r.to_string())).collect::<String>());
        }
        if let Some(st) = &self.stratified {
            let _ = writeln!(
                s,
                "\ncollinear quadruples (|cos| >= {}): {} of {}",
                st.collinearity_threshold, st.collinear, st.queries
            );
            for stratum in [&st.near_one, &st.other] {
                let _ = writeln!(
                    s,
                    "{:<14} {}  [{}]",
                    stratum.label,
                    stratum.rates.iter().map(|r| format!("{:>20}", r.to_string())).collect::<String>(),
                    stratum.method
                );
            }
        }
        if let Some(sim) = &self.similarity {
            let _ = writeln!(
                s,
                "\nword similarity: spearman {:.3} over {}/{} pairs (reference {:.2})",
                sim.spearman, sim.used, sim.total, self.reference.wordsim
            );
        }
        s
    }
}
