use std::path::Path;

use super::metrics::spearman;
use crate::error::{Error, Result};
use crate::model::EmbeddingMatrix;
use crate::scalar::{cosine, Real};

pub const MIN_SIMILARITY_PAIRS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityPair {
    pub a: String,
    pub b: String,
    pub score: f64,
}

/// Parse `word1 word2 score` records separated by tabs, commas or spaces.
/// Lines starting with `#` are comments; a first record whose score does
/// not parse is taken as a header.
pub fn parse_similarity(text: &str) -> Result<Vec<SimilarityPair>> {
    let mut out = Vec::new();
    let mut offset = 0u64;
    let mut first = true;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len() as u64;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if t.contains('\t') {
            t.split('\t').map(str::trim).collect()
        } else if t.contains(',') {
            t.split(',').map(str::trim).collect()
        } else {
            t.split_whitespace().collect()
        };
        let header = first;
        first = false;
        if fields.len() < 3 {
            if header {
                continue;
            }
            return Err(Error::parse(start, "expected \"word1 word2 score\""));
        }
        match fields[2].parse::<f64>() {
            Ok(score) if score.is_finite() => out.push(SimilarityPair {
                a: fields[0].to_lowercase(),
                b: fields[1].to_lowercase(),
                score,
            }),
            _ if header => {}
            _ => return Err(Error::parse(start, format!("bad score {:?}", fields[2]))),
        }
    }
    Ok(out)
}

pub fn load_similarity(path: impl AsRef<Path>) -> Result<Vec<SimilarityPair>> {
    parse_similarity(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimilarityReport {
    pub spearman: f64,
    pub used: usize,
    pub total: usize,
}

/// Spearman correlation of human scores with embedding cosines over the
/// pairs whose words both have non-degenerate vectors.
pub fn word_similarity<T: Real>(m: &EmbeddingMatrix<T>, pairs: &[SimilarityPair]) -> Result<SimilarityReport> {
    let (mut human, mut model) = (Vec::new(), Vec::new());
    for p in pairs {
        let (Some(a), Some(b)) = (m.vector(&p.a), m.vector(&p.b)) else {
            continue;
        };
        if let Some(c) = cosine(a, b) {
            human.push(p.score);
            model.push(c.as_f64());
        }
    }
    if human.len() < MIN_SIMILARITY_PAIRS {
        return Err(Error::InsufficientCoverage {
            found: human.len(),
            needed: MIN_SIMILARITY_PAIRS,
        });
    }
    // constant scores on either side have no defined rank correlation
    let rho = spearman(&human, &model).unwrap_or(0.0);
    Ok(SimilarityReport {
        spearman: rho,
        used: human.len(),
        total: pairs.len(),
    })
}
