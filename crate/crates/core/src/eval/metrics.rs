use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{cosine, Real};

pub const DEFAULT_PCS_SUBSETS: usize = 50;

/// Average ranks (1-based) with ties sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// ROC-AUC: probability that a positive outscores a negative, ties counting one half.
pub fn auc(pos: &[f64], neg: &[f64]) -> f64 {
    if pos.is_empty() || neg.is_empty() {
        return f64::NAN;
    }
    let all: Vec<f64> = pos.iter().chain(neg).copied().collect();
    let ranks = average_ranks(&all);
    let rank_sum: f64 = ranks[..pos.len()].iter().sum();
    let np = pos.len() as f64;
    let u = rank_sum - np * (np + 1.0) / 2.0;
    u / (np * neg.len() as f64)
}

/// Mean AUC of `pos` against `subsets` seeded uniform subsets of `neg` of size `|pos|`.
pub fn pcs_from_scores(pos: &[f64], neg: &[f64], subsets: usize, seed: u64) -> Result<f64> {
    if pos.len() < 2 {
        return Err(Error::InsufficientCoverage {
            found: pos.len(),
            needed: 2,
        });
    }
    if neg.len() < pos.len() {
        return Err(Error::InsufficientNegatives {
            needed: pos.len(),
            available: neg.len(),
        });
    }
    let s = subsets.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    let mut chosen = Vec::with_capacity(pos.len());
    for _ in 0..s {
        chosen.clear();
        chosen.extend(sample(&mut rng, neg.len(), pos.len()).into_iter().map(|i| neg[i]));
        total += auc(pos, &chosen);
    }
    Ok(total / s as f64)
}

/// Running mean, exact when all offsets are equal.
pub fn mean_vector<T: Real>(offsets: &[Vec<T>]) -> Vec<f64> {
    let dim = offsets.first().map_or(0, Vec::len);
    let mut m = vec![0.0; dim];
    for (n, o) in offsets.iter().enumerate() {
        let n = (n + 1) as f64;
        for (mi, &x) in m.iter_mut().zip(o) {
            *mi += (x.as_f64() - *mi) / n;
        }
    }
    m
}

fn to_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

fn mean_direction<T: Real>(pos: &[Vec<T>]) -> Result<Vec<f64>> {
    let m = mean_vector(pos);
    if m.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateMean);
    }
    Ok(m)
}

/// Score of an offset: cosine to the mean true offset. Zero offsets score 0.
pub fn offset_scores<T: Real>(offsets: &[Vec<T>], mean: &[f64]) -> Vec<f64> {
    offsets
        .iter()
        .map(|o| cosine(&to_f64(o), mean).unwrap_or(0.0))
        .collect()
}

/// Pairing consistency: expected AUC separating true from false offsets.
pub fn pcs<T: Real>(pos: &[Vec<T>], neg: &[Vec<T>], subsets: usize, seed: u64) -> Result<f64> {
    let mean = mean_direction(pos)?;
    pcs_from_scores(&offset_scores(pos, &mean), &offset_scores(neg, &mean), subsets, seed)
}

/// Mean cosine of the true offsets to their mean.
pub fn msm<T: Real>(pos: &[Vec<T>]) -> Result<f64> {
    if pos.is_empty() {
        return Err(Error::DegenerateMean);
    }
    let mean = mean_direction(pos)?;
    let mut total = 0.0;
    for o in pos {
        total += cosine(&to_f64(o), &mean).ok_or_else(|| Error::DegenerateVector("offset".into()))?;
    }
    Ok(total / pos.len() as f64)
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    crate::analysis::pearson(&average_ranks(x), &average_ranks(y))
}
