use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cvector::CooccurrenceStats;
use crate::error::{Error, Result};
use crate::model::{EmbeddingMatrix, NormalizedView};
use crate::scalar::{cosine, Real};

/// Stationarity diagnostics of a trained matrix against the counts it was trained on.
pub struct EmbeddingDiagnostics<'a, T> {
    matrix: &'a EmbeddingMatrix<T>,
    stats: &'a CooccurrenceStats<'a>,
    view: NormalizedView<T>,
    mean: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    /// Population statistics; quartiles by linear interpolation.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Summary::default();
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        Summary {
            n,
            mean,
            std: var.sqrt(),
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[n - 1],
        }
    }

    /// `std / |mean|`
    pub fn cv(&self) -> f64 {
        self.std / self.mean.abs()
    }
}

pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Pearson correlation; `None` if either side is constant or fewer than two points.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Log-log fit of vector norm against word frequency, `‖v_c‖ ∝ #(c)^(1/β)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormFrequencyFit {
    pub n: usize,
    pub pearson: f64,
    pub slope: f64,
    pub intercept: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResidualReport {
    pub words: usize,
    pub skipped: usize,
    pub threshold: f64,
    pub above_threshold: usize,
    pub summary: Summary,
}

impl ResidualReport {
    pub fn fraction_above(&self) -> f64 {
        if self.words == 0 {
            0.0
        } else {
            self.above_threshold as f64 / self.words as f64
        }
    }
}

impl<'a, T: Real> EmbeddingDiagnostics<'a, T> {
    pub fn new(matrix: &'a EmbeddingMatrix<T>, stats: &'a CooccurrenceStats<'a>) -> Result<Self> {
        if matrix.len() != stats.vocab().len() {
            return Err(Error::Incompatible(format!(
                "matrix has {} rows, vocabulary has {} words",
                matrix.len(),
                stats.vocab().len()
            )));
        }
        let view = matrix.normalized();
        let dim = matrix.dim();
        let mut mean = vec![0.0; dim];
        let mut n = 0usize;
        for id in 0..view.len() as u32 {
            if view.is_degenerate(id) {
                continue;
            }
            n += 1;
            for (m, &x) in mean.iter_mut().zip(view.row(id)) {
                *m += x.as_f64();
            }
        }
        if n > 0 {
            mean.iter_mut().for_each(|m| *m /= n as f64);
        }
        Ok(EmbeddingDiagnostics {
            matrix,
            stats,
            view,
            mean,
        })
    }

    /// Mean of the unit vectors over all non-degenerate words.
    pub fn mean_unit(&self) -> &[f64] {
        &self.mean
    }

    /// `Σ_w (#(c,w)/#(c)) v̂_w − mean_w' v̂_w'`
    pub fn fixed_point_target(&self, word: u32) -> Result<Vec<f64>> {
        let vocab = self.stats.vocab();
        if word as usize >= vocab.len() {
            return Err(Error::UnknownWord(format!("#{word}")));
        }
        let total = self.stats.total(word);
        if total == 0 {
            return Err(Error::DegenerateWord(vocab.word(word).to_owned()));
        }
        let mut t: Vec<f64> = self.mean.iter().map(|m| -m).collect();
        let (cols, counts) = self.stats.rows().row(word);
        for (&w, &c) in cols.iter().zip(counts) {
            let p = c as f64 / total as f64;
            for (ti, &x) in t.iter_mut().zip(self.view.row(w)) {
                *ti += p * x.as_f64();
            }
        }
        Ok(t)
    }

    fn unit(&self, word: u32) -> Result<Vec<f64>> {
        if self.view.is_degenerate(word) {
            return Err(Error::DegenerateWord(self.stats.vocab().word(word).to_owned()));
        }
        Ok(self.view.row(word).iter().map(|x| x.as_f64()).collect())
    }

    /// Cosine between `v_c` and its fixed-point target.
    pub fn fixed_point_residual(&self, word: u32) -> Result<f64> {
        let v = self.unit(word)?;
        let t = self.fixed_point_target(word)?;
        cosine(&v, &t).ok_or_else(|| Error::DegenerateWord(self.stats.vocab().word(word).to_owned()))
    }

    /// `γ_c = |v̂_c · (Σ_w p(w|c) v̂_w − mean v̂)|`
    pub fn gamma(&self, word: u32) -> Result<f64> {
        let v = self.unit(word)?;
        let t = self.fixed_point_target(word)?;
        Ok(crate::scalar::dot(&v, &t).abs())
    }

    /// Residuals over `words`, skipping (and counting) degenerate ones.
    pub fn residuals(&self, words: &[u32], threshold: f64) -> ResidualReport {
        let mut values = Vec::with_capacity(words.len());
        let mut skipped = 0;
        for &w in words {
            match self.fixed_point_residual(w) {
                Ok(r) => values.push(r),
                Err(_) => skipped += 1,
            }
        }
        ResidualReport {
            words: values.len(),
            skipped,
            threshold,
            above_threshold: values.iter().filter(|&&r| r >= threshold).count(),
            summary: Summary::of(&values),
        }
    }

    /// Words whose occurrence count is strictly above the median count.
    pub fn above_median_frequency(&self) -> Vec<u32> {
        let counts = self.frequencies();
        let mut sorted = counts.clone();
        sorted.sort_unstable();
        if sorted.is_empty() {
            return Vec::new();
        }
        let median = quantile(&sorted.iter().map(|&c| c as f64).collect::<Vec<_>>(), 0.5);
        (0..counts.len() as u32)
            .filter(|&w| counts[w as usize] as f64 > median)
            .collect()
    }

    /// `γ_c` over up to `sample_size` uniformly sampled non-degenerate words.
    pub fn gamma_stats(&self, sample_size: usize, seed: u64) -> (Summary, Vec<f64>) {
        let eligible: Vec<u32> = (0..self.view.len() as u32)
            .filter(|&w| !self.view.is_degenerate(w) && self.stats.total(w) > 0)
            .collect();
        let n = sample_size.min(eligible.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<u32> = sample(&mut rng, eligible.len(), n)
            .into_iter()
            .map(|i| eligible[i])
            .collect();
        picked.sort_unstable();
        let values: Vec<f64> = picked.iter().filter_map(|&w| self.gamma(w).ok()).collect();
        (Summary::of(&values), values)
    }

    /// Occurrence counts from the vocabulary, or row sums where those are unknown.
    fn frequencies(&self) -> Vec<u64> {
        let vocab = self.stats.vocab();
        if vocab.counts().iter().any(|&c| c > 0) {
            vocab.counts().to_vec()
        } else {
            self.stats.rows().row_sums().to_vec()
        }
    }

    /// Regress `log ‖v_c‖` on `log #(c)` over words with positive count and norm.
    pub fn norm_frequency(&self) -> Option<NormFrequencyFit> {
        let counts = self.frequencies();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (w, &c) in counts.iter().enumerate() {
            let n = self.matrix.norm(w as u32).as_f64();
            if c > 0 && n > 0.0 && n.is_finite() {
                x.push((c as f64).ln());
                y.push(n.ln());
            }
        }
        let r = pearson(&x, &y)?;
        let k = x.len() as f64;
        let mx = x.iter().sum::<f64>() / k;
        let my = y.iter().sum::<f64>() / k;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let slope = sxy / sxx;
        Some(NormFrequencyFit {
            n: x.len(),
            pearson: r,
            slope,
            intercept: my - slope * mx,
            beta: 1.0 / slope,
        })
    }
}
