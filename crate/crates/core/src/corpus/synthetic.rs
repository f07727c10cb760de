//! Seeded synthetic corpora with Zipfian unigram statistics and latent topic
//! structure, for desk-scale training runs and benchmarks.

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct ZipfCorpusConfig {
    pub vocab_size: usize,
    pub tokens: usize,
    /// Zipf exponent of the unigram distribution.
    pub exponent: f64,
    /// Number of latent topics; each line draws one.
    pub topics: usize,
    /// Probability that a token is drawn from the line's topic instead of the
    /// global distribution.
    pub topic_weight: f64,
    pub line_len: usize,
    pub seed: u64,
}

impl Default for ZipfCorpusConfig {
    fn default() -> Self {
        ZipfCorpusConfig {
            vocab_size: 2000,
            tokens: 1_000_000,
            exponent: 1.0,
            topics: 20,
            topic_weight: 0.6,
            line_len: 40,
            seed: 7,
        }
    }
}

pub fn zipf_word(rank: usize) -> String {
    format!("w{rank}")
}

/// Generate lines of space-separated tokens. Word `w{r}` has unigram weight
/// proportional to `(r+1)^-exponent` and belongs to topic `r % topics`.
pub fn zipf_corpus(cfg: &ZipfCorpusConfig) -> Vec<String> {
    zipf_ranks(cfg)
        .into_iter()
        .map(|line| {
            let mut s = String::with_capacity(line.len() * 6);
            for (k, r) in line.into_iter().enumerate() {
                if k > 0 {
                    s.push(' ');
                }
                s.push_str(&zipf_word(r));
            }
            s
        })
        .collect()
}

/// Same stream as [`zipf_corpus`], as word ranks.
pub fn zipf_ranks(cfg: &ZipfCorpusConfig) -> Vec<Vec<usize>> {
    assert!(cfg.vocab_size > 0 && cfg.line_len > 0);
    let topics = cfg.topics.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weight = |r: usize| ((r + 1) as f64).powf(-cfg.exponent);
    let global = WeightedIndex::new((0..cfg.vocab_size).map(weight)).expect("weights");
    let topic_members: Vec<Vec<usize>> = (0..topics)
        .map(|t| (t..cfg.vocab_size).step_by(topics).collect())
        .collect();
    let topic_dists: Vec<Option<WeightedIndex<f64>>> = topic_members
        .iter()
        .map(|m| WeightedIndex::new(m.iter().map(|&r| weight(r))).ok())
        .collect();

    let mut lines = Vec::with_capacity(cfg.tokens / cfg.line_len + 1);
    let mut remaining = cfg.tokens;
    while remaining > 0 {
        let len = cfg.line_len.min(remaining);
        let t = rng.random_range(0..topics);
        let line = (0..len)
            .map(|_| match &topic_dists[t] {
                Some(d) if rng.random_bool(cfg.topic_weight) => topic_members[t][d.sample(&mut rng)],
                _ => global.sample(&mut rng),
            })
            .collect();
        lines.push(line);
        remaining -= len;
    }
    lines
}
