use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::hogwild::SharedRows;
use super::loss::triple_loss;
use super::sgd::{sample_negatives, sgd_group, GroupStats};
use crate::corpus::{CooccurrenceStore, IdCorpus, Vocabulary, OOV};
use crate::error::{Error, Result};
use crate::model::EmbeddingMatrix;
use crate::scalar::Real;

/// Newline-delimited progress record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub step: u64,
    pub epoch: usize,
    pub mean_loss: f64,
    pub learning_rate: f64,
    pub tokens_per_sec: f64,
}

pub type ProgressFn<'a> = &'a (dyn Fn(&ProgressRecord) + Sync);

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct EpochStats {
    /// Mean triple loss seen during the epoch, each measured just before its update.
    pub mean_loss: f64,
    /// Mean triple loss at the end of the epoch over a fixed seeded sample of
    /// events and negatives, comparable across epochs.
    pub objective: f64,
    pub triples: u64,
    pub active: u64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TrainStats {
    pub epochs: Vec<EpochStats>,
    /// Mean triple loss in each tenth of the run, by progress.
    pub decile_loss: Vec<f64>,
    pub tokens: u64,
    pub events: u64,
    pub triples: u64,
    pub elapsed_secs: f64,
    pub threads: usize,
}

impl TrainStats {
    pub fn tokens_per_sec(&self) -> f64 {
        rate(self.tokens, self.elapsed_secs)
    }

    pub fn updates_per_sec(&self) -> f64 {
        rate(self.triples, self.elapsed_secs)
    }
}

fn rate(n: u64, secs: f64) -> f64 {
    if secs > 0.0 {
        n as f64 / secs
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    stats: GroupStats,
    deciles: [(f64, u64); 10],
    events: u64,
}

impl Tally {
    fn add(&mut self, s: GroupStats, progress: f64) {
        let d = ((progress * 10.0) as usize).min(9);
        self.deciles[d].0 += s.loss;
        self.deciles[d].1 += s.triples;
        self.stats += s;
        self.events += 1;
    }

    fn merge(&mut self, o: &Tally) {
        self.stats += o.stats;
        self.events += o.events;
        for (a, b) in self.deciles.iter_mut().zip(&o.deciles) {
            a.0 += b.0;
            a.1 += b.1;
        }
    }
}

/// Shared state of one training run.
struct Run<'a, T> {
    rows: SharedRows<T>,
    cfg: &'a TrainConfig,
    vocab_size: usize,
    margin: T,
    /// Work units done so far, across threads; drives the learning rate.
    done: AtomicU64,
    total: u64,
    progress: Option<ProgressFn<'a>>,
    start: Instant,
}

impl<T: Real> Run<'_, T> {
    fn progress(&self) -> f64 {
        self.done.load(Ordering::Relaxed) as f64 / self.total.max(1) as f64
    }

    fn lr(&self) -> T {
        T::of(self.cfg.learning_rate_at(self.progress()))
    }

    fn event(&self, rng: &mut ChaCha8Rng, c: u32, w: u32, negs: &mut Vec<u32>, acc: &mut Vec<T>, tally: &mut Tally) {
        sample_negatives(rng, self.vocab_size, c, w, self.cfg.negatives, negs);
        let s = sgd_group(&self.rows, c, w, negs, self.margin, self.lr(), acc);
        tally.add(s, self.progress());
    }

    fn report(&self, epoch: usize, tally: &Tally, last: &mut u64, tokens: u64) {
        let Some(f) = self.progress else { return };
        let every = self.cfg.progress_every;
        if every == 0 || tally.events < *last + every {
            return;
        }
        *last = tally.events;
        let secs = self.start.elapsed().as_secs_f64();
        f(&ProgressRecord {
            step: tally.events,
            epoch,
            mean_loss: tally.stats.loss / tally.stats.triples.max(1) as f64,
            learning_rate: self.cfg.learning_rate_at(self.progress()),
            tokens_per_sec: rate(tokens, secs),
        });
    }
}

fn thread_seed(seed: u64, epoch: usize, thread: usize) -> u64 {
    seed ^ (epoch as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (thread as u64).wrapping_mul(0xd1b5_4a32_d192_ed03)
}

fn finish<T: Real>(
    run: Run<'_, T>,
    vocab: Arc<Vocabulary>,
    epochs: Vec<EpochStats>,
    total: Tally,
    tokens: u64,
) -> Result<(EmbeddingMatrix<T>, TrainStats)> {
    let elapsed = run.start.elapsed().as_secs_f64();
    let threads = run.cfg.threads;
    let dim = run.cfg.dim;
    let m = EmbeddingMatrix::from_rows(vocab, dim, run.rows.into_inner())?;
    let stats = TrainStats {
        epochs,
        decile_loss: total
            .deciles
            .iter()
            .map(|&(l, n)| if n > 0 { l / n as f64 } else { f64::NAN })
            .collect(),
        tokens,
        events: total.events,
        triples: total.stats.triples,
        elapsed_secs: elapsed,
        threads,
    };
    Ok((m, stats))
}

/// Events drawn for the end-of-epoch objective.
const OBJECTIVE_EVENTS: usize = 4096;

fn objective_seed(seed: u64) -> u64 {
    seed ^ 0x5851_f42d_4c95_7f2d
}

/// `(c, w, w')` triples from `events`, with negatives drawn as in training.
fn objective_triples(events: &[(u32, u32)], vocab_size: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<(u32, u32, u32)> {
    let mut negs = Vec::with_capacity(k);
    let mut out = Vec::with_capacity(events.len() * k);
    for &(c, w) in events {
        sample_negatives(rng, vocab_size, c, w, k, &mut negs);
        out.extend(negs.iter().map(|&n| (c, w, n)));
    }
    out
}

/// Uniform draws from the windowed position pairs of `corpus`, in random orientation.
fn stream_objective_sample(corpus: &IdCorpus, cfg: &TrainConfig, vocab_size: usize) -> Vec<(u32, u32, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(objective_seed(cfg.seed));
    let lines: Vec<&[u32]> = corpus.lines().collect();
    let mut ends = Vec::with_capacity(lines.len());
    let mut total = 0usize;
    for l in &lines {
        total += l.len();
        ends.push(total);
    }
    let mut events = Vec::with_capacity(OBJECTIVE_EVENTS);
    if total == 0 {
        return Vec::new();
    }
    for _ in 0..OBJECTIVE_EVENTS * 1000 {
        if events.len() == OBJECTIVE_EVENTS {
            break;
        }
        let pos = rng.random_range(0..total);
        let li = ends.partition_point(|&e| e <= pos);
        let line = lines[li];
        let t = pos - (ends[li] - line.len());
        let u = t + rng.random_range(1..=cfg.window);
        if u >= line.len() || line[t] == OOV || line[u] == OOV {
            continue;
        }
        events.push(if rng.random::<bool>() { (line[t], line[u]) } else { (line[u], line[t]) });
    }
    objective_triples(&events, vocab_size, cfg.negatives, &mut rng)
}

fn count_objective_sample(events: &[(u32, u32)], cfg: &TrainConfig, vocab_size: usize) -> Vec<(u32, u32, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(objective_seed(cfg.seed));
    let drawn: Vec<(u32, u32)> = (0..OBJECTIVE_EVENTS.min(events.len()))
        .map(|_| events[rng.random_range(0..events.len())])
        .collect();
    objective_triples(&drawn, vocab_size, cfg.negatives, &mut rng)
}

impl<T: Real> Run<'_, T> {
    /// Mean hinge loss over `sample`; NaN when nothing can be scored.
    fn objective(&self, sample: &[(u32, u32, u32)]) -> f64 {
        let (mut sum, mut n) = (0.0, 0usize);
        for &(c, w, neg) in sample {
            // SAFETY: called between epochs, when no worker thread is running
            let row = |i: u32| unsafe { std::slice::from_raw_parts(self.rows.row_ptr(i), self.cfg.dim) };
            if let Ok(l) = triple_loss(row(c), row(w), row(neg), self.margin) {
                sum += l.as_f64();
                n += 1;
            }
        }
        if n == 0 {
            f64::NAN
        } else {
            sum / n as f64
        }
    }
}

fn epoch_stats(t: &Tally, objective: f64) -> EpochStats {
    EpochStats {
        objective,
        mean_loss: t.stats.loss / t.stats.triples.max(1) as f64,
        triples: t.stats.triples,
        active: t.stats.active,
    }
}

/// Train by streaming the corpus: every windowed co-occurrence of positions
/// holding `i` and `j` yields the events `(i, j)` and `(j, i)`, so each pair
/// is visited in proportion to `#(i, j)`.
pub fn train<T: Real>(
    corpus: &IdCorpus,
    vocab: Arc<Vocabulary>,
    cfg: &TrainConfig,
) -> Result<(EmbeddingMatrix<T>, TrainStats)> {
    train_with_progress(corpus, vocab, cfg, None)
}

pub fn train_with_progress<T: Real>(
    corpus: &IdCorpus,
    vocab: Arc<Vocabulary>,
    cfg: &TrainConfig,
    progress: Option<ProgressFn<'_>>,
) -> Result<(EmbeddingMatrix<T>, TrainStats)> {
    cfg.validate()?;
    let in_vocab = corpus.num_in_vocab() as u64;
    if in_vocab == 0 || vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let init = EmbeddingMatrix::<T>::init(vocab.clone(), cfg.dim, cfg.seed)?;
    let run = Run {
        rows: SharedRows::new(init.into_vec(), cfg.dim),
        cfg,
        vocab_size: vocab.len(),
        margin: T::of(cfg.margin),
        done: AtomicU64::new(0),
        total: in_vocab * cfg.epochs as u64,
        progress,
        start: Instant::now(),
    };
    let sample = stream_objective_sample(corpus, cfg, vocab.len());
    let shards = if cfg.threads > 1 {
        corpus.shards(cfg.threads)
    } else {
        Vec::new()
    };

    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut total = Tally::default();
    for epoch in 0..cfg.epochs {
        let tally = if cfg.threads == 1 {
            stream_shard(&run, corpus, epoch, 0)
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = shards
                    .iter()
                    .enumerate()
                    .map(|(t, shard)| {
                        let run = &run;
                        s.spawn(move || stream_shard(run, shard, epoch, t))
                    })
                    .collect();
                let mut t = Tally::default();
                for h in handles {
                    t.merge(&h.join().expect("training thread panicked"));
                }
                t
            })
        };
        epochs.push(epoch_stats(&tally, run.objective(&sample)));
        total.merge(&tally);
    }
    finish(run, vocab, epochs, total, in_vocab * cfg.epochs as u64)
}

fn stream_shard<T: Real>(run: &Run<'_, T>, shard: &IdCorpus, epoch: usize, thread: usize) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(thread_seed(run.cfg.seed, epoch, thread));
    let mut negs = Vec::with_capacity(run.cfg.negatives);
    let mut acc = Vec::with_capacity(run.cfg.dim);
    let mut tally = Tally::default();
    let mut last = 0;
    let mut tokens = 0u64;
    let window = run.cfg.window;
    for line in shard.lines() {
        for (t, &i) in line.iter().enumerate() {
            if i == OOV {
                continue;
            }
            for &j in line.iter().skip(t + 1).take(window) {
                if j == OOV {
                    continue;
                }
                run.event(&mut rng, i, j, &mut negs, &mut acc, &mut tally);
                run.event(&mut rng, j, i, &mut negs, &mut acc, &mut tally);
            }
            tokens += 1;
            run.done.fetch_add(1, Ordering::Relaxed);
        }
        if thread == 0 {
            run.report(epoch, &tally, &mut last, tokens);
        }
    }
    tally
}

/// Train directly from aggregated counts. Each epoch visits every ordered
/// event `(i, j)` exactly `#(i, j)` times in a seeded random order.
pub fn train_from_counts<T: Real>(
    store: &CooccurrenceStore,
    vocab: Arc<Vocabulary>,
    cfg: &TrainConfig,
) -> Result<(EmbeddingMatrix<T>, TrainStats)> {
    train_from_counts_with_progress(store, vocab, cfg, None)
}

pub fn train_from_counts_with_progress<T: Real>(
    store: &CooccurrenceStore,
    vocab: Arc<Vocabulary>,
    cfg: &TrainConfig,
    progress: Option<ProgressFn<'_>>,
) -> Result<(EmbeddingMatrix<T>, TrainStats)> {
    cfg.validate()?;
    if store.vocab_size() != vocab.len() {
        return Err(Error::Incompatible(format!(
            "store covers {} words, vocabulary has {}",
            store.vocab_size(),
            vocab.len()
        )));
    }
    let mut events: Vec<(u32, u32)> = Vec::with_capacity(store.total_mass() as usize);
    for (i, j, c) in store.sorted_entries() {
        if i == j {
            events.extend(std::iter::repeat_n((i, i), c as usize));
        } else {
            events.extend(std::iter::repeat_n((i, j), c as usize));
            events.extend(std::iter::repeat_n((j, i), c as usize));
        }
    }
    if events.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let sample = count_objective_sample(&events, cfg, vocab.len());
    let init = EmbeddingMatrix::<T>::init(vocab.clone(), cfg.dim, cfg.seed)?;
    let run = Run {
        rows: SharedRows::new(init.into_vec(), cfg.dim),
        cfg,
        vocab_size: vocab.len(),
        margin: T::of(cfg.margin),
        done: AtomicU64::new(0),
        total: events.len() as u64 * cfg.epochs as u64,
        progress,
        start: Instant::now(),
    };
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut total = Tally::default();
    for epoch in 0..cfg.epochs {
        let mut order_rng = ChaCha8Rng::seed_from_u64(thread_seed(cfg.seed, epoch, usize::MAX));
        events.shuffle(&mut order_rng);
        let tally = if cfg.threads == 1 {
            count_shard(&run, &events, epoch, 0)
        } else {
            let per = events.len().div_ceil(cfg.threads);
            std::thread::scope(|s| {
                let handles: Vec<_> = events
                    .chunks(per)
                    .enumerate()
                    .map(|(t, chunk)| {
                        let run = &run;
                        s.spawn(move || count_shard(run, chunk, epoch, t))
                    })
                    .collect();
                let mut t = Tally::default();
                for h in handles {
                    t.merge(&h.join().expect("training thread panicked"));
                }
                t
            })
        };
        epochs.push(epoch_stats(&tally, run.objective(&sample)));
        total.merge(&tally);
    }
    let tokens = total.events;
    finish(run, vocab, epochs, total, tokens)
}

fn count_shard<T: Real>(run: &Run<'_, T>, events: &[(u32, u32)], epoch: usize, thread: usize) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(thread_seed(run.cfg.seed, epoch, thread));
    let mut negs = Vec::with_capacity(run.cfg.negatives);
    let mut acc = Vec::with_capacity(run.cfg.dim);
    let mut tally = Tally::default();
    let mut last = 0;
    for &(c, w) in events {
        run.event(&mut rng, c, w, &mut negs, &mut acc, &mut tally);
        run.done.fetch_add(1, Ordering::Relaxed);
        if thread == 0 {
            run.report(epoch, &tally, &mut last, tally.events);
        }
    }
    tally
}

/// Absolute training throughput of one timed run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub threads: usize,
    pub tokens: u64,
    pub updates: u64,
    pub seconds: f64,
    pub tokens_per_sec: f64,
    pub updates_per_sec: f64,
}

/// Time one streaming training pass. A corpus without in-vocabulary tokens
/// reports zero work instead of failing.
pub fn throughput_benchmark<T: Real>(
    corpus: &IdCorpus,
    vocab: Arc<Vocabulary>,
    cfg: &TrainConfig,
) -> Result<ThroughputReport> {
    cfg.validate()?;
    match train::<T>(corpus, vocab, cfg) {
        Ok((_, s)) => Ok(ThroughputReport {
            threads: cfg.threads,
            tokens: s.tokens,
            updates: s.triples,
            seconds: s.elapsed_secs,
            tokens_per_sec: s.tokens_per_sec(),
            updates_per_sec: s.updates_per_sec(),
        }),
        Err(Error::EmptyCorpus) => Ok(ThroughputReport {
            threads: cfg.threads,
            tokens: 0,
            updates: 0,
            seconds: 0.0,
            tokens_per_sec: 0.0,
            updates_per_sec: 0.0,
        }),
        Err(e) => Err(e),
    }
}
