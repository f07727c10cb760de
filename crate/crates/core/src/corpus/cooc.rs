use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::vocab::{IdCorpus, Vocabulary, OOV};
use crate::error::{Error, Result};

#[inline]
fn pack(i: u32, j: u32) -> u64 {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    ((lo as u64) << 32) | hi as u64
}

#[inline]
fn unpack(key: u64) -> (u32, u32) {
    ((key >> 32) as u32, key as u32)
}

/// Sparse symmetric co-occurrence counts `#(i,j)`.
///
/// Each unordered pair is stored once under `(min, max)`; both directions are
/// answered from the same cell. A diagonal cell `#(i,i)` holds both directed
/// increments, so `Σ_j #(i,j)` over all `j` (diagonal counted once) equals the
/// row sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CooccurrenceStore {
    pairs: FxHashMap<u64, u64>,
    window: u32,
    vocab_size: usize,
    row_sums: Vec<u64>,
}

impl CooccurrenceStore {
    pub fn new(vocab_size: usize, window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidWindow(window));
        }
        Ok(CooccurrenceStore {
            pairs: FxHashMap::default(),
            window: window as u32,
            vocab_size,
            row_sums: vec![0; vocab_size],
        })
    }

    /// Record one windowed co-occurrence event between positions holding `i` and `j`:
    /// increments `#(i,j)` and `#(j,i)` by one each.
    #[inline]
    pub fn add_event(&mut self, i: u32, j: u32) {
        self.add_count(i, j, 1);
    }

    /// Add `n` events between `i` and `j`.
    pub fn add_count(&mut self, i: u32, j: u32, n: u64) {
        if n == 0 {
            return;
        }
        let inc = if i == j { 2 * n } else { n };
        *self.pairs.entry(pack(i, j)).or_insert(0) += inc;
        self.row_sums[i as usize] += n;
        self.row_sums[j as usize] += n;
    }

    /// Set the symmetric cell `#(i,j) = #(j,i)` to exactly `count`. For `i == j`
    /// the count must be even.
    pub fn set(&mut self, i: u32, j: u32, count: u64) {
        debug_assert!(i != j || count.is_multiple_of(2));
        let key = pack(i, j);
        let old = self.pairs.get(&key).copied().unwrap_or(0);
        if count == 0 {
            self.pairs.remove(&key);
        } else {
            self.pairs.insert(key, count);
        }
        if i == j {
            self.row_sums[i as usize] = self.row_sums[i as usize] - old + count;
        } else {
            self.row_sums[i as usize] = self.row_sums[i as usize] - old + count;
            self.row_sums[j as usize] = self.row_sums[j as usize] - old + count;
        }
    }

    #[inline]
    pub fn get(&self, i: u32, j: u32) -> u64 {
        self.pairs.get(&pack(i, j)).copied().unwrap_or(0)
    }

    pub fn window(&self) -> usize {
        self.window as usize
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Number of stored unordered pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn row_sum(&self, i: u32) -> u64 {
        self.row_sums[i as usize]
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    /// `Σ_{i,j} #(i,j)` over ordered pairs.
    pub fn total_mass(&self) -> u64 {
        self.row_sums.iter().sum()
    }

    /// Stored cells as `(i, j, count)` with `i <= j`, sorted by `(i, j)`.
    pub fn sorted_entries(&self) -> Vec<(u32, u32, u64)> {
        let mut out: Vec<_> = self
            .pairs
            .iter()
            .map(|(&k, &c)| {
                let (i, j) = unpack(k);
                (i, j, c)
            })
            .collect();
        out.sort_unstable_by_key(|&(i, j, _)| (i, j));
        out
    }

    /// Add another partial store into this one.
    pub fn merge(&mut self, other: &CooccurrenceStore) -> Result<()> {
        if other.window != self.window || other.vocab_size != self.vocab_size {
            return Err(Error::Incompatible(format!(
                "cannot merge store (|W|={}, Δ={}) into (|W|={}, Δ={})",
                other.vocab_size, other.window, self.vocab_size, self.window
            )));
        }
        for (&k, &c) in &other.pairs {
            *self.pairs.entry(k).or_insert(0) += c;
        }
        for (a, b) in self.row_sums.iter_mut().zip(&other.row_sums) {
            *a += b;
        }
        Ok(())
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> CooccurrenceStore {
        let mut out = self.clone();
        for c in out.pairs.values_mut() {
            *c *= factor;
        }
        for r in &mut out.row_sums {
            *r *= factor;
        }
        out
    }

    /// Compressed per-row adjacency with both directions materialized.
    pub fn rows(&self) -> CooccurrenceRows {
        CooccurrenceRows::from_store(self)
    }

    pub(crate) fn from_parts(
        vocab_size: usize,
        window: usize,
        entries: impl IntoIterator<Item = (u32, u32, u64)>,
    ) -> Result<Self> {
        let mut s = CooccurrenceStore::new(vocab_size, window)?;
        for (i, j, c) in entries {
            s.set(i, j, c);
        }
        Ok(s)
    }
}

/// Row-major view of a store: for each word, its nonzero columns in ascending order.
#[derive(Clone, Debug)]
pub struct CooccurrenceRows {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
}

impl CooccurrenceRows {
    fn from_store(store: &CooccurrenceStore) -> Self {
        let n = store.vocab_size;
        let mut degree = vec![0usize; n];
        for &k in store.pairs.keys() {
            let (i, j) = unpack(k);
            degree[i as usize] += 1;
            if i != j {
                degree[j as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let nnz = *offsets.last().unwrap();
        let mut cols = vec![0u32; nnz];
        let mut counts = vec![0u64; nnz];
        let mut fill = offsets[..n].to_vec();
        for (&k, &c) in &store.pairs {
            let (i, j) = unpack(k);
            cols[fill[i as usize]] = j;
            counts[fill[i as usize]] = c;
            fill[i as usize] += 1;
            if i != j {
                cols[fill[j as usize]] = i;
                counts[fill[j as usize]] = c;
                fill[j as usize] += 1;
            }
        }
        for r in 0..n {
            let (s, e) = (offsets[r], offsets[r + 1]);
            let mut idx: Vec<usize> = (s..e).collect();
            idx.sort_unstable_by_key(|&p| cols[p]);
            let c: Vec<u32> = idx.iter().map(|&p| cols[p]).collect();
            let v: Vec<u64> = idx.iter().map(|&p| counts[p]).collect();
            cols[s..e].copy_from_slice(&c);
            counts[s..e].copy_from_slice(&v);
        }
        CooccurrenceRows {
            offsets,
            cols,
            counts,
            row_sums: store.row_sums.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Columns and counts of row `i`, sorted by column.
    pub fn row(&self, i: u32) -> (&[u32], &[u64]) {
        let (s, e) = (self.offsets[i as usize], self.offsets[i as usize + 1]);
        (&self.cols[s..e], &self.counts[s..e])
    }

    pub fn row_sum(&self, i: u32) -> u64 {
        self.row_sums[i as usize]
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }
}

fn count_into(store: &mut CooccurrenceStore, corpus: &IdCorpus) {
    let window = store.window as usize;
    for line in corpus.lines() {
        for (t, &i) in line.iter().enumerate() {
            if i == OOV {
                continue;
            }
            for &j in line.iter().skip(t + 1).take(window) {
                if j != OOV {
                    store.add_event(i, j);
                }
            }
        }
    }
}

/// Count windowed co-occurrences. Out-of-vocabulary positions occupy the
/// window but produce no counts; windows never cross line boundaries.
pub fn count_cooccurrences(
    corpus: &IdCorpus,
    vocab: &Vocabulary,
    window: usize,
) -> Result<CooccurrenceStore> {
    let mut store = CooccurrenceStore::new(vocab.len(), window)?;
    count_into(&mut store, corpus);
    Ok(store)
}

/// Parallel counting over `shards` contiguous line ranges followed by a merge.
/// The result equals [`count_cooccurrences`] for any shard count.
pub fn count_cooccurrences_sharded(
    corpus: &IdCorpus,
    vocab: &Vocabulary,
    window: usize,
    shards: usize,
) -> Result<CooccurrenceStore> {
    let empty = CooccurrenceStore::new(vocab.len(), window)?;
    let parts: Vec<CooccurrenceStore> = corpus
        .shards(shards)
        .par_iter()
        .map(|shard| {
            let mut s = empty.clone();
            count_into(&mut s, shard);
            s
        })
        .collect();
    let mut merged = empty;
    for p in &parts {
        merged.merge(p)?;
    }
    Ok(merged)
}
