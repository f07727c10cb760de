use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Marker id for tokens that did not make it into the vocabulary.
pub const OOV: u32 = u32::MAX;

/// Lowercased whitespace tokenization.
pub fn tokenize(line: &str) -> impl Iterator<Item = String> + '_ {
    line.split_whitespace().map(str::to_lowercase)
}

/// Bidirectional word/id map with occurrence counts.
///
/// Ids are assigned by descending count, ties broken lexicographically, so the
/// id order is a pure function of the token multiset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, u32>,
    counts: Vec<u64>,
    total_tokens: u64,
    min_count: u64,
}

impl Vocabulary {
    /// Count a token stream and keep every token seen at least `min_count` times.
    pub fn build<I, S>(tokens: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut total = 0u64;
        for tok in tokens {
            let tok = tok.as_ref();
            total += 1;
            if let Some(c) = counts.get_mut(tok) {
                *c += 1;
            } else {
                counts.insert(tok.to_owned(), 1);
            }
        }
        if total == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self::from_counts(counts, total, min_count))
    }

    /// Build from a line-oriented corpus, tokenizing with [`tokenize`].
    pub fn from_reader<R: BufRead>(reader: R, min_count: u64) -> Result<Self> {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut total = 0u64;
        for line in reader.lines() {
            for tok in tokenize(&line?) {
                total += 1;
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
        if total == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self::from_counts(counts, total, min_count))
    }

    /// Assemble a vocabulary from precomputed counts. Entries below `min_count`
    /// are dropped but still contribute to `total_tokens`.
    pub fn from_counts<I>(counts: I, total_tokens: u64, min_count: u64) -> Self
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut kept: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count && *c > 0)
            .collect();
        kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (words, counts): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
        Self::assemble(words, counts, total_tokens, min_count)
    }

    /// Vocabulary with a fixed id order and unknown counts (all zero), e.g. for
    /// embeddings read from a third-party text file.
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        let counts = vec![0; words.len()];
        let v = Self::assemble(words, counts, 0, 0);
        if v.ids.len() != v.words.len() {
            return Err(Error::Incompatible("duplicate word in word list".into()));
        }
        Ok(v)
    }

    /// Words and counts in id order, as read back from a vocabulary file.
    pub(crate) fn from_ordered(words: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        let total = counts.iter().sum();
        let min = counts.iter().copied().min().unwrap_or(0);
        let v = Self::assemble(words, counts, total, min);
        if v.ids.len() != v.words.len() {
            return Err(Error::Incompatible("duplicate word in vocabulary".into()));
        }
        Ok(v)
    }

    fn assemble(words: Vec<String>, counts: Vec<u64>, total_tokens: u64, min_count: u64) -> Self {
        let ids = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Vocabulary {
            words,
            ids,
            counts,
            total_tokens,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Tokens of the source corpus that fell below `min_count`.
    pub fn discarded_tokens(&self) -> u64 {
        self.total_tokens - self.counts.iter().sum::<u64>()
    }

    /// FNV-1a over the id-ordered word list. Two files built against the same
    /// vocabulary carry the same hash.
    pub fn content_hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for w in &self.words {
            for &b in w.as_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
            h ^= 0xff;
            h = h.wrapping_mul(PRIME);
        }
        h
    }
}

/// A tokenized corpus mapped to vocabulary ids. Out-of-vocabulary tokens keep
/// their position as [`OOV`]; line boundaries are preserved because windows
/// never span lines.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdCorpus {
    ids: Vec<u32>,
    line_ends: Vec<usize>,
}

impl IdCorpus {
    pub fn from_lines<I, S>(lines: I, vocab: &Vocabulary) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut corpus = IdCorpus::default();
        for line in lines {
            corpus.push_line(line.as_ref(), vocab);
        }
        corpus
    }

    pub fn from_reader<R: BufRead>(reader: R, vocab: &Vocabulary) -> Result<Self> {
        let mut corpus = IdCorpus::default();
        for line in reader.lines() {
            corpus.push_line(&line?, vocab);
        }
        Ok(corpus)
    }

    /// Build directly from id sequences (one per line).
    pub fn from_id_lines<I, L>(lines: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: IntoIterator<Item = u32>,
    {
        let mut corpus = IdCorpus::default();
        for line in lines {
            corpus.ids.extend(line);
            corpus.line_ends.push(corpus.ids.len());
        }
        corpus
    }

    fn push_line(&mut self, line: &str, vocab: &Vocabulary) {
        self.ids
            .extend(tokenize(line).map(|t| vocab.id(&t).unwrap_or(OOV)));
        self.line_ends.push(self.ids.len());
    }

    pub fn lines(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        (0..self.line_ends.len()).map(move |i| {
            let s = if i == 0 { 0 } else { self.line_ends[i - 1] };
            &self.ids[s..self.line_ends[i]]
        })
    }

    /// Contiguous ranges of lines, `n` of them (or fewer for short corpora).
    pub fn shards(&self, n: usize) -> Vec<IdCorpus> {
        let n = n.max(1);
        let lines: Vec<&[u32]> = self.lines().collect();
        let per = lines.len().div_ceil(n).max(1);
        lines
            .chunks(per)
            .map(|chunk| IdCorpus::from_id_lines(chunk.iter().map(|l| l.iter().copied())))
            .collect()
    }

    pub fn num_lines(&self) -> usize {
        self.line_ends.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.ids.len()
    }

    pub fn num_in_vocab(&self) -> usize {
        self.ids.iter().filter(|&&i| i != OOV).count()
    }
}
