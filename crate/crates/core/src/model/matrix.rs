use std::cmp::Ordering;
use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::scalar::{dot, norm, Real};

/// Rows with norm at or below this are degenerate and excluded from evaluation.
pub const EPS_NORM: f64 = 1e-8;

/// `|W| × D` embedding matrix, one row per vocabulary id.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix<T> {
    vocab: Arc<Vocabulary>,
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> EmbeddingMatrix<T> {
    /// Rows drawn i.i.d. from `U[-0.5/D, 0.5/D]`; deterministic given `seed`.
    pub fn init(vocab: Arc<Vocabulary>, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be at least 1".into()));
        }
        let half = 0.5 / dim as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..vocab.len() * dim)
            .map(|_| T::of(rng.random_range(-half..=half)))
            .collect();
        Ok(EmbeddingMatrix { vocab, dim, data })
    }

    pub fn from_rows(vocab: Arc<Vocabulary>, dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 || data.len() != vocab.len() * dim {
            return Err(Error::Incompatible(format!(
                "{} values do not form {} rows of dimension {}",
                data.len(),
                vocab.len(),
                dim
            )));
        }
        Ok(EmbeddingMatrix { vocab, dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    #[inline]
    pub fn row(&self, id: u32) -> &[T] {
        let s = id as usize * self.dim;
        &self.data[s..s + self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, id: u32) -> &mut [T] {
        let s = id as usize * self.dim;
        &mut self.data[s..s + self.dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[T]> {
        self.vocab.id(word).map(|id| self.row(id))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn norm(&self, id: u32) -> T {
        norm(self.row(id))
    }

    pub fn is_degenerate(&self, id: u32) -> bool {
        self.norm(id).as_f64() <= EPS_NORM
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Unit-length copy of row `id`.
    pub fn normalize_row(&self, id: u32) -> Result<Vec<T>> {
        normalize(self.row(id)).ok_or_else(|| Error::DegenerateVector(self.vocab.word(id).to_owned()))
    }

    /// Precompute unit rows for repeated cosine queries.
    pub fn normalized(&self) -> NormalizedView<T> {
        NormalizedView::new(self)
    }

    pub fn top_k_by_cosine(&self, query: &[T], k: usize, exclude: &[u32]) -> TopK<T> {
        self.normalized().top_k(query, k, exclude)
    }

    pub fn cast<U: Real>(&self) -> EmbeddingMatrix<U> {
        EmbeddingMatrix {
            vocab: self.vocab.clone(),
            dim: self.dim,
            data: self.data.iter().map(|x| U::of(x.as_f64())).collect(),
        }
    }
}

/// `v / ‖v‖`, or `None` when `‖v‖ <= EPS_NORM`.
pub fn normalize<T: Real>(v: &[T]) -> Option<Vec<T>> {
    let n = norm(v);
    if n.as_f64().is_nan() || n.as_f64() <= EPS_NORM {
        return None;
    }
    Some(v.iter().map(|&x| x / n).collect())
}

/// Ranked retrieval result. `truncated` is set when fewer than `k` candidates existed.
#[derive(Clone, Debug, PartialEq)]
pub struct TopK<T> {
    pub hits: Vec<(u32, T)>,
    pub truncated: bool,
}

impl<T> TopK<T> {
    pub fn ids(&self) -> Vec<u32> {
        self.hits.iter().map(|h| h.0).collect()
    }
}

/// Higher score first, then lower id.
#[inline]
pub(crate) fn rank_order<T: Real>(a: (u32, T), b: (u32, T)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

/// Keep the best `k` of `(id, score)` candidates, ordered by [`rank_order`].
pub(crate) fn select_top<T: Real>(mut cands: Vec<(u32, T)>, k: usize) -> TopK<T> {
    let truncated = cands.len() < k;
    if cands.len() > k && k > 0 {
        cands.select_nth_unstable_by(k - 1, |a, b| rank_order(*a, *b));
        cands.truncate(k);
    }
    if k == 0 {
        cands.clear();
    }
    cands.sort_unstable_by(|a, b| rank_order(*a, *b));
    TopK {
        hits: cands,
        truncated,
    }
}

/// Length-normalized rows with degenerate rows flagged.
#[derive(Clone, Debug)]
pub struct NormalizedView<T> {
    dim: usize,
    unit: Vec<T>,
    degenerate: Vec<bool>,
}

impl<T: Real> NormalizedView<T> {
    fn new(m: &EmbeddingMatrix<T>) -> Self {
        let mut unit = Vec::with_capacity(m.data.len());
        let mut degenerate = Vec::with_capacity(m.len());
        for id in 0..m.len() as u32 {
            match normalize(m.row(id)) {
                Some(u) => {
                    unit.extend(u);
                    degenerate.push(false);
                }
                None => {
                    unit.extend(std::iter::repeat_n(T::zero(), m.dim));
                    degenerate.push(true);
                }
            }
        }
        NormalizedView {
            dim: m.dim,
            unit,
            degenerate,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.degenerate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degenerate.is_empty()
    }

    #[inline]
    pub fn row(&self, id: u32) -> &[T] {
        let s = id as usize * self.dim;
        &self.unit[s..s + self.dim]
    }

    pub fn is_degenerate(&self, id: u32) -> bool {
        self.degenerate[id as usize]
    }

    pub fn num_degenerate(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }

    /// `v̂_x` for every non-degenerate `x` not in `exclude`, scored by `score(x, v̂_x)`.
    pub(crate) fn candidates<F>(&self, exclude: &[u32], mut score: F) -> Vec<(u32, T)>
    where
        F: FnMut(u32, &[T]) -> T,
    {
        (0..self.len() as u32)
            .filter(|&x| !self.degenerate[x as usize] && !exclude.contains(&x))
            .map(|x| (x, score(x, self.row(x))))
            .collect()
    }

    /// The `k` rows with highest cosine to `query`, ties broken by ascending id.
    pub fn top_k(&self, query: &[T], k: usize, exclude: &[u32]) -> TopK<T> {
        let qn = norm(query);
        let inv = if qn > T::zero() { qn.recip() } else { T::zero() };
        let cands = self.candidates(exclude, |_, u| dot(query, u) * inv);
        select_top(cands, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(n: usize) -> Arc<Vocabulary> {
        Arc::new(Vocabulary::from_words((0..n).map(|i| format!("w{i}"))).unwrap())
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let v = vocab(1000);
        let a = EmbeddingMatrix::<f32>::init(v.clone(), 300, 1).unwrap();
        let b = EmbeddingMatrix::<f32>::init(v.clone(), 300, 1).unwrap();
        assert_eq!(a, b);
        let h = 0.5f32 / 300.0;
        assert!(a.as_slice().iter().all(|&x| (-h..=h).contains(&x)));
        let c = EmbeddingMatrix::<f32>::init(v, 300, 2).unwrap();
        let differ = a
            .as_slice()
            .iter()
            .zip(c.as_slice())
            .filter(|(x, y)| x != y)
            .count();
        assert!(differ as f64 >= 0.99 * a.as_slice().len() as f64);
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(EmbeddingMatrix::<f32>::init(vocab(2), 0, 0).is_err());
    }

    #[test]
    fn normalize_three_four() {
        let m = EmbeddingMatrix::from_rows(vocab(1), 2, vec![3.0f64, 4.0]).unwrap();
        assert_eq!(m.normalize_row(0).unwrap(), vec![0.6, 0.8]);
    }

    #[test]
    fn normalize_unit_is_identity() {
        let u = vec![0.0f64, 1.0, 0.0];
        assert_eq!(normalize(&u).unwrap(), u);
    }

    #[test]
    fn degenerate_row_errors() {
        let m = EmbeddingMatrix::from_rows(vocab(2), 2, vec![0.0f64, 0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(m.normalize_row(0), Err(Error::DegenerateVector(w)) if w == "w0"));
        assert!(m.is_degenerate(0));
        let view = m.normalized();
        assert_eq!(view.num_degenerate(), 1);
        assert_eq!(m.top_k_by_cosine(&[1.0, 0.0], 5, &[]).ids(), vec![1]);
    }

    #[test]
    fn self_retrieval() {
        let m = EmbeddingMatrix::<f64>::init(vocab(20), 8, 3).unwrap();
        let q = m.normalize_row(7).unwrap();
        assert_eq!(m.top_k_by_cosine(&q, 1, &[]).ids(), vec![7]);
    }

    #[test]
    fn exclusion_and_truncation() {
        let m = EmbeddingMatrix::<f64>::init(vocab(5), 4, 3).unwrap();
        let q = m.row(0).to_vec();
        let top = m.top_k_by_cosine(&q, 10, &[0, 1, 2]);
        assert!(top.truncated);
        assert_eq!(top.hits.len(), 2);
        assert!(top.ids().iter().all(|id| ![0, 1, 2].contains(id)));
    }

    #[test]
    fn ties_break_by_id() {
        let m = EmbeddingMatrix::from_rows(vocab(3), 2, vec![1.0f64, 0.0, 2.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.top_k_by_cosine(&[1.0, 0.0], 2, &[]).ids(), vec![0, 1]);
    }
}
