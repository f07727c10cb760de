use crate::corpus::{CooccurrenceRows, CooccurrenceStore, Vocabulary};
use crate::error::{Error, Result};

/// Which per-word total normalizes a co-occurrence row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marginal {
    /// `Σ_w #(x, w)`: makes each profile a distribution over context words.
    #[default]
    RowSum,
    /// The vocabulary occurrence count of `x`.
    Occurrence,
}

/// Analogy quadruple `a:b = c:d` as vocabulary ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Quadruple {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl Quadruple {
    pub fn new(a: u32, b: u32, c: u32, d: u32) -> Self {
        Quadruple { a, b, c, d }
    }

    pub fn from_words(vocab: &Vocabulary, words: [&str; 4]) -> Result<Self> {
        let id = |w: &str| vocab.id(w).ok_or_else(|| Error::UnknownWord(w.to_owned()));
        Ok(Quadruple::new(id(words[0])?, id(words[1])?, id(words[2])?, id(words[3])?))
    }

    /// `(c, d, a, b)`
    pub fn swapped(self) -> Self {
        Quadruple::new(self.c, self.d, self.a, self.b)
    }

    pub fn all_distinct(&self) -> bool {
        let q = [self.a, self.b, self.c, self.d];
        (0..4).all(|i| (i + 1..4).all(|j| q[i] != q[j]))
    }

    pub fn words(&self, vocab: &Vocabulary) -> [String; 4] {
        [self.a, self.b, self.c, self.d].map(|i| vocab.word(i).to_owned())
    }
}

/// `C_{a,b}[w] = #(a,w)/#(a) − #(b,w)/#(b)`, stored sparsely over the union of
/// the nonzero columns of rows `a` and `b`. Absent columns are exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    pub a: u32,
    pub b: u32,
    pub cols: Vec<u32>,
    pub values: Vec<f64>,
}

impl CVector {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Inner product over the merged column sets, in ascending column order.
    pub fn dot(&self, other: &CVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.cols.len() && j < other.cols.len() {
            match self.cols[i].cmp(&other.cols[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (&c, &v) in self.cols.iter().zip(&self.values) {
            out[c as usize] = v;
        }
        out
    }
}

/// Row-indexed co-occurrence statistics for repeated C-vector queries.
pub struct CooccurrenceStats<'a> {
    rows: CooccurrenceRows,
    vocab: &'a Vocabulary,
    marginal: Marginal,
}

impl<'a> CooccurrenceStats<'a> {
    pub fn new(store: &CooccurrenceStore, vocab: &'a Vocabulary, marginal: Marginal) -> Result<Self> {
        if store.vocab_size() != vocab.len() {
            return Err(Error::Incompatible(format!(
                "store covers {} words, vocabulary has {}",
                store.vocab_size(),
                vocab.len()
            )));
        }
        Ok(CooccurrenceStats {
            rows: store.rows(),
            vocab,
            marginal,
        })
    }

    pub fn vocab(&self) -> &'a Vocabulary {
        self.vocab
    }

    pub fn rows(&self) -> &CooccurrenceRows {
        &self.rows
    }

    pub fn marginal(&self) -> Marginal {
        self.marginal
    }

    /// `#(x)` under the configured marginal.
    pub fn total(&self, x: u32) -> u64 {
        match self.marginal {
            Marginal::RowSum => self.rows.row_sum(x),
            Marginal::Occurrence => self.vocab.count(x),
        }
    }

    fn check(&self, x: u32) -> Result<u64> {
        if x as usize >= self.vocab.len() {
            return Err(Error::UnknownWord(format!("#{x}")));
        }
        match self.total(x) {
            0 => Err(Error::DegenerateWord(self.vocab.word(x).to_owned())),
            n => Ok(n),
        }
    }

    pub fn c_vector(&self, a: u32, b: u32) -> Result<CVector> {
        let na = self.check(a)? as i128;
        let nb = self.check(b)? as i128;
        let denom = (na * nb) as f64;
        let (ca, va) = self.rows.row(a);
        let (cb, vb) = self.rows.row(b);
        let mut cols = Vec::with_capacity(ca.len() + cb.len());
        let mut values = Vec::with_capacity(ca.len() + cb.len());
        let (mut i, mut j) = (0, 0);
        // (#(a,w)·#(b) − #(b,w)·#(a)) / (#(a)·#(b)), exact in integers, rounded once
        let mut push = |col: u32, xa: u64, xb: u64| {
            let num = xa as i128 * nb - xb as i128 * na;
            cols.push(col);
            values.push(num as f64 / denom);
        };
        while i < ca.len() || j < cb.len() {
            let next_a = ca.get(i).copied().unwrap_or(u32::MAX);
            let next_b = cb.get(j).copied().unwrap_or(u32::MAX);
            if i < ca.len() && (j >= cb.len() || next_a < next_b) {
                push(next_a, va[i], 0);
                i += 1;
            } else if j < cb.len() && (i >= ca.len() || next_b < next_a) {
                push(next_b, 0, vb[j]);
                j += 1;
            } else {
                push(next_a, va[i], vb[j]);
                i += 1;
                j += 1;
            }
        }
        Ok(CVector { a, b, cols, values })
    }

    pub fn c_vector_words(&self, a: &str, b: &str) -> Result<CVector> {
        let id = |w: &str| self.vocab.id(w).ok_or_else(|| Error::UnknownWord(w.to_owned()));
        self.c_vector(id(a)?, id(b)?)
    }

    fn nonzero(&self, c: CVector) -> Result<CVector> {
        if c.is_zero() {
            Err(Error::DegeneratePair(
                self.vocab.word(c.a).to_owned(),
                self.vocab.word(c.b).to_owned(),
            ))
        } else {
            Ok(c)
        }
    }

    /// `|cos(C_{a,b}, C_{c,d})|`
    pub fn collinearity(&self, q: Quadruple) -> Result<f64> {
        let x = self.nonzero(self.c_vector(q.a, q.b)?)?;
        let y = self.nonzero(self.c_vector(q.c, q.d)?)?;
        Ok(collinearity_of(&x, &y))
    }

    /// `ζ̂ = ‖C_{a,b}‖ / ‖C_{c,d}‖`
    pub fn zeta_hat(&self, q: Quadruple) -> Result<f64> {
        let x = self.nonzero(self.c_vector(q.a, q.b)?)?;
        let y = self.nonzero(self.c_vector(q.c, q.d)?)?;
        Ok(x.norm() / y.norm())
    }
}

pub(crate) fn collinearity_of(x: &CVector, y: &CVector) -> f64 {
    let nx = x.norm();
    let ny = y.norm();
    (x.dot(y) / (nx * ny)).abs().min(1.0)
}
