use std::cmp::Ordering;
use std::fmt;

use super::analogy::AnalogyQuery;
use crate::analysis::{CooccurrenceStats, Quadruple};
use crate::error::{Error, Result};
use crate::model::{rank_order, select_top, NormalizedView};
use crate::scalar::{cosine, dot, Real};

/// Outcome of one retrieval: the rank of the best acceptable answer among all
/// candidates (1-based) and the top of the candidate list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Retrieval {
    /// `None` if no answer is a valid candidate (degenerate or excluded).
    pub rank: Option<usize>,
    pub top: Vec<u32>,
}

impl Retrieval {
    pub fn hit(&self, k: usize) -> bool {
        self.rank.is_some_and(|r| r <= k)
    }
}

/// `hits / total`, printed as `0.800 (619/774)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Rate {
    pub hits: usize,
    pub total: usize,
}

impl Rate {
    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.hits as f64 / self.total as f64)
    }

    pub fn record(&mut self, hit: bool) {
        self.total += 1;
        self.hits += hit as usize;
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v:.3} ({}/{})", self.hits, self.total),
            None => write!(f, "n/a (0/0)"),
        }
    }
}

fn check<T: Real>(view: &NormalizedView<T>, q: Quadruple) -> Result<()> {
    for x in [q.a, q.b, q.c, q.d] {
        if x as usize >= view.len() {
            return Err(Error::UnknownWord(format!("#{x}")));
        }
        if view.is_degenerate(x) {
            return Err(Error::DegenerateWord(format!("#{x}")));
        }
    }
    Ok(())
}

fn retrieve<T: Real>(cands: Vec<(u32, T)>, answers: &[u32], k: usize) -> Retrieval {
    let rank = answers
        .iter()
        .filter_map(|&ans| {
            let target = cands.iter().find(|c| c.0 == ans).copied()?;
            let better = cands
                .iter()
                .filter(|&&c| rank_order(c, target) == Ordering::Less)
                .count();
            Some(better + 1)
        })
        .min();
    Retrieval {
        rank,
        top: select_top(cands, k).ids(),
    }
}

/// Rank all `x ∉ {a, b, c}` by ascending `‖v̂_b − v̂_a + v̂_c − v̂_x‖`.
pub fn parallelogram_recovery<T: Real>(
    view: &NormalizedView<T>,
    q: Quadruple,
    answers: &[u32],
    k: usize,
) -> Result<Retrieval> {
    check(view, q)?;
    let (a, b, c) = (view.row(q.a), view.row(q.b), view.row(q.c));
    let target: Vec<T> = (0..view.dim()).map(|i| b[i] - a[i] + c[i]).collect();
    let cands = view.candidates(&[q.a, q.b, q.c], |_, x| {
        let mut d2 = T::zero();
        for (&t, &xi) in target.iter().zip(x) {
            d2 += (t - xi) * (t - xi);
        }
        -d2
    });
    Ok(retrieve(cands, answers, k))
}

/// Rank all `x ∉ {a, b, c}` by descending `cos(v̂_b − v̂_a, v̂_x − v̂_c)`.
/// Candidates whose unit vector equals `v̂_c` have no direction and are skipped.
pub fn trapezoid_recovery<T: Real>(
    view: &NormalizedView<T>,
    q: Quadruple,
    answers: &[u32],
    k: usize,
) -> Result<Retrieval> {
    check(view, q)?;
    let (a, b, c) = (view.row(q.a), view.row(q.b), view.row(q.c));
    let off: Vec<T> = (0..view.dim()).map(|i| b[i] - a[i]).collect();
    if dot(&off, &off) == T::zero() {
        return Err(Error::DegeneratePair(format!("#{}", q.a), format!("#{}", q.b)));
    }
    let mut diff = vec![T::zero(); view.dim()];
    let cands: Vec<(u32, T)> = view
        .candidates(&[q.a, q.b, q.c], |_, x| {
            for i in 0..diff.len() {
                diff[i] = x[i] - c[i];
            }
            cosine(&off, &diff).unwrap_or(T::nan())
        })
        .into_iter()
        .filter(|c| !c.1.is_nan())
        .collect();
    Ok(retrieve(cands, answers, k))
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RecoveryReport {
    pub ks: Vec<usize>,
    pub parallelogram: Vec<Rate>,
    pub trapezoid: Vec<Rate>,
    /// Queries skipped because a word vector is degenerate.
    pub skipped: usize,
}

/// Parallelogram and trapezoid hit rates over `queries` at every `k` in `ks`.
pub fn recovery_rates<T: Real>(view: &NormalizedView<T>, queries: &[AnalogyQuery], ks: &[usize]) -> RecoveryReport {
    let kmax = ks.iter().copied().max().unwrap_or(1);
    let mut rep = RecoveryReport {
        ks: ks.to_vec(),
        parallelogram: vec![Rate::default(); ks.len()],
        trapezoid: vec![Rate::default(); ks.len()],
        skipped: 0,
    };
    for q in queries {
        let p = parallelogram_recovery(view, q.quadruple, &q.answers, kmax);
        let t = trapezoid_recovery(view, q.quadruple, &q.answers, kmax);
        match (p, t) {
            (Ok(p), Ok(t)) => {
                for (i, &k) in ks.iter().enumerate() {
                    rep.parallelogram[i].record(p.hit(k));
                    rep.trapezoid[i].record(t.hit(k));
                }
            }
            _ => rep.skipped += 1,
        }
    }
    rep
}

pub const COLLINEARITY_THRESHOLD: f64 = 0.9;
pub const ZETA_BAND: (f64, f64) = (0.95, 1.05);

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Stratum {
    pub label: String,
    pub method: String,
    pub rates: Vec<Rate>,
}

/// Recovery stratified by `ζ̂` among quadruples with collinear C-vectors.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StratifiedReport {
    pub ks: Vec<usize>,
    pub collinearity_threshold: f64,
    pub zeta_band: (f64, f64),
    pub queries: usize,
    pub collinear: usize,
    /// Queries whose C-vectors or vectors are degenerate.
    pub skipped: usize,
    /// `ζ̂` within the band, scored as parallelograms.
    pub near_one: Stratum,
    /// `ζ̂` outside the band, scored as trapezoids.
    pub other: Stratum,
}

pub fn zeta_stratified_recovery<T: Real>(
    view: &NormalizedView<T>,
    stats: &CooccurrenceStats<'_>,
    queries: &[AnalogyQuery],
    ks: &[usize],
) -> Result<StratifiedReport> {
    if view.len() != stats.vocab().len() {
        return Err(Error::Incompatible(format!(
            "matrix has {} rows, store vocabulary has {}",
            view.len(),
            stats.vocab().len()
        )));
    }
    let kmax = ks.iter().copied().max().unwrap_or(1);
    let stratum = |label: &str, method: &str| Stratum {
        label: label.into(),
        method: method.into(),
        rates: vec![Rate::default(); ks.len()],
    };
    let mut rep = StratifiedReport {
        ks: ks.to_vec(),
        collinearity_threshold: COLLINEARITY_THRESHOLD,
        zeta_band: ZETA_BAND,
        queries: queries.len(),
        collinear: 0,
        skipped: 0,
        near_one: stratum("zeta ~ 1", "parallelogram"),
        other: stratum("zeta !~ 1", "trapezoid"),
    };
    for q in queries {
        let (col, zeta) = match (stats.collinearity(q.quadruple), stats.zeta_hat(q.quadruple)) {
            (Ok(c), Ok(z)) => (c, z),
            _ => {
                rep.skipped += 1;
                continue;
            }
        };
        if col < COLLINEARITY_THRESHOLD {
            continue;
        }
        let near = (ZETA_BAND.0..=ZETA_BAND.1).contains(&zeta);
        let r = if near {
            parallelogram_recovery(view, q.quadruple, &q.answers, kmax)
        } else {
            trapezoid_recovery(view, q.quadruple, &q.answers, kmax)
        };
        let Ok(r) = r else {
            rep.skipped += 1;
            continue;
        };
        rep.collinear += 1;
        let s = if near { &mut rep.near_one } else { &mut rep.other };
        for (i, &k) in ks.iter().enumerate() {
            s.rates[i].record(r.hit(k));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::model::EmbeddingMatrix;
    use std::sync::Arc;

    fn matrix(rows: &[[f64; 2]]) -> EmbeddingMatrix<f64> {
        let vocab = Arc::new(Vocabulary::from_words((0..rows.len()).map(|i| format!("w{i}"))).unwrap());
        EmbeddingMatrix::from_rows(vocab, 2, rows.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn rate_display() {
        assert_eq!(Rate { hits: 619, total: 774 }.to_string(), "0.800 (619/774)");
        assert_eq!(Rate::default().to_string(), "n/a (0/0)");
    }

    #[test]
    fn planted_parallelogram_ranks_first_for_both() {
        // a unit-circle parallelogram is a rectangle: d = −a, c = −b
        let m = matrix(&[[1.0, 0.0], [0.6, 0.8], [-0.6, -0.8], [-1.0, 0.0], [0.0, 1.0], [-0.8, 0.6]]);
        let v = m.normalized();
        let q = Quadruple::new(0, 1, 2, 3);
        assert_eq!(parallelogram_recovery(&v, q, &[3], 1).unwrap().rank, Some(1));
        assert_eq!(trapezoid_recovery(&v, q, &[3], 1).unwrap().rank, Some(1));
    }

    #[test]
    fn planted_trapezoid_separates_methods() {
        // v̂_d − v̂_c parallel to v̂_b − v̂_a but longer
        let t: f64 = 0.3;
        let a = [t.cos(), t.sin()];
        let b = [t.cos(), -t.sin()];
        let c = [0.0, 1.0];
        let d = [0.0, -1.0];
        let m = matrix(&[a, b, c, d, [0.6, 0.8], [-0.6, 0.8]]);
        let v = m.normalized();
        let q = Quadruple::new(0, 1, 2, 3);
        assert_eq!(trapezoid_recovery(&v, q, &[3], 1).unwrap().rank, Some(1));
        assert_ne!(parallelogram_recovery(&v, q, &[3], 1).unwrap().rank, Some(1));
    }

    #[test]
    fn degenerate_and_excluded() {
        let m = matrix(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [1.0, 1.0]]);
        let v = m.normalized();
        assert!(matches!(
            parallelogram_recovery(&v, Quadruple::new(0, 1, 2, 3), &[3], 1),
            Err(Error::DegenerateWord(_))
        ));
        let m = matrix(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.5], [1.0, 1.0]]);
        let v = m.normalized();
        // answer equal to an excluded word never ranks
        let r = parallelogram_recovery(&v, Quadruple::new(0, 1, 2, 3), &[0], 1).unwrap();
        assert_eq!(r.rank, None);
        assert!(!r.hit(5));
    }
}
