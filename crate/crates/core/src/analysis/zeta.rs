use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cvector::{CooccurrenceStats, Quadruple};
use super::diagnostics::Summary;
use crate::error::{Error, Result};
use crate::eval::{AnalogySet, MultiAnswer};
use crate::model::NormalizedView;
use crate::scalar::{cosine, Real};

/// Source of quadruples for a collinearity histogram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    /// `(a_i, b_i, a_j, b_j)` from one analogy category.
    Analogy,
    /// An analogy pair `(a, b)` joined with a pair `(c, d)` from another category.
    Shuffled,
    /// Four distinct words drawn uniformly from the vocabulary.
    Random,
}

impl Population {
    pub const ALL: [Population; 3] = [Population::Analogy, Population::Shuffled, Population::Random];

    pub fn label(self) -> &'static str {
        match self {
            Population::Analogy => "analogy",
            Population::Shuffled => "shuffled",
            Population::Random => "random",
        }
    }
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Population {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analogy" => Ok(Population::Analogy),
            "shuffled" => Ok(Population::Shuffled),
            "random" => Ok(Population::Random),
            _ => Err(Error::InvalidConfig(format!(
                "unknown population {s:?} (expected analogy, shuffled or random)"
            ))),
        }
    }
}

/// Per-quadruple record: co-occurrence geometry and, given vectors, the
/// cosine of the embedding offsets `v̂_b − v̂_a` and `v̂_d − v̂_c`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadrupleDiagnostics {
    pub words: [String; 4],
    pub collinearity: f64,
    pub zeta_hat: f64,
    pub offset_cosine: Option<f64>,
}

pub fn diagnose_quadruple<T: Real>(
    stats: &CooccurrenceStats<'_>,
    q: Quadruple,
    view: Option<&NormalizedView<T>>,
) -> Result<QuadrupleDiagnostics> {
    let collinearity = stats.collinearity(q)?;
    let zeta_hat = stats.zeta_hat(q)?;
    let offset_cosine = view.and_then(|v| {
        if [q.a, q.b, q.c, q.d].iter().any(|&x| v.is_degenerate(x)) {
            return None;
        }
        let ab: Vec<T> = v.row(q.b).iter().zip(v.row(q.a)).map(|(&x, &y)| x - y).collect();
        let cd: Vec<T> = v.row(q.d).iter().zip(v.row(q.c)).map(|(&x, &y)| x - y).collect();
        cosine(&ab, &cd).map(Real::as_f64)
    });
    Ok(QuadrupleDiagnostics {
        words: q.words(stats.vocab()),
        collinearity,
        zeta_hat,
        offset_cosine,
    })
}

/// Tab-separated records with a header line.
pub fn write_diagnostics<W: Write>(mut w: W, records: &[QuadrupleDiagnostics]) -> Result<()> {
    writeln!(w, "a\tb\tc\td\tcollinearity\tzeta_hat\toffset_cosine")?;
    for r in records {
        let off = r.offset_cosine.map_or_else(|| "NA".to_owned(), |x| format!("{x}"));
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.words[0], r.words[1], r.words[2], r.words[3], r.collinearity, r.zeta_hat, off
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ZetaPopulation {
    pub population: Population,
    pub requested: usize,
    /// Quadruples the source could supply.
    pub available: usize,
    /// Quadruples dropped for degenerate C-vectors.
    pub skipped: usize,
    pub summary: Summary,
    pub values: Vec<f64>,
}

fn analogy_quadruples(set: &AnalogySet, stats: &CooccurrenceStats<'_>) -> Vec<(usize, Quadruple)> {
    set.queries(stats.vocab(), MultiAnswer::First)
        .0
        .into_iter()
        .map(|q| (q.category, q.quadruple))
        .collect()
}

fn subsample<X: Clone>(items: &[X], n: usize, rng: &mut ChaCha8Rng) -> Vec<X> {
    if n >= items.len() {
        return items.to_vec();
    }
    let mut idx = sample(rng, items.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| items[i].clone()).collect()
}

/// Quadruples for one population together with how many the source offered.
pub fn population_quadruples(
    stats: &CooccurrenceStats<'_>,
    set: Option<&AnalogySet>,
    population: Population,
    n_samples: usize,
    seed: u64,
) -> Result<(Vec<Quadruple>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let need_set = || Error::InvalidConfig(format!("the {population} population needs an analogy set"));
    match population {
        Population::Analogy => {
            let all = analogy_quadruples(set.ok_or_else(need_set)?, stats);
            let picked = subsample(&all, n_samples, &mut rng);
            Ok((picked.into_iter().map(|x| x.1).collect(), all.len()))
        }
        Population::Shuffled => {
            let set = set.ok_or_else(need_set)?;
            let resolved = set.resolve(stats.vocab());
            let true_pairs: Vec<HashSet<(u32, u32)>> = resolved
                .iter()
                .map(|c| c.pairs.iter().map(|(a, b)| (*a, b[0])).collect())
                .collect();
            let mut pool: Vec<(usize, u32, u32)> = resolved
                .iter()
                .enumerate()
                .flat_map(|(ci, c)| c.pairs.iter().map(move |(a, b)| (ci, *a, b[0])))
                .collect();
            pool.shuffle(&mut rng);
            let base = analogy_quadruples(set, stats);
            let picked = subsample(&base, n_samples, &mut rng);
            let mut out = Vec::with_capacity(picked.len());
            let mut cursor = 0usize;
            for (cat, q) in picked {
                for _ in 0..pool.len() {
                    let (ci, c, d) = pool[cursor % pool.len()];
                    cursor += 1;
                    let cand = Quadruple::new(q.a, q.b, c, d);
                    // never a true analogy: the replacement pair is not listed in the source category
                    if ci != cat && cand.all_distinct() && !true_pairs[cat].contains(&(c, d)) {
                        out.push(cand);
                        break;
                    }
                }
            }
            Ok((out, base.len()))
        }
        Population::Random => {
            let eligible: Vec<u32> = (0..stats.vocab().len() as u32)
                .filter(|&w| stats.total(w) > 0)
                .collect();
            if eligible.len() < 4 {
                return Ok((Vec::new(), 0));
            }
            let out = (0..n_samples)
                .map(|_| {
                    let idx = sample(&mut rng, eligible.len(), 4).into_vec();
                    Quadruple::new(eligible[idx[0]], eligible[idx[1]], eligible[idx[2]], eligible[idx[3]])
                })
                .collect();
            Ok((out, n_samples))
        }
    }
}

/// Collinearity values of up to `n_samples` quadruples from one population.
pub fn zeta_distribution(
    stats: &CooccurrenceStats<'_>,
    set: Option<&AnalogySet>,
    population: Population,
    n_samples: usize,
    seed: u64,
) -> Result<ZetaPopulation> {
    let (quads, available) = if n_samples == 0 {
        (Vec::new(), 0)
    } else {
        population_quadruples(stats, set, population, n_samples, seed)?
    };
    let mut values = Vec::with_capacity(quads.len());
    let mut skipped = 0;
    for q in quads {
        match stats.collinearity(q) {
            Ok(c) => values.push(c),
            Err(_) => skipped += 1,
        }
    }
    Ok(ZetaPopulation {
        population,
        requested: n_samples,
        available,
        skipped,
        summary: Summary::of(&values),
        values,
    })
}

/// Plot data: one `population<TAB>value` line per value, after a header.
pub fn write_plot_data<W: Write>(mut w: W, populations: &[ZetaPopulation]) -> Result<()> {
    writeln!(w, "population\tvalue")?;
    for p in populations {
        for v in &p.values {
            writeln!(w, "{}\t{v}", p.population)?;
        }
    }
    Ok(())
}
