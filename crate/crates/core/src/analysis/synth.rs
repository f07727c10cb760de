//! Synthetic co-occurrence stores whose designated quadruples satisfy
//! `p_a − p_b = ζ (p_c − p_d)` exactly, where `p_x[w] = #(x,w)/#(x)`.
//!
//! Each quadruple owns four context clusters `M, F, P, R` of equal size and
//! equal total shape weight. With `0 < α, β ≤ 1/2` and `α/β = |ζ|`:
//!
//! ```text
//! a = α·M + (1−α)·P      c = β·M + (1−β)·R
//! b = α·F + (1−α)·P      d = β·F + (1−β)·R
//! ```
//!
//! so `p_a − p_b = α(M − F)/U` and `p_c − p_d = β(M − F)/U`. A negative `ζ`
//! swaps `M` and `F` in rows `c` and `d`. Quadruple words never co-occur with
//! each other, and random noise is added only among context words, so the
//! designated rows stay exact.

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cvector::Quadruple;
use crate::corpus::{CooccurrenceStore, Vocabulary};
use crate::error::{Error, Result};

const MAX_DENOMINATOR: i64 = 1000;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem1Config {
    pub quadruples: usize,
    /// Words per context cluster; each quadruple uses `4 + 4·cluster_size` words.
    pub cluster_size: usize,
    pub zeta: f64,
    /// Mean shape weight per context word.
    pub unit: u64,
    /// Random co-occurrence events added per context word.
    pub noise: u64,
    /// Extra words touched only by noise.
    pub background: usize,
    /// When nonzero, every quadruple draws its clusters from one shared pool of
    /// this many context words instead of owning them.
    pub shared_pool: usize,
    pub seed: u64,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Theorem1Config {
            quadruples: 1,
            cluster_size: 8,
            zeta: 1.0,
            unit: 4,
            noise: 4,
            background: 0,
            shared_pool: 0,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticStore {
    pub vocab: Vocabulary,
    pub store: CooccurrenceStore,
    pub quadruples: Vec<Quadruple>,
    /// The rational `ζ` actually realized.
    pub zeta: Ratio<i64>,
}

/// Best rational approximation with denominator at most `max_den`.
fn rational(x: f64, max_den: i64) -> Ratio<i64> {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    Ratio::new(h1, k1.max(1))
}

pub(crate) fn realize_zeta(zeta: f64) -> Result<Ratio<i64>> {
    if !zeta.is_finite() || zeta == 0.0 {
        return Err(Error::InfeasibleConstruction(format!("ζ must be finite and nonzero, got {zeta}")));
    }
    let mag = rational(zeta.abs(), MAX_DENOMINATOR);
    let approx = *mag.numer() as f64 / *mag.denom() as f64;
    if *mag.numer() == 0 || *mag.numer() > MAX_DENOMINATOR || (approx - zeta.abs()).abs() > 1e-9 * zeta.abs() {
        return Err(Error::InfeasibleConstruction(format!(
            "|ζ| = {} has no integer ratio with terms ≤ {MAX_DENOMINATOR}",
            zeta.abs()
        )));
    }
    Ok(if zeta < 0.0 { -mag } else { mag })
}

/// Positive integer weights summing to `len · unit`, randomly redistributed.
fn shape(rng: &mut ChaCha8Rng, len: usize, unit: u64) -> Vec<u64> {
    let mut w = vec![unit; len];
    if len < 2 || unit < 2 {
        return w;
    }
    for _ in 0..len as u64 * unit / 2 {
        let from = rng.random_range(0..len);
        let to = rng.random_range(0..len);
        if from != to && w[from] > 1 {
            w[from] -= 1;
            w[to] += 1;
        }
    }
    w
}

struct Builder {
    names: Vec<String>,
    store: CooccurrenceStore,
}

impl Builder {
    fn word(&mut self, name: String) -> u32 {
        self.names.push(name);
        (self.names.len() - 1) as u32
    }
}

/// A batch of disjoint designated quadruples sharing one store.
pub fn theorem1_batch(cfg: &Theorem1Config) -> Result<SyntheticStore> {
    if cfg.quadruples == 0 || cfg.cluster_size == 0 || cfg.unit == 0 {
        return Err(Error::InfeasibleConstruction(
            "need at least one quadruple, one word per cluster and a positive unit".into(),
        ));
    }
    let zeta = realize_zeta(cfg.zeta)?;
    let (p, r) = (zeta.numer().unsigned_abs(), *zeta.denom() as u64);
    // α = A/Q, β = B/Q with α/β = p/r and max(α, β) = 1/2
    let (q, a_w, b_w) = if p >= r { (2 * p, p, r) } else { (2 * r, p, r) };
    let flip = *zeta.numer() < 0;

    let shared = cfg.shared_pool > 0;
    if shared && cfg.shared_pool < 4 * cfg.cluster_size {
        return Err(Error::InfeasibleConstruction(format!(
            "shared pool of {} words cannot hold four clusters of {}",
            cfg.shared_pool, cfg.cluster_size
        )));
    }
    let n_context = if shared {
        cfg.shared_pool
    } else {
        cfg.quadruples * 4 * cfg.cluster_size
    };
    let n_words = cfg.quadruples * 4 + n_context + cfg.background;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = Builder {
        names: Vec::with_capacity(n_words),
        store: CooccurrenceStore::new(n_words, 1)?,
    };
    let mut temp_quads = Vec::with_capacity(cfg.quadruples);
    let mut context = Vec::with_capacity(n_words);
    if shared {
        context.extend((0..cfg.shared_pool).map(|i| b.word(format!("ctx{i}"))));
    }
    for qi in 0..cfg.quadruples {
        let [wa, wb, wc, wd] = ["a", "b", "c", "d"].map(|s| b.word(format!("q{qi}{s}")));
        let clusters: Vec<Vec<u32>> = if shared {
            let picked = sample(&mut rng, cfg.shared_pool, 4 * cfg.cluster_size);
            let picked: Vec<u32> = picked.into_iter().map(|i| context[i]).collect();
            picked.chunks(cfg.cluster_size).map(<[u32]>::to_vec).collect()
        } else {
            ["m", "f", "p", "r"]
                .iter()
                .map(|tag| {
                    let ids: Vec<u32> = (0..cfg.cluster_size)
                        .map(|i| b.word(format!("q{qi}{tag}{i}")))
                        .collect();
                    context.extend_from_slice(&ids);
                    ids
                })
                .collect()
        };
        let shapes: Vec<Vec<u64>> = (0..4).map(|_| shape(&mut rng, cfg.cluster_size, cfg.unit)).collect();
        let (m, f) = if flip { (1, 0) } else { (0, 1) };
        let rows: [(u32, usize, u64, usize, u64); 4] = [
            (wa, 0, a_w, 2, q - a_w),
            (wb, 1, a_w, 2, q - a_w),
            (wc, m, b_w, 3, q - b_w),
            (wd, f, b_w, 3, q - b_w),
        ];
        for (word, k1, w1, k2, w2) in rows {
            for (k, w) in [(k1, w1), (k2, w2)] {
                for (&ctx, &s) in clusters[k].iter().zip(&shapes[k]) {
                    b.store.add_count(word, ctx, w * s);
                }
            }
        }
        temp_quads.push(Quadruple::new(wa, wb, wc, wd));
    }
    let background: Vec<u32> = (0..cfg.background).map(|i| b.word(format!("bg{i}"))).collect();
    let mut pool = context.clone();
    pool.extend_from_slice(&background);
    for &x in context.iter().chain(&background) {
        for _ in 0..cfg.noise {
            let y = loop {
                let y = pool[rng.random_range(0..pool.len())];
                if y != x || pool.len() == 1 {
                    break y;
                }
            };
            b.store.add_event(x, y);
        }
    }
    if let Some(&w) = background.iter().find(|&&w| b.store.row_sum(w) == 0) {
        return Err(Error::InfeasibleConstruction(format!(
            "background word {} received no events; raise noise",
            b.names[w as usize]
        )));
    }
    finalize(b, temp_quads, zeta)
}

/// Re-index by the canonical vocabulary order (descending count).
fn finalize(b: Builder, quads: Vec<Quadruple>, zeta: Ratio<i64>) -> Result<SyntheticStore> {
    let mass = b.store.total_mass();
    let vocab = Vocabulary::from_counts(
        b.names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), b.store.row_sum(i as u32))),
        mass,
        1,
    );
    let remap: Vec<u32> = b.names.iter().map(|n| vocab.id(n).expect("word kept")).collect();
    let store = CooccurrenceStore::from_parts(
        vocab.len(),
        1,
        b.store
            .sorted_entries()
            .into_iter()
            .map(|(i, j, c)| (remap[i as usize], remap[j as usize], c)),
    )?;
    let quadruples = quads
        .into_iter()
        .map(|q| Quadruple::new(remap[q.a as usize], remap[q.b as usize], remap[q.c as usize], remap[q.d as usize]))
        .collect();
    Ok(SyntheticStore {
        vocab,
        store,
        quadruples,
        zeta,
    })
}

/// One designated quadruple in a store over exactly `vocab_size` words.
pub fn theorem1_synthesize(vocab_size: usize, zeta: f64, seed: u64) -> Result<SyntheticStore> {
    if vocab_size < 8 {
        return Err(Error::InfeasibleConstruction(format!(
            "need at least 8 words (4 designated, 4 context clusters), got {vocab_size}"
        )));
    }
    let cluster_size = (vocab_size - 4) / 4;
    theorem1_batch(&Theorem1Config {
        quadruples: 1,
        cluster_size,
        zeta,
        background: vocab_size - 4 - 4 * cluster_size,
        noise: 4,
        seed,
        ..Theorem1Config::default()
    })
}

/// Entrywise check of `#(a,w)/#(a) − #(b,w)/#(b) = ζ(#(c,w)/#(c) − #(d,w)/#(d))`
/// in exact integer arithmetic, with `#(x)` the row sum.
pub fn satisfies_condition(store: &CooccurrenceStore, q: Quadruple, zeta: Ratio<i64>) -> Result<bool> {
    let sum = |x: u32| store.row_sum(x) as i128;
    let (sa, sb, sc, sd) = (sum(q.a), sum(q.b), sum(q.c), sum(q.d));
    if sa == 0 || sb == 0 || sc == 0 || sd == 0 {
        return Ok(false);
    }
    let (zn, zd) = (*zeta.numer() as i128, *zeta.denom() as i128);
    let overflow = || Error::InfeasibleConstruction("counts too large for the exact check".into());
    let rows = store.rows();
    let mut cols: Vec<u32> = [q.a, q.b, q.c, q.d]
        .iter()
        .flat_map(|&x| rows.row(x).0.iter().copied())
        .collect();
    cols.sort_unstable();
    cols.dedup();
    for w in cols {
        let g = |x: u32| store.get(x, w) as i128;
        // (#(a,w)·S_b − #(b,w)·S_a)·S_c·S_d·zd == zn·(#(c,w)·S_d − #(d,w)·S_c)·S_a·S_b
        let lhs = (g(q.a) * sb - g(q.b) * sa)
            .checked_mul(sc * sd)
            .and_then(|v| v.checked_mul(zd))
            .ok_or_else(overflow)?;
        let rhs = (g(q.c) * sd - g(q.d) * sc)
            .checked_mul(sa * sb)
            .and_then(|v| v.checked_mul(zn))
            .ok_or_else(overflow)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A corpus of two-word lines whose windowed counts reproduce `store` exactly
/// for any window `≥ 1`. Lines are shuffled with `seed`.
pub fn realize_corpus(store: &CooccurrenceStore, vocab: &Vocabulary, seed: u64) -> Vec<String> {
    let mut lines = Vec::with_capacity((store.total_mass() / 2) as usize);
    for (i, j, c) in store.sorted_entries() {
        let line = format!("{} {}", vocab.word(i), vocab.word(j));
        let reps = if i == j { c / 2 } else { c };
        lines.extend(std::iter::repeat_n(line, reps as usize));
    }
    lines.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    lines
}
