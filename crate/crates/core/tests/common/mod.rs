#![allow(dead_code)]

use std::sync::Arc;

use cwm::analysis::Quadruple;
use cwm::corpus::{CooccurrenceStore, Vocabulary};
use cwm::eval::{auc, parallelogram_recovery, pcs_from_scores, trapezoid_recovery};
use cwm::model::{EmbeddingMatrix, NormalizedView};
use cwm::scalar::{cosine, norm};
use cwm::trainer::{triple_gradient, triple_loss};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Symmetric store with `events` random unit co-occurrences.
pub fn random_store(n: usize, events: usize, seed: u64) -> CooccurrenceStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = CooccurrenceStore::new(n, 1).unwrap();
    for _ in 0..events {
        let i = rng.random_range(0..n as u32);
        let j = rng.random_range(0..n as u32);
        s.add_event(i, j);
    }
    s
}

fn rand_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Largest relative error `‖g_fd − g‖ / ‖g‖` over `triples` random active
/// triples, per role, with central differences.
pub fn finite_difference_error(rng: &mut ChaCha8Rng, triples: usize, dim: usize) -> f64 {
    let h = 1e-5;
    let margin = 0.5;
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < triples {
        let mut v = [rand_vec(rng, dim), rand_vec(rng, dim), rand_vec(rng, dim)];
        let loss = |v: &[Vec<f64>; 3]| triple_loss(&v[0], &v[1], &v[2], margin).unwrap();
        // keep clear of the hinge kink so the difference quotient is smooth
        if loss(&v) < 1e-2 {
            continue;
        }
        let g = triple_gradient(&v[0], &v[1], &v[2], margin).unwrap();
        for (role, analytic) in [&g.center, &g.window, &g.negative].into_iter().enumerate() {
            let mut fd = vec![0.0; dim];
            for k in 0..dim {
                let x = v[role][k];
                v[role][k] = x + h;
                let up = loss(&v);
                v[role][k] = x - h;
                let down = loss(&v);
                v[role][k] = x;
                fd[k] = (up - down) / (2.0 * h);
            }
            let diff: Vec<f64> = fd.iter().zip(analytic).map(|(a, b)| a - b).collect();
            worst = worst.max(norm(&diff) / norm(analytic));
        }
        done += 1;
    }
    worst
}

fn pairwise_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for &p in pos {
        for &n in neg {
            s += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    s / (pos.len() * neg.len()) as f64
}

/// Largest gap between PCS and the pairwise AUC count over `trials` random
/// score sets with `|N| = |P|`, where every subset is all of `N`.
pub fn pcs_oracle_error(trials: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let n = rng.random_range(2..30);
        // coarse grid so ties occur
        let mut draw = || (rng.random_range(-20..20) as f64) / 7.0;
        let pos: Vec<f64> = (0..n).map(|_| draw()).collect();
        let neg: Vec<f64> = (0..n).map(|_| draw()).collect();
        let want = pairwise_auc(&pos, &neg);
        worst = worst.max((auc(&pos, &neg) - want).abs());
        worst = worst.max((pcs_from_scores(&pos, &neg, 7, trial).unwrap() - want).abs());
    }
    worst
}

fn random_view(n: usize, dim: usize, seed: u64) -> NormalizedView<f64> {
    let vocab = Arc::new(Vocabulary::from_words((0..n).map(|i| format!("w{i}"))).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    EmbeddingMatrix::from_rows(vocab, dim, data).unwrap().normalized()
}

/// 1 + number of candidates strictly ahead, plus the first `k` ids.
fn scan(mut scored: Vec<(u32, f64)>, answer: u32, k: usize) -> (usize, Vec<u32>) {
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let pos = scored.iter().position(|s| s.0 == answer).unwrap();
    (pos + 1, scored.iter().take(k).map(|s| s.0).collect())
}

/// Queries on 50-word random matrices whose parallelogram or trapezoid rank
/// or top-5 list differs from a full sort of directly computed scores.
pub fn rank_mismatches(matrices: u64, queries: usize, seed: u64) -> usize {
    let (n, dim, k) = (50, 16, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for matrix in 0..matrices {
        let view = random_view(n, dim, 100 + matrix);
        for _ in 0..queries {
            let ids: Vec<u32> = (0..n as u32).collect::<Vec<_>>().choose_multiple(&mut rng, 4).copied().collect();
            let q = Quadruple::new(ids[0], ids[1], ids[2], ids[3]);
            let (a, b, c) = (view.row(q.a), view.row(q.b), view.row(q.c));
            let rest = (0..n as u32).filter(|x| ![q.a, q.b, q.c].contains(x));

            let target: Vec<f64> = (0..dim).map(|i| b[i] - a[i] + c[i]).collect();
            let para: Vec<(u32, f64)> = rest
                .clone()
                .map(|x| {
                    let d2: f64 = target.iter().zip(view.row(x)).map(|(t, v)| (t - v) * (t - v)).sum();
                    (x, -d2)
                })
                .collect();
            let (rank, top) = scan(para, q.d, k);
            let got = parallelogram_recovery(&view, q, &[q.d], k).unwrap();
            bad += usize::from(got.rank != Some(rank) || got.top != top);

            let off: Vec<f64> = (0..dim).map(|i| b[i] - a[i]).collect();
            let trap: Vec<(u32, f64)> = rest
                .map(|x| {
                    let diff: Vec<f64> = view.row(x).iter().zip(c).map(|(v, w)| v - w).collect();
                    (x, cosine(&off, &diff).unwrap())
                })
                .collect();
            let (rank, top) = scan(trap, q.d, k);
            let got = trapezoid_recovery(&view, q, &[q.d], k).unwrap();
            bad += usize::from(got.rank != Some(rank) || got.top != top);
        }
    }
    bad
}
