//! Library results checked against slow, direct reimplementations.

mod common;

use cwm::analysis::{CooccurrenceStats, Marginal, Quadruple};
use cwm::corpus::{CooccurrenceStore, Vocabulary};
use cwm::eval::{msm, spearman};
use cwm::scalar::{cosine, dot};
use cwm::trainer::{triple_gradient, triple_loss};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use common::{finite_difference_error, pcs_oracle_error, random_store, rank_mismatches};

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let worst = finite_difference_error(&mut rng, 100, 300);
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
}

#[test]
fn inactive_triple_has_zero_gradient() {
    let g = triple_gradient(&[1.0f64, 0.0], &[1.0, 0.1], &[-1.0, 0.0], 0.2).unwrap();
    assert!(g.center.iter().chain(&g.window).chain(&g.negative).all(|&x| x == 0.0));
    assert_eq!(triple_loss(&[1.0f64, 0.0], &[1.0, 0.1], &[-1.0, 0.0], 0.2).unwrap(), 0.0);
}

fn dense_profile(store: &CooccurrenceStore, x: u32) -> Vec<f64> {
    let n = store.vocab_size() as u32;
    let total: u64 = (0..n).map(|w| store.get(x, w)).sum();
    (0..n).map(|w| store.get(x, w) as f64 / total as f64).collect()
}

#[test]
fn c_vectors_match_dense_computation() {
    let n = 40;
    let store = random_store(n, 400, 5);
    let vocab = Vocabulary::from_words((0..n).map(|i| format!("w{i}"))).unwrap();
    let stats = CooccurrenceStats::new(&store, &vocab, Marginal::RowSum).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let live: Vec<u32> = (0..n as u32).filter(|&w| store.row_sum(w) > 0).collect();
    for _ in 0..50 {
        let q: Vec<u32> = live.choose_multiple(&mut rng, 4).copied().collect();
        let (a, b, c, d) = (q[0], q[1], q[2], q[3]);
        let dense = |x: u32, y: u32| -> Vec<f64> {
            dense_profile(&store, x)
                .iter()
                .zip(dense_profile(&store, y))
                .map(|(p, q)| p - q)
                .collect()
        };
        let ab = dense(a, b);
        let got = stats.c_vector(a, b).unwrap().to_dense(n);
        for (x, y) in got.iter().zip(&ab) {
            assert!((x - y).abs() <= 1e-12);
        }
        let cd = dense(c, d);
        let want = cosine(&ab, &cd).unwrap().abs();
        let quad = Quadruple::new(a, b, c, d);
        assert!((stats.collinearity(quad).unwrap() - want).abs() <= 1e-12);
        let ratio = dot(&ab, &ab).sqrt() / dot(&cd, &cd).sqrt();
        assert!((stats.zeta_hat(quad).unwrap() - ratio).abs() <= 1e-12 * ratio);
    }
}

#[test]
fn pcs_matches_pairwise_auc() {
    let err = pcs_oracle_error(200, 8);
    assert!(err <= 1e-12, "max deviation {err:e}");
}

#[test]
fn msm_collapse_is_exactly_one() {
    let off = vec![0.3f32, -0.7, 0.11, 2.5];
    assert_eq!(msm(&vec![off.clone(); 9]).unwrap(), 1.0);
    let off64: Vec<f64> = vec![1e-3, 7.0, -3.25];
    assert_eq!(msm(&vec![off64; 4]).unwrap(), 1.0);
}

#[test]
fn retrieval_ranks_match_exhaustive_scan() {
    assert_eq!(rank_mismatches(4, 100, 21), 0);
}

#[test]
fn spearman_matches_closed_form_without_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let n = rng.random_range(5..60usize);
        let mut x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut y = x.clone();
        x.shuffle(&mut rng);
        y.shuffle(&mut rng);
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        let nf = n as f64;
        let want = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
        assert!((spearman(&x, &y).unwrap() - want).abs() <= 1e-12);
    }
}
