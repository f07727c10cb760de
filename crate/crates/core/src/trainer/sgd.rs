//! The per-event SGD step shared by the streaming and count-driven drivers.

use std::slice;

use rand::Rng;

use super::hogwild::SharedRows;
use crate::model::EPS_NORM;
use crate::scalar::{dot, norm, Real};

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct GroupStats {
    pub loss: f64,
    pub triples: u64,
    pub active: u64,
}

impl std::ops::AddAssign for GroupStats {
    fn add_assign(&mut self, o: Self) {
        self.loss += o.loss;
        self.triples += o.triples;
        self.active += o.active;
    }
}

/// Draw `k` negatives uniformly from `0..vocab_size`, resampling any that
/// equal the center or window word. Returns an empty set if no other word exists.
pub(crate) fn sample_negatives<R: Rng>(
    rng: &mut R,
    vocab_size: usize,
    center: u32,
    window: u32,
    k: usize,
    out: &mut Vec<u32>,
) {
    out.clear();
    let excluded = if center == window { 1 } else { 2 };
    if vocab_size <= excluded {
        return;
    }
    while out.len() < k {
        let w = rng.random_range(0..vocab_size as u32);
        if w != center && w != window {
            out.push(w);
        }
    }
}

/// One event: center `c`, window `w`, negatives `w'`.
///
/// Loss terms `[m − ĉ·ŵ + ĉ·ŵ']₊` for every negative. Negative rows are
/// updated immediately; the center and window gradients are accumulated over
/// the group and applied at the end, evaluated at the group's starting point.
pub(crate) fn sgd_group<T: Real>(
    rows: &SharedRows<T>,
    center: u32,
    window: u32,
    negatives: &[u32],
    margin: T,
    lr: T,
    acc: &mut Vec<T>,
) -> GroupStats {
    let dim = rows.dim();
    let eps = T::of(EPS_NORM);
    let mut stats = GroupStats::default();
    // SAFETY: ids come from the vocabulary; see `SharedRows` for the sharing contract.
    let a = unsafe { slice::from_raw_parts_mut(rows.row_ptr(center), dim) };
    let na = norm(a);
    if na <= eps {
        return stats;
    }
    let self_pair = center == window;
    let (nb, cos_ab) = if self_pair {
        (na, T::one())
    } else {
        let b = unsafe { slice::from_raw_parts(rows.row_ptr(window), dim) };
        let nb = norm(b);
        if nb <= eps {
            return stats;
        }
        (nb, dot(a, b) / (na * nb))
    };

    acc.clear();
    acc.resize(dim, T::zero());
    let mut push_cos = T::zero();
    let mut active = 0u32;
    for &neg in negatives {
        let c = unsafe { slice::from_raw_parts_mut(rows.row_ptr(neg), dim) };
        let nc = norm(c);
        if nc <= eps {
            continue;
        }
        let cos_ac = dot(a, c) / (na * nc);
        let loss = margin - cos_ab + cos_ac;
        stats.triples += 1;
        if loss <= T::zero() {
            continue;
        }
        stats.loss += loss.as_f64();
        active += 1;
        push_cos += cos_ac;
        // ∂/∂c = a/(‖a‖‖c‖) − cos·c/‖c‖²; the center accumulates c/(‖a‖‖c‖) first.
        let to_acc = (na * nc).recip();
        let shrink = T::one() + lr * cos_ac / (nc * nc);
        let toward_a = lr / (na * nc);
        for k in 0..dim {
            let ck = c[k];
            acc[k] += ck * to_acc;
            c[k] = ck * shrink - toward_a * a[k];
        }
    }
    stats.active = active as u64;
    if active == 0 {
        return stats;
    }

    let n = T::from_u32(active).unwrap();
    let na2 = na * na;
    if self_pair {
        // ĉ·ĉ is constant: only the push terms move the center.
        let radial = push_cos / na2;
        for k in 0..dim {
            let ak = a[k];
            a[k] = ak - lr * (acc[k] - radial * ak);
        }
    } else {
        let b = unsafe { slice::from_raw_parts_mut(rows.row_ptr(window), dim) };
        let radial_a = (push_cos - n * cos_ab) / na2;
        let b_to_a = n / (nb * na);
        let radial_b = n * cos_ab / (nb * nb);
        for k in 0..dim {
            let ak = a[k];
            let bk = b[k];
            a[k] = ak - lr * (acc[k] - radial_a * ak - b_to_a * bk);
            b[k] = bk + lr * (b_to_a * ak - radial_b * bk);
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::loss::triple_gradient;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_negative_step_matches_triple_gradient() {
        let a = vec![0.3f64, -0.2, 0.5, 0.1];
        let b = vec![-0.4, 0.6, 0.2, 0.3];
        let c = vec![0.5, -0.1, 0.4, 0.2];
        let margin = 0.9;
        let lr = 0.01;
        let g = triple_gradient(&a, &b, &c, margin).unwrap();
        let data: Vec<f64> = [a.clone(), b.clone(), c.clone()].concat();
        let rows = SharedRows::new(data, 4);
        let mut acc = Vec::new();
        let s = sgd_group(&rows, 0, 1, &[2], margin, lr, &mut acc);
        assert_eq!(s.active, 1);
        let out = rows.into_inner();
        for k in 0..4 {
            assert!((out[k] - (a[k] - lr * g.center[k])).abs() < 1e-15);
            assert!((out[4 + k] - (b[k] - lr * g.window[k])).abs() < 1e-15);
            assert!((out[8 + k] - (c[k] - lr * g.negative[k])).abs() < 1e-15);
        }
    }

    #[test]
    fn inactive_group_changes_nothing() {
        let data = vec![1.0f64, 0.0, 1.0, 0.1, 0.0, 1.0];
        let rows = SharedRows::new(data.clone(), 2);
        let s = sgd_group(&rows, 0, 1, &[2], 0.2, 0.1, &mut Vec::new());
        assert_eq!((s.triples, s.active), (1, 0));
        assert_eq!(rows.into_inner(), data);
    }

    #[test]
    fn negatives_avoid_center_and_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut out = Vec::new();
        for _ in 0..200 {
            sample_negatives(&mut rng, 4, 1, 2, 5, &mut out);
            assert_eq!(out.len(), 5);
            assert!(out.iter().all(|&w| w != 1 && w != 2));
        }
        sample_negatives(&mut rng, 2, 0, 1, 5, &mut out);
        assert!(out.is_empty());
    }
}
