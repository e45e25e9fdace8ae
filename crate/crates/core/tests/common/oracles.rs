//! Brute-force references written independently of the library code.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordsem::embed::EmbeddingSpace;

/// `1 + 1/2 + ... + 1/r`, summed from the smallest term up.
pub fn harmonic(r: usize) -> f64 {
    (1..=r).rev().map(|j| 1.0 / j as f64).sum()
}

pub fn pair_loss(y: &[f64], p: usize, n: usize, rank: usize) -> f64 {
    let margin = 1.0 - y[p] + y[n];
    if margin > 0.0 {
        harmonic(rank) * margin
    } else {
        0.0
    }
}

pub fn pair_gradient(y: &[f64], p: usize, n: usize, rank: usize) -> Vec<f64> {
    let mut g = vec![0.0; y.len()];
    if 1.0 - y[p] + y[n] > 0.0 {
        let w = harmonic(rank);
        g[p] -= w;
        g[n] += w;
    }
    g
}

/// Mean of `min(G, budget)` for `G` geometric on `{1, 2, ...}` with success
/// probability `q`: `Σ_{t<budget} (1 - q)^t = (1 - (1 - q)^budget) / q`.
pub fn truncated_geometric_mean(q: f64, budget: usize) -> f64 {
    (1.0 - (1.0 - q).powi(budget as i32)) / q
}

/// Item order by repeated selection of the best remaining item: highest
/// score first, the lower id winning ties.
pub fn selection_order(scores: &[f64]) -> Vec<usize> {
    let mut left: Vec<usize> = (0..scores.len()).collect();
    let mut out = Vec::with_capacity(scores.len());
    while !left.is_empty() {
        let mut best = 0;
        for j in 1..left.len() {
            let (a, b) = (left[j], left[best]);
            if scores[a] > scores[b] || (scores[a] == scores[b] && a < b) {
                best = j;
            }
        }
        out.push(left.remove(best));
    }
    out
}

fn hits_in_prefix(rel: &[bool], len: usize) -> usize {
    let mut c = 0;
    for &r in &rel[..len.min(rel.len())] {
        if r {
            c += 1;
        }
    }
    c
}

/// Average precision of a relevance pattern in ranked order; `None` when
/// nothing is relevant.
pub fn average_precision(rel: &[bool]) -> Option<f64> {
    let total = hits_in_prefix(rel, rel.len());
    if total == 0 {
        return None;
    }
    let mut sum = 0.0;
    for i in 0..rel.len() {
        if rel[i] {
            sum += hits_in_prefix(rel, i + 1) as f64 / (i + 1) as f64;
        }
    }
    Some(sum / total as f64)
}

pub fn precision_at(rel: &[bool], k: usize) -> f64 {
    hits_in_prefix(rel, k) as f64 / k as f64
}

pub fn r_precision(rel: &[bool]) -> Option<f64> {
    let r = hits_in_prefix(rel, rel.len());
    (r > 0).then(|| precision_at(rel, r))
}

/// Mean AP over the patterns with at least one relevant item.
pub fn mean_ap(patterns: &[Vec<bool>]) -> Option<f64> {
    let aps: Vec<f64> = patterns.iter().filter_map(|p| average_precision(p)).collect();
    (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64)
}

/// Random scores with deliberate ties, and a relevance mask.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<bool>) {
    let scores = (0..n).map(|_| rng.random_range(0..12) as f64 / 4.0).collect();
    let rel = (0..n).map(|_| rng.random_bool(0.3)).collect();
    (scores, rel)
}

/// A directed acyclic graph given as child → parents over `0..n`, where
/// parents always have smaller indices.
#[derive(Debug, Clone)]
pub struct Dag {
    pub parents: Vec<Vec<usize>>,
}

impl Dag {
    /// Each node gets one parent plus `extra_parents` more on average.
    pub fn random<R: Rng>(rng: &mut R, n: usize, extra_parents: f64) -> Self {
        let mut parents = vec![Vec::new(); n];
        for (c, ps) in parents.iter_mut().enumerate().skip(1) {
            let first = rng.random_range(0..c);
            ps.push(first);
            for p in 0..c {
                if p != first && rng.random_bool((extra_parents / c as f64).min(1.0)) {
                    ps.push(p);
                }
            }
        }
        Self { parents }
    }

    /// Every path from `node` up to a root, listed root first.
    pub fn root_paths(&self, node: usize) -> Vec<Vec<usize>> {
        if self.parents[node].is_empty() {
            return vec![vec![node]];
        }
        let mut out = Vec::new();
        for &p in &self.parents[node] {
            for mut path in self.root_paths(p) {
                path.push(node);
                out.push(path);
            }
        }
        out
    }

    /// Nodes at position `level` on some root path of some sense.
    pub fn at_level(&self, senses: &[usize], level: usize) -> BTreeSet<usize> {
        senses
            .iter()
            .flat_map(|&s| self.root_paths(s))
            .filter_map(|path| path.get(level).copied())
            .collect()
    }
}

/// Random embeddings; about one image in ten has a zero φ.
pub fn random_space(seed: u64) -> EmbeddingSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, d, k) = (rng.random_range(2..20), rng.random_range(2..6), rng.random_range(2..8));
    let vector = |rng: &mut ChaCha8Rng, zero: f64| -> Vec<f64> {
        let z = rng.random_bool(zero);
        (0..d).map(|_| if z { 0.0 } else { rng.random_range(-1.0..1.0) }).collect()
    };
    let phi: Vec<Vec<f64>> = (0..n).map(|_| vector(&mut rng, 0.1)).collect();
    let psi: Vec<Vec<f64>> = (0..k).map(|_| vector(&mut rng, 0.0)).collect();
    let rel = (0..n).map(|_| (0..k).filter(|_| rng.random_bool(0.3)).collect()).collect();
    EmbeddingSpace::from_embeddings((0..n as u32).collect(), phi, psi, rel).unwrap()
}
