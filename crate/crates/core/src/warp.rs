//! WARP (weighted approximately ranked pairwise) loss.
//!
//! For an image with score vector `Y`, a relevant concept `p` and an
//! irrelevant concept `n`, the loss is `L(rank(p)) * max(0, 1 - Y_p + Y_n)`
//! with harmonic rank weights `L(r) = 1 + 1/2 + ... + 1/r`. During training
//! the rank is not computed exactly: negatives are sampled until one
//! violates the margin, and the number of tries `s` gives the estimate
//! `floor((K - 1) / s)`.

use rand::Rng;

use crate::error::{Error, Result};

/// Harmonic rank weight `L(r) = Σ_{j=1..r} 1/j`.
pub fn weight_l(r: usize) -> Result<f64> {
    if r < 1 {
        return Err(Error::Param("rank weight is defined for r >= 1".into()));
    }
    Ok((1..=r).map(|j| 1.0 / j as f64).sum())
}

fn hinge(scores: &[f64], p: usize, n: usize) -> f64 {
    1.0 - scores[p] + scores[n]
}

fn check_pair(scores: &[f64], p: usize, n: usize) -> Result<()> {
    if p == n {
        return Err(Error::Param("positive and negative index coincide".into()));
    }
    if p >= scores.len() || n >= scores.len() {
        return Err(Error::Param(format!("index out of range for K={}", scores.len())));
    }
    Ok(())
}

/// Pairwise WARP loss for a fixed rank.
pub fn warp_loss(scores: &[f64], p: usize, n: usize, rank: usize) -> Result<f64> {
    check_pair(scores, p, n)?;
    Ok(weight_l(rank)? * hinge(scores, p, n).max(0.0))
}

/// Subgradient of [`warp_loss`] with respect to the scores: `-L` at `p`,
/// `+L` at `n` while the hinge is active, zero otherwise.
pub fn warp_gradient(scores: &[f64], p: usize, n: usize, rank: usize) -> Result<Vec<f64>> {
    check_pair(scores, p, n)?;
    let weight = weight_l(rank)?;
    let mut grad = vec![0.0; scores.len()];
    if hinge(scores, p, n) > 0.0 {
        grad[p] = -weight;
        grad[n] = weight;
    }
    Ok(grad)
}

/// Scores of one image together with its relevant concepts.
#[derive(Debug, Clone, Copy)]
pub struct RankingExample<'a> {
    scores: &'a [f64],
    relevant: &'a [usize],
}

impl<'a> RankingExample<'a> {
    /// `relevant` must be non-empty, duplicate free, in range, and leave at
    /// least one negative.
    pub fn new(scores: &'a [f64], relevant: &'a [usize]) -> Result<Self> {
        let k = scores.len();
        if k < 2 {
            return Err(Error::Param("ranking needs K >= 2".into()));
        }
        if relevant.is_empty() {
            return Err(Error::Param("no relevant concepts".into()));
        }
        if relevant.iter().any(|&r| r >= k) {
            return Err(Error::Param(format!("relevant index out of range for K={k}")));
        }
        let mut seen = vec![false; k];
        for &r in relevant {
            if std::mem::replace(&mut seen[r], true) {
                return Err(Error::Param(format!("relevant index {r} repeated")));
            }
        }
        if relevant.len() == k {
            return Err(Error::Param("every concept is relevant; no negative exists".into()));
        }
        Ok(Self { scores, relevant })
    }

    pub fn scores(&self) -> &'a [f64] {
        self.scores
    }

    pub fn relevant(&self) -> &'a [usize] {
        self.relevant
    }

    pub fn k(&self) -> usize {
        self.scores.len()
    }

    pub fn negatives(&self) -> Vec<usize> {
        (0..self.k()).filter(|i| !self.relevant.contains(i)).collect()
    }
}

/// Outcome of one sampled WARP step.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpUpdate {
    pub positive: usize,
    /// The violating negative, `None` when the budget ran out.
    pub negative: Option<usize>,
    pub tries: usize,
    pub rank_estimate: usize,
    pub loss: f64,
    pub gradient: Vec<f64>,
}

impl WarpUpdate {
    pub fn is_zero(&self) -> bool {
        self.negative.is_none()
    }
}

/// Default number of negative draws: `K - 1`.
pub fn default_budget(k: usize) -> usize {
    k.saturating_sub(1).max(1)
}

/// Draws a positive uniformly, then negatives uniformly with replacement
/// until one violates the margin or `budget` draws have been made.
pub fn sample_update<R: Rng + ?Sized>(
    example: &RankingExample<'_>,
    budget: usize,
    rng: &mut R,
) -> Result<WarpUpdate> {
    if budget < 1 {
        return Err(Error::Param("sampling budget must be >= 1".into()));
    }
    let k = example.k();
    let scores = example.scores;
    let positive = example.relevant[rng.random_range(0..example.relevant.len())];
    let negatives = example.negatives();

    for tries in 1..=budget {
        let n = negatives[rng.random_range(0..negatives.len())];
        if hinge(scores, positive, n) > 0.0 {
            let rank_estimate = ((k - 1) / tries).max(1);
            return Ok(WarpUpdate {
                positive,
                negative: Some(n),
                tries,
                rank_estimate,
                loss: warp_loss(scores, positive, n, rank_estimate)?,
                gradient: warp_gradient(scores, positive, n, rank_estimate)?,
            });
        }
    }
    Ok(WarpUpdate {
        positive,
        negative: None,
        tries: budget,
        rank_estimate: ((k - 1) / budget).max(1),
        loss: 0.0,
        gradient: vec![0.0; k],
    })
}

/// Number of concepts scoring strictly higher than `p`.
pub fn exhaustive_rank(scores: &[f64], p: usize) -> usize {
    let target = scores[p];
    scores
        .iter()
        .enumerate()
        .filter(|&(i, &y)| i != p && y > target)
        .count()
}

/// Count of (relevant, irrelevant) pairs where the irrelevant concept
/// scores strictly higher. Evaluation only; never differentiated.
pub fn exhaustive_objective(example: &RankingExample<'_>) -> usize {
    let scores = example.scores;
    let negatives = example.negatives();
    example
        .relevant
        .iter()
        .map(|&p| negatives.iter().filter(|&&n| scores[n] > scores[p]).count())
        .sum()
}

/// Exact rank-weighted hinge summed over all negatives, using the exact
/// rank of `p`. Used to check that a zero sampled update is sound.
pub fn exhaustive_hinge(example: &RankingExample<'_>, p: usize) -> Result<f64> {
    let rank = exhaustive_rank(example.scores, p).max(1);
    example
        .negatives()
        .into_iter()
        .map(|n| warp_loss(example.scores, p, n, rank))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    #[test]
    fn harmonic_weights() {
        assert_eq!(weight_l(1).unwrap(), 1.0);
        assert!((weight_l(3).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        for r in 1..50 {
            let d = weight_l(r + 1).unwrap() - weight_l(r).unwrap();
            assert!((d - 1.0 / (r + 1) as f64).abs() < 1e-12);
        }
        assert!(weight_l(0).is_err());
    }

    #[test]
    fn loss_values() {
        assert_eq!(warp_loss(&[2.0, 0.5], 0, 1, 1).unwrap(), 0.0);
        assert!((warp_loss(&[0.2, 0.5], 0, 1, 1).unwrap() - 1.3).abs() < 1e-15);
        let expected = 11.0 / 6.0 * 1.3;
        assert!((warp_loss(&[0.2, 0.5], 0, 1, 3).unwrap() - expected).abs() < 1e-12);
        assert!(warp_loss(&[0.2, 0.5], 1, 1, 1).is_err());
    }

    #[test]
    fn gradient_has_two_nonzeros() {
        let g = warp_gradient(&[0.2, 0.9, 0.5], 0, 2, 3).unwrap();
        let l = 11.0 / 6.0;
        assert_eq!(g, vec![-l, 0.0, l]);
        assert_eq!(warp_gradient(&[3.0, 0.9, 0.5], 0, 2, 3).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn all_negatives_violate_gives_s_one() {
        let scores = [-5.0, 1.0, 2.0, 3.0, 0.0];
        let relevant = [0];
        let ex = RankingExample::new(&scores, &relevant).unwrap();
        let mut rng = rng_from(3);
        for _ in 0..100 {
            let u = sample_update(&ex, 4, &mut rng).unwrap();
            assert_eq!(u.tries, 1);
            assert_eq!(u.rank_estimate, 4);
        }
    }

    #[test]
    fn no_violation_exhausts_budget() {
        let scores = [5.0, 1.0, 2.0, 3.0];
        let relevant = [0];
        let ex = RankingExample::new(&scores, &relevant).unwrap();
        let u = sample_update(&ex, 3, &mut rng_from(1)).unwrap();
        assert!(u.is_zero());
        assert_eq!(u.tries, 3);
        assert_eq!(u.loss, 0.0);
        assert!(u.gradient.iter().all(|&g| g == 0.0));
        assert_eq!(exhaustive_hinge(&ex, 0).unwrap(), 0.0);
    }

    #[test]
    fn exhaustive_rank_cases() {
        assert_eq!(exhaustive_rank(&[5.0, 1.0, 2.0], 0), 0);
        assert_eq!(exhaustive_rank(&[3.0, 2.0, 1.0], 2), 2);
        assert_eq!(exhaustive_rank(&[1.0; 4], 1), 0);
    }

    #[test]
    fn exhaustive_objective_cases() {
        let y = [1.0, 2.0, 3.0, 4.0];
        let ex = RankingExample::new(&y, &[0, 2]).unwrap();
        assert_eq!(exhaustive_objective(&ex), 3);
        let perfect = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(exhaustive_objective(&RankingExample::new(&perfect, &[0, 1]).unwrap()), 0);
        let reversed = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(exhaustive_objective(&RankingExample::new(&reversed, &[0, 1]).unwrap()), 4);
    }

    #[test]
    fn example_invariants() {
        assert!(RankingExample::new(&[1.0], &[0]).is_err());
        assert!(RankingExample::new(&[1.0, 2.0], &[]).is_err());
        assert!(RankingExample::new(&[1.0, 2.0], &[0, 1]).is_err());
        assert!(RankingExample::new(&[1.0, 2.0], &[2]).is_err());
        assert!(RankingExample::new(&[1.0, 2.0, 3.0], &[1, 1]).is_err());
    }
}
