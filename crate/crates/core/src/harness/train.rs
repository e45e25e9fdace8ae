use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use crate::embed::ImageInput;
use crate::error::{Error, Result};
use crate::rng::{mix, rng_from, tag};
use crate::tinynet::{sgd_step, Gradients, Mode, Network, Real, Velocity};
use crate::warp::{default_budget, sample_update, RankingExample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub learning_rate: f64,
    pub mean_loss: f64,
    /// Mean number of negatives drawn per update.
    pub mean_tries: f64,
    pub zero_update_fraction: f64,
    pub images: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub epochs: Vec<EpochLog>,
    /// Images whose concepts cover all K and so have no negative.
    pub skipped_images: usize,
}

/// SGD with momentum over shuffled mini-batches, one sampled WARP update
/// per image per epoch. The batch gradient is the mean over the batch.
///
/// `on_epoch` runs after every epoch with the updated network.
pub fn train_network<T: Real>(
    net: &mut Network<T>,
    images: &[ImageInput<'_>],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog, &Network<T>) -> Result<()>,
) -> Result<TrainSummary> {
    cfg.validate()?;
    let k = net.num_concepts();
    if k < 2 {
        return Err(Error::Config("ranking needs at least two concepts".into()));
    }
    let budget = cfg.warp_budget.unwrap_or_else(|| default_budget(k));
    let input_len = net.input_len();
    let mut usable = Vec::with_capacity(images.len());
    for (i, img) in images.iter().enumerate() {
        if img.pixels.len() != input_len {
            return Err(Error::structural("input", format!("image {} has {} pixels, expected {input_len}", img.id, img.pixels.len())));
        }
        if let Some(&c) = img.concepts.iter().find(|&&c| c >= k) {
            return Err(Error::Config(format!("image {} has concept {c}, network has K={k}", img.id)));
        }
        if img.concepts.is_empty() {
            return Err(Error::Config(format!("image {} has no concept", img.id)));
        }
        if img.concepts.len() < k {
            usable.push(i);
        }
    }
    let skipped_images = images.len() - usable.len();
    if usable.is_empty() && cfg.epochs > 0 {
        return Err(Error::Config("no trainable image: every image is annotated with all concepts".into()));
    }

    let mut velocity = Velocity::zeros_like(net);
    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut order = usable.clone();
        order.shuffle(&mut rng_from(mix(cfg.seed, &[tag::SHUFFLE, epoch as u64])));
        let sgd = cfg.sgd(epoch);
        let (mut loss_sum, mut tries_sum, mut zero) = (0.0, 0usize, 0usize);

        for (step, batch) in order.chunks(cfg.batch_size).enumerate() {
            let inputs: Vec<Vec<T>> = batch
                .iter()
                .map(|&i| images[i].pixels.iter().map(|&p| T::from_f64(p as f64)).collect())
                .collect();
            let refs: Vec<&[T]> = inputs.iter().map(Vec::as_slice).collect();
            let mode = Mode::Train {
                seed: mix(cfg.seed, &[tag::DROPOUT, epoch as u64, step as u64]),
                dropout: cfg.dropout,
            };
            let outputs = net.forward(&refs, mode)?;

            let scale = 1.0 / batch.len() as f64;
            let mut active = Vec::new();
            let mut d_scores = Vec::new();
            for (out, &i) in outputs.iter().zip(batch) {
                let img = &images[i];
                let scores: Vec<f64> = out.scores.iter().map(|s| s.to_f64()).collect();
                if scores.iter().any(|s| !s.is_finite()) {
                    return Err(Error::Numeric(format!(
                        "non-finite scores for image {} at epoch {epoch}, step {step}",
                        img.id
                    )));
                }
                let example = RankingExample::new(&scores, img.concepts)?;
                let mut rng = rng_from(mix(cfg.seed, &[tag::WARP, epoch as u64, img.id as u64]));
                let update = sample_update(&example, budget, &mut rng)?;
                if !update.loss.is_finite() {
                    return Err(Error::Numeric(format!(
                        "non-finite loss for image {} at epoch {epoch}, step {step}",
                        img.id
                    )));
                }
                loss_sum += update.loss;
                tries_sum += update.tries;
                if update.is_zero() {
                    zero += 1;
                } else {
                    active.push(out.clone());
                    d_scores.push(update.gradient.iter().map(|g| T::from_f64(g * scale)).collect::<Vec<T>>());
                }
            }

            let grads = if active.is_empty() {
                Gradients::zeros_like(net)
            } else {
                net.backward(&active, &d_scores)?.grads
            };
            sgd_step(net, &grads, &sgd, &mut velocity)
                .map_err(|e| Error::Numeric(format!("epoch {epoch}, step {step}: {e}")))?;
        }

        let n = order.len().max(1) as f64;
        let log = EpochLog {
            epoch,
            learning_rate: sgd.learning_rate,
            mean_loss: loss_sum / n,
            mean_tries: tries_sum as f64 / n,
            zero_update_fraction: zero as f64 / n,
            images: order.len(),
        };
        on_epoch(&log, net)?;
        epochs.push(log);
    }
    Ok(TrainSummary {
        epochs,
        skipped_images,
    })
}
