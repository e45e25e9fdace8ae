use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::config::{EvalOptions, TaskKind};
use crate::embed::{
    average_precision, extract, mean_average_precision, EmbeddingSpace, ImageInput, QueryMetrics, RankedList, Task,
};
use crate::error::{Error, Result};
use crate::rng::{mix, rng_from, tag};
use crate::taxonomy::ConceptVocabulary;
use crate::tinynet::{Network, Real};
use crate::wordgen::{random_crop, sample_crop, Dataset, Split, WordImage};

/// Aggregate numbers for one retrieval task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub task: String,
    pub map: f64,
    pub p_at_1: f64,
    pub p_at_10: f64,
    pub p_at_50: f64,
    pub r_precision: f64,
    pub evaluated: usize,
    /// Queries without any relevant item.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub images: usize,
    pub tasks: Vec<TaskSummary>,
    /// Image ids used as image-to-image queries.
    pub image_queries: Vec<u32>,
    #[serde(skip)]
    pub per_query: Vec<QueryMetrics>,
}

impl EvalResult {
    pub fn task(&self, name: &str) -> Option<&TaskSummary> {
        self.tasks.iter().find(|t| t.task == name)
    }

    pub fn map(&self, task: Task) -> Option<f64> {
        self.task(task.name()).map(|t| t.map)
    }
}

/// Fails with a configuration error when the network and vocabulary
/// disagree on K.
pub fn check_k<T: Real>(net: &Network<T>, vocab: &ConceptVocabulary) -> Result<()> {
    if net.num_concepts() != vocab.k() {
        return Err(Error::Config(format!(
            "checkpoint scores {} concepts, vocabulary has K={}",
            net.num_concepts(),
            vocab.k()
        )));
    }
    Ok(())
}

pub fn dataset_inputs<'a>(dataset: &'a Dataset, indices: &[usize]) -> Vec<ImageInput<'a>> {
    indices
        .iter()
        .map(|&i| ImageInput {
            id: dataset.records[i].id,
            pixels: &dataset.images[i].pixels,
            concepts: &dataset.records[i].concept_ids,
        })
        .collect()
}

/// Held-out renderings of a dataset.
pub fn test_inputs(dataset: &Dataset) -> Vec<ImageInput<'_>> {
    dataset_inputs(dataset, &dataset.indices(Split::Val))
}

pub fn evaluate<T: Real>(net: &Network<T>, images: &[ImageInput<'_>], opts: &EvalOptions) -> Result<EvalResult> {
    if images.is_empty() {
        return Err(Error::Config("no images to evaluate".into()));
    }
    let k = net.num_concepts();
    if let Some((img, c)) = images.iter().find_map(|i| i.concepts.iter().find(|&&c| c >= k).map(|&c| (i, c))) {
        return Err(Error::Config(format!("image {} has concept {c}, checkpoint has K={k}", img.id)));
    }
    evaluate_space(&extract(net, images)?, opts)
}

/// Runs the selected tasks: image-to-concept over every image,
/// concept-to-image over every concept, image-to-image over a seeded
/// sample of query images.
pub fn evaluate_space(space: &EmbeddingSpace, opts: &EvalOptions) -> Result<EvalResult> {
    let mut tasks = Vec::new();
    let mut per_query = Vec::new();
    let mut image_queries = Vec::new();
    let mut run = |task: Task, queries: &[u32]| -> Result<()> {
        let report = mean_average_precision(space, task, queries)?;
        tasks.push(TaskSummary {
            task: report.task.clone(),
            map: report.map,
            p_at_1: report.mean(|m| m.p_at_1),
            p_at_10: report.mean(|m| m.p_at_10),
            p_at_50: report.mean(|m| m.p_at_50),
            r_precision: report.mean(|m| m.r_precision),
            evaluated: report.evaluated,
            excluded: report.excluded.len(),
        });
        per_query.extend(report.per_query);
        Ok(())
    };
    let mut kinds = opts.tasks.clone();
    kinds.sort();
    kinds.dedup();
    for kind in kinds {
        match kind {
            TaskKind::ImageToConcept => run(Task::ImageToConcept, space.ids())?,
            TaskKind::ConceptToImage => {
                let concepts: Vec<u32> = (0..space.k() as u32).collect();
                run(Task::ConceptToImage, &concepts)?
            }
            TaskKind::ImageToImage => {
                if space.len() < 2 {
                    return Err(Error::Config("image-to-image retrieval needs at least two images".into()));
                }
                let n = opts.image_queries.min(space.len());
                let mut picks = sample(&mut rng_from(mix(opts.seed, &[tag::QUERY])), space.len(), n).into_vec();
                picks.sort_unstable();
                image_queries = picks.iter().map(|&i| space.ids()[i]).collect();
                for &f in &opts.image_features {
                    run(Task::ImageToImage(f), &image_queries)?;
                }
            }
        }
    }
    Ok(EvalResult {
        images: space.len(),
        tasks,
        image_queries,
        per_query,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRatio {
    pub task: String,
    pub clean: f64,
    pub cropped: f64,
    /// `cropped / clean`, absent when the clean value is 0.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropReport {
    pub max_frac: f64,
    pub seed: u64,
    pub clean: EvalResult,
    pub cropped: EvalResult,
    pub ratios: Vec<MetricRatio>,
    pub min_retained_fraction: f64,
}

/// Crop seed of image `id`.
pub fn crop_seed(seed: u64, id: u32) -> u64 {
    mix(seed, &[id as u64])
}

/// Evaluates image-to-concept and concept-to-image on clean images and on
/// one seeded random crop of each.
pub fn crop_robustness<T: Real>(
    net: &Network<T>,
    images: &[(u32, &WordImage)],
    max_frac: f64,
    seed: u64,
) -> Result<CropReport> {
    let cropped: Vec<WordImage> = images
        .iter()
        .map(|&(id, img)| random_crop(img, max_frac, crop_seed(seed, id)))
        .collect::<Result<_>>()?;
    let min_retained_fraction = images
        .iter()
        .map(|&(id, _)| sample_crop(max_frac, crop_seed(seed, id)).map(|c| c.retained_fraction()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(1.0, f64::min);
    let opts = EvalOptions {
        tasks: vec![TaskKind::ImageToConcept, TaskKind::ConceptToImage],
        ..Default::default()
    };
    let clean = evaluate(net, &labelled(images.iter().copied()), &opts)?;
    let crop = evaluate(net, &labelled(images.iter().zip(&cropped).map(|(&(id, _), img)| (id, img))), &opts)?;
    let ratios = clean
        .tasks
        .iter()
        .zip(&crop.tasks)
        .map(|(a, b)| MetricRatio {
            task: a.task.clone(),
            clean: a.map,
            cropped: b.map,
            ratio: (a.map > 0.0).then(|| b.map / a.map),
        })
        .collect();
    Ok(CropReport {
        max_frac,
        seed,
        clean,
        cropped: crop,
        ratios,
        min_retained_fraction,
    })
}

fn labelled<'a>(images: impl Iterator<Item = (u32, &'a WordImage)>) -> Vec<ImageInput<'a>> {
    images
        .map(|(id, img)| ImageInput {
            id,
            pixels: &img.pixels,
            concepts: &img.concept_ids,
        })
        .collect()
}

/// Expected image-to-concept mAP under uniformly random scores, estimated
/// over `trials` draws; trial `t` ranks the concepts of image `t mod n`.
pub fn chance_map(relevance: &[Vec<usize>], k: usize, trials: usize, seed: u64) -> Result<f64> {
    use rand::Rng;
    if relevance.is_empty() || trials == 0 {
        return Err(Error::Param("chance level needs images and at least one trial".into()));
    }
    if relevance.iter().any(|r| r.is_empty() || r.iter().any(|&c| c >= k)) {
        return Err(Error::Param(format!("every image needs concepts below K={k}")));
    }
    let mut rng = rng_from(mix(seed, &[tag::CHANCE]));
    let mut total = 0.0;
    for t in 0..trials {
        let rel = &relevance[t % relevance.len()];
        let pattern = {
            let scores: Vec<f64> = (0..k).map(|_| rng.random()).collect();
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
            order.iter().map(|c| rel.contains(c)).collect::<Vec<bool>>()
        };
        total += average_precision(&RankedList::from_relevance(&pattern))?;
    }
    Ok(total / trials as f64)
}
