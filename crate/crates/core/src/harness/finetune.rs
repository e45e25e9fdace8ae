use serde::{Deserialize, Serialize};

use super::config::{EvalOptions, TrainConfig};
use super::eval::{check_k, dataset_inputs, evaluate_space, EvalResult};
use super::pipeline::run_training_on;
use super::train::{EpochLog, TrainSummary};
use crate::embed::{extract, ImageInput};
use crate::error::{Error, Result};
use crate::taxonomy::ConceptVocabulary;
use crate::tinynet::Network;
use crate::wordgen::{Dataset, Split};

/// The first `old.k()` concepts of `new` must be those of `old`, in order.
pub fn check_concept_prefix(old: &ConceptVocabulary, new: &ConceptVocabulary) -> Result<()> {
    if new.k() < old.k() {
        return Err(Error::Config(format!(
            "new vocabulary has K={} concepts, fewer than the original {}",
            new.k(),
            old.k()
        )));
    }
    if let Some(i) = (0..old.k()).find(|&i| old.concepts[i].id != new.concepts[i].id) {
        return Err(Error::Config(format!(
            "concept {i} differs: {} in the original vocabulary, {} in the new one",
            old.concepts[i].label, new.concepts[i].label
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneReport {
    pub old_k: usize,
    pub new_k: usize,
    /// Source network on the original concepts.
    pub before: EvalResult,
    /// Fine-tuned network ranked over the original concepts only.
    pub after: EvalResult,
    pub train: TrainSummary,
}

#[derive(Debug, Clone)]
pub struct FinetuneRun {
    pub net: Network<f32>,
    pub snapshots: Vec<(usize, Network<f32>)>,
    pub report: FinetuneReport,
}

/// Grows the scoring layer of `source` to the new vocabulary's K, trains on
/// the training split of `dataset` (rendered from `new_vocab`) and compares
/// retrieval over the original concepts on the held-out renders.
pub fn run_finetune(
    source: &Network<f32>,
    old_vocab: &ConceptVocabulary,
    new_vocab: &ConceptVocabulary,
    dataset: &Dataset,
    cfg: &TrainConfig,
    opts: &EvalOptions,
    mut progress: impl FnMut(&EpochLog),
) -> Result<FinetuneRun> {
    check_k(source, old_vocab)?;
    check_concept_prefix(old_vocab, new_vocab)?;
    let (old_k, new_k) = (old_vocab.k(), new_vocab.k());

    let val = dataset.indices(Split::Val);
    if val.is_empty() {
        return Err(Error::Config("dataset has no held-out renders".into()));
    }
    let original: Vec<Vec<usize>> = val
        .iter()
        .map(|&i| dataset.records[i].concept_ids.iter().copied().filter(|&c| c < old_k).collect())
        .collect();
    let val_inputs: Vec<ImageInput> = val
        .iter()
        .zip(&original)
        .map(|(&i, c)| ImageInput {
            id: dataset.records[i].id,
            pixels: &dataset.images[i].pixels,
            concepts: c,
        })
        .collect();
    let before = evaluate_space(&extract(source, &val_inputs)?, opts)?;

    let mut net = source.resize_scoring_layer(new_k, cfg.seed)?;
    let train_inputs = dataset_inputs(dataset, &dataset.indices(Split::Train));
    let (train, snapshots) = run_training_on(&mut net, &train_inputs, cfg, &mut progress)?;
    let after = evaluate_space(&extract(&net, &val_inputs)?.first_concepts(old_k)?, opts)?;
    Ok(FinetuneRun {
        net,
        snapshots,
        report: FinetuneReport {
            old_k,
            new_k,
            before,
            after,
            train,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{ExperimentSpec, TaskKind, WordSource};
    use crate::wordgen::build_dataset;

    fn setup(k_new: usize) -> (ExperimentSpec, ConceptVocabulary, ConceptVocabulary, Dataset) {
        let mut spec = ExperimentSpec::desk(9);
        spec.per_word = 2;
        spec.val_replicas = 1;
        spec.eval.tasks = vec![TaskKind::ImageToConcept, TaskKind::ConceptToImage];
        let old = spec.vocabulary().unwrap();
        spec.words = WordSource::Builtin {
            name: "desk-extended".into(),
        };
        spec.k = k_new;
        let new = spec.vocabulary().unwrap();
        let ds = build_dataset(&new, &spec.dataset_config()).unwrap();
        (spec, old, new, ds)
    }

    #[test]
    fn zero_epochs_keeps_original_ranking() {
        let (spec, old, new, ds) = setup(16);
        let source = Network::<f32>::init(&spec.net_spec(8).unwrap(), 1).unwrap();
        let cfg = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        let run = run_finetune(&source, &old, &new, &ds, &cfg, &spec.eval, |_| ()).unwrap();
        assert_eq!(run.net.num_concepts(), 16);
        assert_eq!(run.report.before, run.report.after);
        let x = &ds.images[0].pixels;
        assert_eq!(run.net.scores(x).unwrap()[..8], source.scores(x).unwrap()[..]);
    }

    #[test]
    fn prefix_mismatch_is_config_error() {
        let (spec, old, mut new, ds) = setup(16);
        new.concepts.swap(0, 1);
        let source = Network::<f32>::init(&spec.net_spec(8).unwrap(), 1).unwrap();
        let r = run_finetune(&source, &old, &new, &ds, &TrainConfig::default(), &spec.eval, |_| ());
        assert!(matches!(r, Err(Error::Config(_))));
        let wrong_k = Network::<f32>::init(&spec.net_spec(7).unwrap(), 1).unwrap();
        let r = run_finetune(&wrong_k, &old, &new, &ds, &TrainConfig::default(), &spec.eval, |_| ());
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn same_k_is_continued_training() {
        let (spec, old, _, _) = setup(16);
        let ds = build_dataset(&old, &spec.dataset_config()).unwrap();
        let source = Network::<f32>::init(&spec.net_spec(8).unwrap(), 1).unwrap();
        let cfg = TrainConfig {
            epochs: 1,
            ..Default::default()
        };
        let run = run_finetune(&source, &old, &old, &ds, &cfg, &spec.eval, |_| ()).unwrap();
        let mut plain = source.clone();
        let inputs = dataset_inputs(&ds, &ds.indices(Split::Train));
        crate::harness::train_network(&mut plain, &inputs, &cfg, |_, _| Ok(())).unwrap();
        assert_eq!(run.net, plain);
    }
}
