//! The desk-scale smoke experiment shared by the end-to-end checks.

use wordsem::harness::{prepare, run_training, ExperimentSpec, TrainingRun};
use wordsem::taxonomy::ConceptVocabulary;
use wordsem::tinynet::Network;
use wordsem::wordgen::Dataset;

/// Seed of the smoke run whose bounds were calibrated.
pub const SMOKE_SEED: u64 = 2;

pub struct Smoke {
    pub spec: ExperimentSpec,
    pub vocab: ConceptVocabulary,
    pub dataset: Dataset,
    pub run: TrainingRun,
}

/// 60 words, 8 concepts, 20 renders each, desk preset, 30 epochs.
pub fn train_smoke() -> Smoke {
    let spec = ExperimentSpec::desk(SMOKE_SEED);
    let (vocab, dataset) = prepare(&spec).unwrap();
    assert_eq!((vocab.annotations.len(), vocab.k()), (60, 8));
    let net = Network::init(&spec.net_spec(vocab.k()).unwrap(), spec.train.seed).unwrap();
    let run = run_training(net, &dataset, &spec.train, |_| ()).unwrap();
    Smoke {
        spec,
        vocab,
        dataset,
        run,
    }
}

/// Epochs whose 5-epoch trailing mean loss does not exceed the previous
/// epoch's; the first epoch counts as non-increasing.
pub fn non_increasing_epochs(losses: &[f64]) -> usize {
    let ma: Vec<f64> = (0..losses.len())
        .map(|e| {
            let w = &losses[e.saturating_sub(4)..=e];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect();
    (0..ma.len()).filter(|&e| e == 0 || ma[e] <= ma[e - 1]).count()
}
