use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::config::{EvalOptions, ExperimentSpec, TaskKind};
use super::eval::{chance_map, dataset_inputs, evaluate, EvalResult};
use super::pipeline::run_training_on;
use super::train::{EpochLog, TrainSummary};
use crate::embed::Task;
use crate::error::{Error, Result};
use crate::taxonomy::ConceptVocabulary;
use crate::tinynet::Network;
use crate::wordgen::{build_dataset, disjoint_word_split, Split, WordSplit};

/// Words needed before a zero-shot split is meaningful.
pub const MIN_ZERO_SHOT_WORDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotReport {
    pub train_words: usize,
    pub test_words: Vec<String>,
    /// Concepts without any training word, removed for this run.
    pub dropped_concepts: Vec<String>,
    pub k: usize,
    /// Held-out renderings of training words.
    pub seen: EvalResult,
    /// Every rendering of the test words.
    pub unseen: EvalResult,
    pub chance_map: f64,
    pub unseen_over_chance: f64,
    pub train: TrainSummary,
}

#[derive(Debug, Clone)]
pub struct ZeroShotRun {
    pub net: Network<f32>,
    pub vocab: ConceptVocabulary,
    pub report: ZeroShotReport,
}

/// Seeded word-level split of the experiment's vocabulary, then
/// [`run_zero_shot_with`].
pub fn run_zero_shot(spec: &ExperimentSpec, progress: impl FnMut(&EpochLog)) -> Result<ZeroShotRun> {
    spec.validate()?;
    let vocab = spec.vocabulary()?;
    let n = vocab.annotations.len();
    if n < MIN_ZERO_SHOT_WORDS {
        return Err(Error::Config(format!(
            "zero-shot needs at least {MIN_ZERO_SHOT_WORDS} words, vocabulary has {n}"
        )));
    }
    let split = disjoint_word_split(&vocab, spec.zero_shot.train_fraction, spec.seed)?;
    run_zero_shot_with(spec, &vocab, &split, progress)
}

/// Trains on the training words only and evaluates image-to-concept and
/// concept-to-image on renders of the test words.
pub fn run_zero_shot_with(
    spec: &ExperimentSpec,
    vocab: &ConceptVocabulary,
    split: &WordSplit,
    mut progress: impl FnMut(&EpochLog),
) -> Result<ZeroShotRun> {
    split.assert_disjoint()?;
    if let Some(w) = split.train.iter().chain(&split.test).find(|w| vocab.concepts_of(w).is_none()) {
        return Err(Error::Config(format!("split word {w:?} is not in the vocabulary")));
    }
    let dropped: BTreeSet<usize> = split.untrained_concepts.iter().copied().collect();
    let label = |c: &usize| vocab.concepts[*c].label.clone();
    let dropped_concepts: Vec<String> = dropped.iter().map(label).collect();
    let reduced = vocab.without_concepts(&dropped);
    let test_words: Vec<String> = split
        .test
        .iter()
        .filter(|w| reduced.concepts_of(w).is_some())
        .cloned()
        .collect();
    if test_words.is_empty() {
        return Err(Error::Config(format!(
            "no test word keeps a concept with training words; dropped concepts: {}",
            dropped_concepts.join(", ")
        )));
    }
    if reduced.k() < 2 {
        return Err(Error::Config("fewer than two concepts remain after dropping untrained ones".into()));
    }

    let dataset = build_dataset(&reduced, &spec.dataset_config())?;
    let pick = |f: &dyn Fn(&str, Split) -> bool| -> Vec<usize> {
        (0..dataset.len())
            .filter(|&i| f(&dataset.records[i].word, dataset.records[i].split))
            .collect()
    };
    let train_idx = pick(&|w, s| split.train.contains(w) && s == Split::Train);
    let seen_idx = pick(&|w, s| split.train.contains(w) && s == Split::Val);
    let unseen_idx = pick(&|w, _| test_words.iter().any(|t| t == w));
    if seen_idx.is_empty() {
        return Err(Error::Config("zero-shot needs validation renders of training words".into()));
    }

    let mut net = Network::init(&spec.net_spec(reduced.k())?, spec.train.seed)?;
    let (train, _) = run_training_on(&mut net, &dataset_inputs(&dataset, &train_idx), &spec.train, &mut progress)?;

    let opts = EvalOptions {
        tasks: vec![TaskKind::ImageToConcept, TaskKind::ConceptToImage],
        ..spec.eval.clone()
    };
    let unseen_inputs = dataset_inputs(&dataset, &unseen_idx);
    let unseen = evaluate(&net, &unseen_inputs, &opts)?;
    let seen = evaluate(&net, &dataset_inputs(&dataset, &seen_idx), &opts)?;
    let relevance: Vec<Vec<usize>> = unseen_inputs.iter().map(|i| i.concepts.to_vec()).collect();
    let chance = chance_map(&relevance, reduced.k(), spec.zero_shot.chance_trials, spec.seed)?;
    let unseen_map = unseen.map(Task::ImageToConcept).unwrap_or(0.0);

    Ok(ZeroShotRun {
        net,
        report: ZeroShotReport {
            train_words: split.train.len(),
            test_words,
            dropped_concepts,
            k: reduced.k(),
            seen,
            unseen,
            chance_map: chance,
            unseen_over_chance: unseen_map / chance,
            train,
        },
        vocab: reduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExperimentSpec {
        let mut s = ExperimentSpec::desk(4);
        s.per_word = 2;
        s.val_replicas = 1;
        s.train.epochs = 1;
        s.zero_shot.chance_trials = 100;
        s
    }

    fn sets(ws: &[&str]) -> BTreeSet<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn overlapping_split_is_rejected() {
        let s = spec();
        let vocab = s.vocabulary().unwrap();
        let w: Vec<&str> = vocab.words().take(3).collect();
        let split = WordSplit {
            train: sets(&w),
            test: sets(&w[..1]),
            train_only_concepts: vec![],
            untrained_concepts: vec![],
        };
        match run_zero_shot_with(&s, &vocab, &split, |_| ()) {
            Err(Error::Config(m)) => assert!(m.contains(w[0]), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_test_concepts_untrained_names_them() {
        let s = spec();
        let vocab = s.vocabulary().unwrap();
        // Every word of the last concept goes to the test side, alone.
        let last = vocab.k() - 1;
        let test: Vec<&str> = vocab.words().filter(|w| vocab.concepts_of(w).unwrap() == [last]).collect();
        assert!(!test.is_empty());
        let train: Vec<&str> = vocab.words().filter(|w| !vocab.concepts_of(w).unwrap().contains(&last)).collect();
        let split = WordSplit::from_sets(&vocab, sets(&train), sets(&test)).unwrap();
        assert_eq!(split.untrained_concepts, vec![last]);
        match run_zero_shot_with(&s, &vocab, &split, |_| ()) {
            Err(Error::Config(m)) => assert!(m.contains(&vocab.concepts[last].label), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_vocabulary_is_rejected() {
        let mut s = spec();
        s.words = crate::harness::WordSource::List {
            words: ["tiger", "tigers", "rabbit", "rabbits"].iter().map(|w| w.to_string()).collect(),
        };
        s.k = 1;
        assert!(matches!(run_zero_shot(&s, |_| ()), Err(Error::Config(_))));
    }

    #[test]
    fn runs_and_reports_chance() {
        let r = run_zero_shot(&spec(), |_| ()).unwrap().report;
        assert!(!r.test_words.is_empty());
        assert!(r.train_words + r.test_words.len() <= 60);
        assert!(r.chance_map > 0.0 && r.chance_map < 1.0);
        assert_eq!(r.train.epochs.len(), 1);
    }
}
