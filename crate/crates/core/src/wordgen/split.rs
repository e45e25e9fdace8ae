use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{mix, rng_from, tag};
use crate::taxonomy::ConceptVocabulary;

/// A word-level train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordSplit {
    pub train: BTreeSet<String>,
    pub test: BTreeSet<String>,
    /// Concepts with training words but no test word.
    pub train_only_concepts: Vec<usize>,
    /// Concepts with test words but no training word.
    pub untrained_concepts: Vec<usize>,
}

impl WordSplit {
    /// Builds a split from explicit sets, rejecting any overlap.
    pub fn from_sets(vocab: &ConceptVocabulary, train: BTreeSet<String>, test: BTreeSet<String>) -> Result<Self> {
        if let Some(w) = train.intersection(&test).next() {
            return Err(Error::Config(format!("word {w:?} appears on both sides of the split")));
        }
        let covered = |side: &BTreeSet<String>| -> BTreeSet<usize> {
            side.iter()
                .filter_map(|w| vocab.concepts_of(w))
                .flatten()
                .copied()
                .collect()
        };
        let (tr, te) = (covered(&train), covered(&test));
        Ok(Self {
            train_only_concepts: tr.difference(&te).copied().collect(),
            untrained_concepts: te.difference(&tr).copied().collect(),
            train,
            test,
        })
    }

    pub fn assert_disjoint(&self) -> Result<()> {
        match self.train.intersection(&self.test).next() {
            Some(w) => Err(Error::Config(format!("word {w:?} appears on both sides of the split"))),
            None => Ok(()),
        }
    }
}

/// Seeded word-level partition with `round(n * train_fraction)` training
/// words (at least one per side).
///
/// After the shuffle, a test word whose concept has no training word is
/// swapped with a training word whose concepts stay covered without it,
/// when such a word exists.
pub fn disjoint_word_split(vocab: &ConceptVocabulary, train_fraction: f64, seed: u64) -> Result<WordSplit> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Param(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let mut words: Vec<&str> = vocab.words().collect();
    let n = words.len();
    if n < 2 {
        return Err(Error::Config("need at least two words to split".into()));
    }
    words.shuffle(&mut rng_from(mix(seed, &[tag::SPLIT])));
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
    let (mut train, mut test): (Vec<&str>, Vec<&str>) = (words[..n_train].to_vec(), words[n_train..].to_vec());

    let concepts = |w: &str| vocab.concepts_of(w).unwrap_or_default();
    for c in 0..vocab.k() {
        let covered = |side: &[&str]| side.iter().any(|w| concepts(w).contains(&c));
        if covered(&train) {
            continue;
        }
        let Some(ti) = test.iter().position(|w| concepts(w).contains(&c)) else {
            continue;
        };
        let incoming = test[ti];
        let swap = (0..train.len()).rev().find(|&vi| {
            concepts(train[vi]).iter().all(|cc| {
                concepts(incoming).contains(cc)
                    || train
                        .iter()
                        .enumerate()
                        .any(|(j, w)| j != vi && concepts(w).contains(cc))
            })
        });
        if let Some(vi) = swap {
            std::mem::swap(&mut train[vi], &mut test[ti]);
        }
    }

    let to_set = |v: Vec<&str>| v.into_iter().map(str::to_string).collect::<BTreeSet<_>>();
    WordSplit::from_sets(vocab, to_set(train), to_set(test))
}
