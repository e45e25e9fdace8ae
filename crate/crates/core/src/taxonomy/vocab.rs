use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::graph::SynsetGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Concept {
    pub id: String,
    pub label: String,
    /// Number of distinct words annotated with this concept before the
    /// top-K restriction.
    pub population: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabStats {
    pub input_words: usize,
    pub unique_words: usize,
    pub multi_word_skipped: usize,
    pub not_in_taxonomy: usize,
    pub no_concept_at_level: usize,
    pub dropped_outside_top_k: usize,
    pub retained_words: usize,
    pub available_concepts: usize,
    pub mean_concepts_per_word: f64,
    pub max_concepts_per_word: usize,
}

/// The K selected concepts at one depth level and the per-word annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptVocabulary {
    pub depth_level: u32,
    pub concepts: Vec<Concept>,
    /// word → ascending concept indices into `concepts`.
    pub annotations: BTreeMap<String, Vec<usize>>,
    pub stats: VocabStats,
}

impl ConceptVocabulary {
    pub fn k(&self) -> usize {
        self.concepts.len()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.annotations.keys().map(String::as_str)
    }

    pub fn concepts_of(&self, word: &str) -> Option<&[usize]> {
        self.annotations.get(word).map(Vec::as_slice)
    }

    /// Resolves a concept by label or id; underscores and spaces are
    /// interchangeable and matching is case-insensitive.
    pub fn concept_index(&self, name: &str) -> Option<usize> {
        let norm = |s: &str| s.to_lowercase().replace(' ', "_");
        let want = norm(name);
        self.concepts
            .iter()
            .position(|c| norm(&c.label) == want)
            .or_else(|| self.concepts.iter().position(|c| c.id == name))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and validates a serialized vocabulary.
    pub fn from_json(text: &str) -> Result<Self> {
        let vocab: ConceptVocabulary = serde_json::from_str(text)?;
        vocab.validate()?;
        Ok(vocab)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(Error::Config("vocabulary has no concepts".into()));
        }
        if self
            .concepts
            .windows(2)
            .any(|w| w[0].population < w[1].population)
        {
            return Err(Error::Config("concepts not ordered by population".into()));
        }
        for (word, ids) in &self.annotations {
            if ids.is_empty() {
                return Err(Error::Config(format!("word {word:?} has no concepts")));
            }
            if ids.iter().any(|&i| i >= k) {
                return Err(Error::Config(format!("word {word:?} references a concept >= K={k}")));
            }
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!("word {word:?} has unsorted or repeated concepts")));
            }
        }
        Ok(())
    }

    /// Copy restricted to the given words. Concepts and stats are kept.
    pub fn restricted_to<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> Self {
        let keep: BTreeSet<&str> = words.into_iter().collect();
        let mut out = self.clone();
        out.annotations.retain(|w, _| keep.contains(w.as_str()));
        out
    }

    /// Copy without the given concepts. Remaining concepts are renumbered
    /// in order and words left without a concept are removed.
    pub fn without_concepts(&self, drop: &BTreeSet<usize>) -> Self {
        let mut remap = vec![None; self.k()];
        let mut next = 0;
        for (i, slot) in remap.iter_mut().enumerate() {
            if !drop.contains(&i) {
                *slot = Some(next);
                next += 1;
            }
        }
        let mut out = self.clone();
        out.concepts = self
            .concepts
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        out.annotations = self
            .annotations
            .iter()
            .filter_map(|(w, ids)| {
                let ids: Vec<usize> = ids.iter().filter_map(|&i| remap[i]).collect();
                (!ids.is_empty()).then(|| (w.clone(), ids))
            })
            .collect();
        out
    }
}

/// Mines a vocabulary: level-`level` concepts per word, the `k` most
/// populated concepts, and the words that keep at least one of them.
pub fn build_vocabulary(
    graph: &SynsetGraph,
    words: &[String],
    level: u32,
    k: usize,
) -> Result<ConceptVocabulary> {
    if k == 0 {
        return Err(Error::Param("K must be at least 1".into()));
    }
    if words.is_empty() {
        return Err(Error::Param("word list is empty".into()));
    }

    let mut stats = VocabStats {
        input_words: words.len(),
        ..Default::default()
    };
    let unique: BTreeSet<String> = words.iter().map(|w| w.trim().to_lowercase()).filter(|w| !w.is_empty()).collect();
    stats.unique_words = unique.len();

    let mut per_word: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for word in &unique {
        if word.contains(['_', ' ']) {
            stats.multi_word_skipped += 1;
            continue;
        }
        if graph.senses(word).is_empty() {
            stats.not_in_taxonomy += 1;
            continue;
        }
        let concepts = graph.concept_indices_at_level(word, level);
        if concepts.is_empty() {
            stats.no_concept_at_level += 1;
            continue;
        }
        per_word.insert(word, concepts);
    }

    let mut population: BTreeMap<usize, usize> = BTreeMap::new();
    for concepts in per_word.values() {
        for &c in concepts {
            *population.entry(c).or_default() += 1;
        }
    }
    stats.available_concepts = population.len();
    if population.len() < k {
        return Err(Error::Config(format!(
            "only {} distinct concepts exist at level {level}; K={k} is not achievable (maximum K is {})",
            population.len(),
            population.len()
        )));
    }

    let mut ranked: Vec<(usize, usize)> = population.into_iter().collect();
    ranked.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| graph.synset(a.0).order.cmp(&graph.synset(b.0).order))
    });
    ranked.truncate(k);
    let slot: BTreeMap<usize, usize> = ranked.iter().enumerate().map(|(i, &(node, _))| (node, i)).collect();

    let concepts = ranked
        .iter()
        .map(|&(node, pop)| {
            let s = graph.synset(node);
            Concept {
                id: s.id.clone(),
                label: s.label().to_string(),
                population: pop,
            }
        })
        .collect();

    let mut annotations = BTreeMap::new();
    for (word, nodes) in per_word {
        let mut ids: Vec<usize> = nodes.iter().filter_map(|n| slot.get(n).copied()).collect();
        if ids.is_empty() {
            stats.dropped_outside_top_k += 1;
            continue;
        }
        ids.sort_unstable();
        annotations.insert(word.to_string(), ids);
    }
    stats.retained_words = annotations.len();
    let total: usize = annotations.values().map(Vec::len).sum();
    stats.mean_concepts_per_word = total as f64 / annotations.len().max(1) as f64;
    stats.max_concepts_per_word = annotations.values().map(Vec::len).max().unwrap_or(0);

    Ok(ConceptVocabulary {
        depth_level: level,
        concepts,
        annotations,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::mini::{load_mini_taxonomy, FIG3_FIXTURE};

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn level_eight_single_concept() {
        let g = load_mini_taxonomy(FIG3_FIXTURE).unwrap();
        let v = build_vocabulary(&g, &words(&["cat", "dinosaur"]), 8, 1).unwrap();
        assert_eq!(v.k(), 1);
        assert_eq!(v.concepts[0].label, "vertebrate");
        assert_eq!(v.concepts[0].population, 2);
        assert_eq!(v.concepts_of("cat"), Some(&[0][..]));
        assert_eq!(v.concepts_of("dinosaur"), Some(&[0][..]));
    }

    #[test]
    fn level_beyond_depth_is_config_error() {
        let g = load_mini_taxonomy(FIG3_FIXTURE).unwrap();
        let err = build_vocabulary(&g, &words(&["cat", "jeep"]), 40, 1).unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("maximum K is 0")));
    }

    #[test]
    fn top_k_drops_unannotated_words() {
        let g = load_mini_taxonomy(FIG3_FIXTURE).unwrap();
        // level 9: cat→mammal, dinosaur→reptile, jeep→self-propelled_vehicle;
        // all tied at population 1, broken by declaration order.
        let v = build_vocabulary(&g, &words(&["cat", "dinosaur", "jeep", "unicorn", "motor_car"]), 9, 2).unwrap();
        let labels: Vec<_> = v.concepts.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["mammal", "reptile"]);
        assert!(v.concepts_of("jeep").is_none());
        assert_eq!(v.stats.dropped_outside_top_k, 1);
        assert_eq!(v.stats.not_in_taxonomy, 1);
        assert_eq!(v.stats.multi_word_skipped, 1);
        assert_eq!(v.stats.retained_words, 2);
        v.validate().unwrap();
    }

    #[test]
    fn glass_gets_both_senses() {
        let fixture = "\
node entity entity
node matter matter
node object object
node solid solid
node container container
node glass_material glass
node glass_vessel glass
edge matter entity
edge object entity
edge solid matter
edge container object
edge glass_material solid
edge glass_vessel container
";
        let g = load_mini_taxonomy(fixture).unwrap();
        assert_eq!(g.senses("glass").len(), 2);
        let v = build_vocabulary(&g, &words(&["glass"]), 2, 2).unwrap();
        let labels: BTreeSet<_> = v.concepts.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, BTreeSet::from(["solid", "container"]));
        assert_eq!(v.concepts_of("glass"), Some(&[0, 1][..]));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = load_mini_taxonomy(FIG3_FIXTURE).unwrap();
        let v = build_vocabulary(&g, &words(&["cat", "dinosaur"]), 9, 2).unwrap();
        let text = v.to_json().unwrap();
        assert_eq!(ConceptVocabulary::from_json(&text).unwrap(), v);
        let broken = text.replace("\"cat\": [\n      0\n    ]", "\"cat\": [\n      7\n    ]");
        assert_ne!(broken, text);
        assert!(ConceptVocabulary::from_json(&broken).is_err());
    }
}
