//! WordNet noun taxonomy: parsing, hypernym paths, and concept mining.

mod graph;
mod mini;
mod vocab;
mod wndb;

pub use graph::{GraphBuilder, RawSynset, Synset, SynsetGraph};
pub use mini::{load_mini_taxonomy, MiniTaxonomy, DESK_FIXTURE, FIG3_FIXTURE};
pub use vocab::{build_vocabulary, Concept, ConceptVocabulary, VocabStats};
pub use wndb::{noun_id, parse_wndb};

/// The 60-word desk list (30 singular/plural pairs over eight concepts).
pub const DESK_WORDS: &str = include_str!("../../fixtures/desk_words.txt");

/// [`DESK_WORDS`] plus words for eight sparsely populated extra concepts.
pub const DESK_WORDS_EXTENDED: &str = include_str!("../../fixtures/desk_words_extended.txt");

/// One word per non-blank line; `#` starts a comment.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}
