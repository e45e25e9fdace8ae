#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use wordsem::embed::parse_concept_expression;
use wordsem::taxonomy::{build_vocabulary, load_mini_taxonomy, ConceptVocabulary, FIG3_FIXTURE};

fn vocab() -> &'static ConceptVocabulary {
    static V: OnceLock<ConceptVocabulary> = OnceLock::new();
    V.get_or_init(|| {
        let tax = load_mini_taxonomy(FIG3_FIXTURE).unwrap();
        let words = ["cat", "dinosaur", "jeep"].map(String::from);
        build_vocabulary(tax.graph(), &words, 8, 2).unwrap()
    })
}

fuzz_target!(|text: &str| {
    if let Ok(e) = parse_concept_expression(text, vocab()) {
        assert!(!e.add.is_empty() || !e.sub.is_empty());
        assert!(e.add.iter().chain(&e.sub).all(|&c| c < vocab().k()));
    }
});
