#![no_main]

use libfuzzer_sys::fuzz_target;
use wordsem::taxonomy::{build_vocabulary, load_mini_taxonomy};

fuzz_target!(|text: &str| {
    if let Ok(tax) = load_mini_taxonomy(text) {
        let graph = tax.graph();
        let words: Vec<String> = (0..graph.len().min(32))
            .filter_map(|i| graph.synset(i).lemmas.first().cloned())
            .collect();
        for level in 0..4 {
            let _ = build_vocabulary(graph, &words, level, 4);
        }
    }
});
