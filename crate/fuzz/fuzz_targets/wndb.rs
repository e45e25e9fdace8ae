#![no_main]

use libfuzzer_sys::fuzz_target;
use wordsem::taxonomy::parse_wndb;

// Input is `index.noun`, a NUL byte, then `data.noun`.
fuzz_target!(|bytes: &[u8]| {
    let (index, data) = match bytes.iter().position(|&b| b == 0) {
        Some(i) => (&bytes[..i], &bytes[i + 1..]),
        None => (&bytes[..0], bytes),
    };
    if let Ok(graph) = parse_wndb(index, data) {
        for i in 0..graph.len().min(64) {
            let _ = graph.hypernym_paths(&graph.synset(i).id);
        }
    }
});
