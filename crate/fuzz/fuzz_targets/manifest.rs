#![no_main]

use libfuzzer_sys::fuzz_target;
use wordsem::wordgen::parse_manifest;

fuzz_target!(|text: &str| {
    let _ = parse_manifest(text);
});
