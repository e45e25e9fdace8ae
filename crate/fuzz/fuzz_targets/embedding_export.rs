#![no_main]

use libfuzzer_sys::fuzz_target;
use wordsem::embed::EmbeddingExport;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(e) = EmbeddingExport::decode(bytes) {
        let encoded = e.encode().unwrap();
        assert_eq!(EmbeddingExport::decode(&encoded).unwrap().encode().unwrap(), encoded);
    }
});
