#![no_main]

use libfuzzer_sys::fuzz_target;
use wordsem::tinynet::{decode_checkpoint, encode_checkpoint};

fuzz_target!(|bytes: &[u8]| {
    if let Ok(net) = decode_checkpoint(bytes) {
        let encoded = encode_checkpoint(&net).unwrap();
        let again = decode_checkpoint(&encoded).unwrap();
        assert_eq!(encode_checkpoint(&again).unwrap(), encoded);
    }
});
