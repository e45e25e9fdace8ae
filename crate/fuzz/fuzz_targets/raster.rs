#![no_main]

use libfuzzer_sys::fuzz_target;
use wordsem::wordgen::{decode_raster, encode_raster};

fuzz_target!(|bytes: &[u8]| {
    if let Ok(r) = decode_raster(bytes) {
        let encoded = encode_raster((0..r.count()).map(|i| r.image(i)), r.height, r.width).unwrap();
        let again = decode_raster(&encoded).unwrap();
        assert_eq!((again.height, again.width, again.count()), (r.height, r.width, r.count()));
    }
});
