#![no_main]

use libfuzzer_sys::fuzz_target;
use wordsem::harness::ExperimentSpec;

fuzz_target!(|text: &str| {
    if let Ok(spec) = ExperimentSpec::from_json(text) {
        let _ = spec.validate();
        let _ = spec.to_json();
    }
});
