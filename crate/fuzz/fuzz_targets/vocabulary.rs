#![no_main]

use libfuzzer_sys::fuzz_target;
use wordsem::taxonomy::ConceptVocabulary;

fuzz_target!(|text: &str| {
    if let Ok(v) = ConceptVocabulary::from_json(text) {
        if v.validate().is_ok() {
            let again = ConceptVocabulary::from_json(&v.to_json().unwrap()).unwrap();
            assert_eq!(again.to_json().unwrap(), v.to_json().unwrap());
        }
    }
});
