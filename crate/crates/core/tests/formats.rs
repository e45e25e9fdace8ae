use proptest::prelude::*;
use wordsem::embed::EmbeddingExport;
use wordsem::harness::ExperimentSpec;
use wordsem::taxonomy::parse_wndb;
use wordsem::tinynet::{decode_checkpoint, encode_checkpoint, LayerSpec, NetSpec, Network, Shape};
use wordsem::wordgen::{build_dataset, decode_raster, encode_raster, parse_manifest};

fn small_spec(channels: usize, height: usize, width: usize, hidden: usize, k: usize) -> NetSpec {
    NetSpec {
        input: Shape::new(channels, height, width),
        layers: vec![
            LayerSpec::Conv {
                out_channels: 2,
                kernel: 3,
            },
            LayerSpec::Relu,
            LayerSpec::Maxpool,
            LayerSpec::Fc {
                out_dim: hidden,
                has_bias: true,
            },
            LayerSpec::Relu,
            LayerSpec::Dropout { rate: 0.25 },
            LayerSpec::Fc {
                out_dim: k,
                has_bias: false,
            },
        ],
        preset: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn checkpoints_reencode_identically(
        seed in any::<u64>(), c in 1usize..3, h in 2usize..8, w in 2usize..8, hidden in 1usize..6, k in 1usize..6
    ) {
        let net = Network::<f32>::init(&small_spec(c, h, w, hidden, k), seed).unwrap();
        let bytes = encode_checkpoint(&net).unwrap();
        let back = decode_checkpoint(&bytes).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(encode_checkpoint(&back).unwrap(), bytes);
    }

    #[test]
    fn embedding_files_reencode_identically(
        dim in 0usize..6,
        k in 1usize..5,
        raw in prop::collection::vec((any::<u32>(), prop::collection::vec(any::<f32>(), 6)), 0..10),
        psi in prop::collection::vec(prop::collection::vec(any::<f32>(), 6), 5),
    ) {
        let export = EmbeddingExport {
            dim,
            psi: psi[..k].iter().map(|c| c[..dim].to_vec()).collect(),
            images: raw.iter().map(|(id, v)| (*id, v[..dim].to_vec())).collect(),
        };
        let bytes = export.encode().unwrap();
        let back = EmbeddingExport::decode(&bytes).unwrap();
        prop_assert_eq!(back.encode().unwrap(), bytes);
    }

    #[test]
    fn rasters_reencode_identically(h in 1usize..6, w in 1usize..6, n in 0usize..5, seed in any::<u32>()) {
        let images: Vec<Vec<f32>> = (0..n)
            .map(|i| (0..h * w).map(|j| ((seed as usize + i * 31 + j * 7) % 97) as f32 / 96.0).collect())
            .collect();
        let bytes = encode_raster(images.iter().map(Vec::as_slice), h, w).unwrap();
        let r = decode_raster(&bytes).unwrap();
        prop_assert_eq!(r.count(), n);
        prop_assert_eq!(encode_raster((0..n).map(|i| r.image(i)), h, w).unwrap(), bytes);
    }

    #[test]
    fn decoders_reject_garbage_without_panicking(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let _ = decode_checkpoint(&bytes);
        let _ = EmbeddingExport::decode(&bytes);
        let _ = decode_raster(&bytes);
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_manifest(&text);
        let _ = ExperimentSpec::from_json(&text);
        let _ = parse_wndb(&bytes, &bytes);
        let _ = wordsem::taxonomy::load_mini_taxonomy(&text);
    }
}

#[test]
fn manifest_and_spec_reparse() {
    let mut spec = ExperimentSpec::desk(5);
    spec.per_word = 2;
    spec.val_replicas = 1;
    let json = spec.to_json().unwrap();
    assert_eq!(ExperimentSpec::from_json(&json).unwrap().to_json().unwrap(), json);

    let vocab = spec.vocabulary().unwrap();
    let ds = build_dataset(&vocab, &spec.dataset_config()).unwrap();
    let text = ds.manifest_text().unwrap();
    let (header, records) = parse_manifest(&text).unwrap();
    assert_eq!(header, ds.header);
    assert_eq!(records, ds.records);
}

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut seeds: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap())
        })
        .collect();
    seeds.sort();
    assert!(!seeds.is_empty(), "no seeds for {target}");
    seeds
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn fuzz_seeds_decode() {
    use wordsem::embed::parse_concept_expression;
    use wordsem::taxonomy::{build_vocabulary, load_mini_taxonomy, ConceptVocabulary, FIG3_FIXTURE};
    use wordsem::Error;

    for (_, b) in corpus("wndb") {
        let at = b.iter().position(|&x| x == 0).unwrap();
        assert!(parse_wndb(&b[..at], &b[at + 1..]).unwrap().len() > 0);
    }
    for (_, b) in corpus("mini_taxonomy") {
        load_mini_taxonomy(text(&b)).unwrap();
    }
    for (_, b) in corpus("vocabulary") {
        ConceptVocabulary::from_json(text(&b)).unwrap().validate().unwrap();
    }
    for (_, b) in corpus("checkpoint") {
        assert_eq!(encode_checkpoint(&decode_checkpoint(&b).unwrap()).unwrap(), b);
    }
    for (_, b) in corpus("raster") {
        assert!(decode_raster(&b).unwrap().count() > 0);
    }
    for (_, b) in corpus("embedding_export") {
        assert_eq!(EmbeddingExport::decode(&b).unwrap().encode().unwrap(), b);
    }
    for (_, b) in corpus("manifest") {
        assert!(!parse_manifest(text(&b)).unwrap().1.is_empty());
    }
    for (_, b) in corpus("experiment_spec") {
        ExperimentSpec::from_json(text(&b)).unwrap().validate().unwrap();
    }
    let tax = load_mini_taxonomy(FIG3_FIXTURE).unwrap();
    let vocab = build_vocabulary(tax.graph(), &["cat", "dinosaur", "jeep"].map(String::from), 8, 2).unwrap();
    for (name, b) in corpus("concept_expression") {
        let parsed = parse_concept_expression(text(&b), &vocab);
        match name.as_str() {
            "duplicate" => assert!(matches!(parsed, Err(Error::Param(_)))),
            _ => {
                parsed.unwrap();
            }
        }
    }
}
