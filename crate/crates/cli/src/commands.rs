use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use wordsem::embed::{extract, parse_concept_expression, EmbeddingExport, Feature, ImageInput, RankedList};
use wordsem::harness::{
    check_k, crop_robustness, evaluate, net_spec_for, run_finetune, run_training, run_zero_shot, test_inputs,
    EpochLog, EvalOptions, EvalResult, ExperimentSpec, RunReport, Stopwatch, TaskKind, TaxonomySource, TrainConfig,
    WordSource,
};
use wordsem::taxonomy::{build_vocabulary, ConceptVocabulary};
use wordsem::tinynet::{load_checkpoint, save_checkpoint, Network};
use wordsem::wordgen::{build_dataset, decode_raster, Canvas, Dataset, DatasetConfig, DistortionConfig, Split};

use crate::args::*;
use crate::table::{num, Table};
use crate::{Failure, Outcome};

pub const CHECKPOINT_FILE: &str = "net.bin";
pub const EMBEDDINGS_FILE: &str = "embeddings.lwemb";
pub const VOCAB_FILE: &str = "vocab.json";

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Prints the fully resolved configuration to stderr before any work.
fn echo(command: &str, resolved: &impl Serialize) -> Outcome {
    let text = serde_json::to_string(resolved).map_err(wordsem::Error::from)?;
    eprintln!("wordsem {command}: {text}");
    Ok(())
}

fn guard_file(path: &Path, force: bool) -> Outcome {
    if path.exists() && !force {
        return Err(usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    Ok(())
}

fn guard_dir(dir: &Path, force: bool) -> Outcome {
    let occupied = match fs::read_dir(dir) {
        Ok(mut entries) => entries.next().is_some(),
        Err(_) => dir.exists(),
    };
    if occupied && !force {
        return Err(usage(format!("{} is not empty; pass --force to overwrite", dir.display())));
    }
    Ok(())
}

fn load_vocab(path: &Path) -> Outcome<ConceptVocabulary> {
    let v = ConceptVocabulary::from_json(&fs::read_to_string(path).map_err(|e| io_context(path, e))?)?;
    v.validate()?;
    Ok(v)
}

fn io_context(path: &Path, e: std::io::Error) -> Failure {
    Failure::Library(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn load_net(path: &Path) -> Outcome<Network<f32>> {
    if !path.exists() {
        return Err(io_context(path, std::io::ErrorKind::NotFound.into()));
    }
    Ok(load_checkpoint(path)?)
}

fn load_data(dir: &Path) -> Outcome<Dataset> {
    if !dir.is_dir() {
        return Err(io_context(dir, std::io::ErrorKind::NotFound.into()));
    }
    Ok(Dataset::read_from(dir)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| io_context(path, e))?;
    Ok(serde_json::from_str(&text).map_err(wordsem::Error::from)?)
}

fn progress(log: &EpochLog) {
    eprintln!(
        "epoch {:>3}  lr {:.5}  loss {:.4}  tries {:.2}  zero-update {:.3}",
        log.epoch, log.learning_rate, log.mean_loss, log.mean_tries, log.zero_update_fraction
    );
}

fn resolve_train(flags: &TrainFlags) -> Outcome<TrainConfig> {
    let mut cfg = match &flags.config {
        Some(p) => read_json(p)?,
        None => TrainConfig {
            dropout: false,
            ..TrainConfig::default()
        },
    };
    if let Some(v) = flags.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = flags.lr {
        cfg.learning_rate = v;
    }
    if let Some(v) = flags.momentum {
        cfg.momentum = v;
    }
    if let Some(v) = flags.weight_decay {
        cfg.weight_decay = v;
    }
    if let Some(v) = flags.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = flags.decay_period {
        cfg.lr_decay_period = Some(v);
    }
    if let Some(v) = flags.dropout {
        cfg.dropout = v == Switch::On;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_eval(flags: &EvalFlags) -> Outcome<EvalOptions> {
    let mut opts = EvalOptions {
        image_queries: flags.queries,
        seed: flags.seed,
        ..EvalOptions::default()
    };
    if let Some(tasks) = &flags.tasks {
        opts.tasks = tasks
            .iter()
            .map(|t| {
                serde_json::from_value::<TaskKind>(serde_json::Value::String(t.trim().to_string()))
                    .map_err(|_| usage(format!("unknown task {t:?}")))
            })
            .collect::<Outcome<_>>()?;
    }
    Ok(opts)
}

fn write_snapshots(dir: &Path, snapshots: &[(usize, Network<f32>)]) -> Outcome {
    for (epoch, net) in snapshots {
        save_checkpoint(net, &dir.join(format!("net.epoch{epoch}.bin")))?;
    }
    Ok(())
}

fn eval_table(result: &EvalResult) -> Table {
    let mut t = Table::new(&["task", "map", "p@1", "p@10", "p@50", "r-precision", "queries", "excluded"]);
    for s in &result.tasks {
        t.row(vec![
            s.task.clone(),
            num(s.map),
            num(s.p_at_1),
            num(s.p_at_10),
            num(s.p_at_50),
            num(s.r_precision),
            s.evaluated.to_string(),
            s.excluded.to_string(),
        ]);
    }
    t
}

#[derive(Serialize)]
struct MineResolved<'a> {
    taxonomy: TaxonomySource,
    words: WordSource,
    level: u32,
    depth_offset: u32,
    k: usize,
    out: &'a Path,
}

pub fn mine(a: &MineArgs, force: bool) -> Outcome {
    let taxonomy = match (&a.index, &a.data, &a.mini, a.builtin_taxonomy) {
        (Some(index), Some(data), None, None) => TaxonomySource::Wndb {
            index: index.clone(),
            data: data.clone(),
        },
        (None, None, Some(path), None) => TaxonomySource::Mini { path: path.clone() },
        (None, None, None, Some(b)) => TaxonomySource::Builtin {
            name: serde_json::to_value(b).unwrap().as_str().unwrap().to_string(),
        },
        _ => return Err(usage("give one taxonomy: --index with --data, --mini, or --builtin-taxonomy")),
    };
    let words = match (&a.words, a.builtin_words) {
        (Some(path), None) => WordSource::File { path: path.clone() },
        (None, Some(b)) => WordSource::Builtin {
            name: serde_json::to_value(b).unwrap().as_str().unwrap().to_string(),
        },
        _ => return Err(usage("give one word list: --words or --builtin-words")),
    };
    let level = a
        .level
        .checked_sub(a.depth_offset)
        .ok_or_else(|| usage(format!("level {} is above the root at depth offset {}", a.level, a.depth_offset)))?;
    echo(
        "mine",
        &MineResolved {
            taxonomy: taxonomy.clone(),
            words: words.clone(),
            level,
            depth_offset: a.depth_offset,
            k: a.topk,
            out: &a.out,
        },
    )?;
    guard_file(&a.out, force)?;

    let vocab = build_vocabulary(&taxonomy.load()?, &words.load()?, level, a.topk)?;
    fs::write(&a.out, vocab.to_json()?)?;
    let s = &vocab.stats;
    eprintln!(
        "{} input words, {} retained, {} not in taxonomy, {} multi-word skipped, {} without a concept at level {}, \
         {} dropped outside top K; {:.2} concepts per word (max {})",
        s.input_words,
        s.retained_words,
        s.not_in_taxonomy,
        s.multi_word_skipped,
        s.no_concept_at_level,
        level,
        s.dropped_outside_top_k,
        s.mean_concepts_per_word,
        s.max_concepts_per_word
    );
    let mut t = Table::new(&["index", "label", "id", "population"]);
    for (i, c) in vocab.concepts.iter().enumerate() {
        t.row(vec![i.to_string(), c.label.clone(), c.id.clone(), c.population.to_string()]);
    }
    t.print();
    Ok(())
}

pub fn canvas_of(preset: Preset) -> Canvas {
    match preset {
        Preset::Desk => Canvas::DESK,
        Preset::Paper => Canvas::PAPER,
    }
}

pub fn synth(a: &SynthArgs, force: bool) -> Outcome {
    let distortion = match &a.distortion {
        Some(p) => read_json(p)?,
        None => DistortionConfig::default(),
    };
    let cfg = DatasetConfig {
        per_word: a.per_word,
        val_replicas: a.val_replicas,
        canvas: canvas_of(a.preset),
        distortion,
        seed: a.seed,
    };
    echo("synth", &json!({"vocab": a.vocab, "dataset": cfg, "out": a.out}))?;
    cfg.validate()?;
    let vocab = load_vocab(&a.vocab)?;
    guard_dir(&a.out, force)?;
    let ds = build_dataset(&vocab, &cfg)?;
    ds.write_to(&a.out)?;
    let mut t = Table::new(&["split", "images"]);
    for (name, split) in [("train", Split::Train), ("val", Split::Val)] {
        t.row(vec![name.into(), ds.indices(split).len().to_string()]);
    }
    t.print();
    Ok(())
}

fn epoch_table(epochs: &[EpochLog]) -> Table {
    let mut t = Table::new(&["epoch", "lr", "loss", "tries", "zero-update"]);
    for e in epochs {
        t.row(vec![
            e.epoch.to_string(),
            format!("{:.5}", e.learning_rate),
            num(e.mean_loss),
            format!("{:.2}", e.mean_tries),
            num(e.zero_update_fraction),
        ]);
    }
    t
}

pub fn train(a: &TrainArgs, force: bool) -> Outcome {
    let cfg = resolve_train(&a.train)?;
    echo(
        "train",
        &json!({"vocab": a.vocab, "data": a.data, "preset": a.preset, "train": cfg, "out": a.out}),
    )?;
    let vocab = load_vocab(&a.vocab)?;
    let ds = load_data(&a.data)?;
    let spec = net_spec_for(a.preset.name(), vocab.k(), ds.canvas())?;
    guard_dir(&a.out, force)?;

    let mut sw = Stopwatch::default();
    let net = Network::init(&spec, cfg.seed)?;
    let run = sw.time("train", || run_training(net, &ds, &cfg, progress))?;
    fs::create_dir_all(&a.out)?;
    save_checkpoint(&run.net, &a.out.join(CHECKPOINT_FILE))?;
    write_snapshots(&a.out, &run.snapshots)?;
    let results = json!({
        "k": vocab.k(),
        "parameters": run.net.num_parameters(),
        "training_images": ds.indices(Split::Train).len(),
        "snapshots": run.snapshots.iter().map(|s| s.0).collect::<Vec<_>>(),
    });
    let mut report = RunReport::new("train", &json!({"preset": a.preset, "train": cfg}), &results)?;
    report.train = Some(run.summary.clone());
    report.timings = sw.into_timings();
    report.write_to(&a.out)?;
    epoch_table(&run.summary.epochs).print();
    Ok(())
}

pub fn eval(a: &EvalArgs, force: bool) -> Outcome {
    let opts = resolve_eval(&a.eval)?;
    echo(
        "eval",
        &json!({"checkpoint": a.checkpoint, "vocab": a.vocab, "data": a.data, "eval": opts, "out": a.out}),
    )?;
    let net = load_net(&a.checkpoint)?;
    let vocab = load_vocab(&a.vocab)?;
    check_k(&net, &vocab)?;
    let ds = load_data(&a.data)?;
    guard_dir(&a.out, force)?;

    let mut sw = Stopwatch::default();
    let inputs = test_inputs(&ds);
    let result = sw.time("evaluate", || evaluate(&net, &inputs, &opts))?;
    let space = sw.time("extract", || extract(&net, &inputs))?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join(EMBEDDINGS_FILE), EmbeddingExport::from_space(&space).encode()?)?;
    let mut report = RunReport::new("eval", &opts, &result)?;
    report.per_query = result.per_query.clone();
    report.timings = sw.into_timings();
    report.write_to(&a.out)?;
    eval_table(&result).print();
    Ok(())
}

pub fn crop_eval(a: &CropEvalArgs, force: bool) -> Outcome {
    echo("crop-eval", a)?;
    let net = load_net(&a.checkpoint)?;
    let vocab = load_vocab(&a.vocab)?;
    check_k(&net, &vocab)?;
    let ds = load_data(&a.data)?;
    guard_dir(&a.out, force)?;

    let images: Vec<_> = ds
        .indices(Split::Val)
        .into_iter()
        .map(|i| (ds.records[i].id, &ds.images[i]))
        .collect();
    let report = crop_robustness(&net, &images, a.max_crop, a.seed)?;
    let mut run = RunReport::new("crop-eval", &json!({"max_crop": a.max_crop, "seed": a.seed}), &report)?;
    run.per_query = report.cropped.per_query.clone();
    run.write_to(&a.out)?;
    let mut t = Table::new(&["task", "clean", "cropped", "ratio"]);
    for m in &report.ratios {
        t.row(vec![
            m.task.clone(),
            num(m.clean),
            num(m.cropped),
            m.ratio.map(num).unwrap_or_else(|| "undefined".into()),
        ]);
    }
    t.print();
    eprintln!("smallest retained area fraction: {:.4}", report.min_retained_fraction);
    Ok(())
}

pub fn zeroshot(a: &ZeroshotArgs, force: bool) -> Outcome {
    let mut spec = match &a.spec {
        Some(p) => ExperimentSpec::from_json(&fs::read_to_string(p).map_err(|e| io_context(p, e))?)?,
        None => ExperimentSpec::desk(a.seed),
    };
    if let Some(e) = a.epochs {
        spec.train.epochs = e;
    }
    spec.validate()?;
    echo("zeroshot", &spec)?;
    guard_dir(&a.out, force)?;

    let run = run_zero_shot(&spec, progress)?;
    fs::create_dir_all(&a.out)?;
    save_checkpoint(&run.net, &a.out.join(CHECKPOINT_FILE))?;
    fs::write(a.out.join(VOCAB_FILE), run.vocab.to_json()?)?;
    let r = &run.report;
    let mut report = RunReport::new("zeroshot", &spec, r)?;
    report.train = Some(r.train.clone());
    report.per_query = r.unseen.per_query.clone();
    report.write_to(&a.out)?;

    let mut t = Table::new(&["images", "image-to-concept", "concept-to-image"]);
    for (name, res) in [("seen words", &r.seen), ("unseen words", &r.unseen)] {
        let get = |task: &str| res.task(task).map(|s| num(s.map)).unwrap_or_else(|| "-".into());
        t.row(vec![name.into(), get("image-to-concept"), get("concept-to-image")]);
    }
    t.row(vec!["chance".into(), num(r.chance_map), "-".into()]);
    t.print();
    eprintln!(
        "unseen / chance = {:.2}; test words: {}",
        r.unseen_over_chance,
        r.test_words.join(", ")
    );
    Ok(())
}

pub fn finetune(a: &FinetuneArgs, force: bool) -> Outcome {
    let cfg = resolve_train(&a.train)?;
    let opts = resolve_eval(&a.eval)?;
    echo(
        "finetune",
        &json!({
            "checkpoint": a.checkpoint, "vocab": a.vocab, "new_vocab": a.new_vocab,
            "data": a.data, "train": cfg, "eval": opts, "out": a.out,
        }),
    )?;
    let net = load_net(&a.checkpoint)?;
    let old = load_vocab(&a.vocab)?;
    let new = load_vocab(&a.new_vocab)?;
    let ds = load_data(&a.data)?;
    guard_dir(&a.out, force)?;

    let run = run_finetune(&net, &old, &new, &ds, &cfg, &opts, progress)?;
    fs::create_dir_all(&a.out)?;
    save_checkpoint(&run.net, &a.out.join(CHECKPOINT_FILE))?;
    write_snapshots(&a.out, &run.snapshots)?;
    let r = &run.report;
    let mut report = RunReport::new("finetune", &json!({"train": cfg, "eval": opts}), r)?;
    report.train = Some(r.train.clone());
    report.per_query = r.after.per_query.clone();
    report.write_to(&a.out)?;

    let mut t = Table::new(&["task", "before", "after"]);
    for s in &r.before.tasks {
        let after = r.after.task(&s.task).map(|x| num(x.map)).unwrap_or_else(|| "-".into());
        t.row(vec![s.task.clone(), num(s.map), after]);
    }
    t.print();
    Ok(())
}

fn ranked_table(list: &RankedList, top: usize, label: impl Fn(u32) -> String) -> Table {
    let mut t = Table::new(&["rank", "item", "score", "relevant"]);
    for (i, item) in list.top(top).iter().enumerate() {
        t.row(vec![
            (i + 1).to_string(),
            label(item.id),
            format!("{:.6}", item.score),
            if item.relevant { "yes" } else { "no" }.into(),
        ]);
    }
    t
}

pub fn query(a: &QueryArgs) -> Outcome {
    echo("query", a)?;
    if a.top == 0 {
        return Err(usage("--top must be at least 1"));
    }
    let net = load_net(&a.checkpoint)?;
    let vocab = load_vocab(&a.vocab)?;
    check_k(&net, &vocab)?;
    let concept_label = |id: u32| vocab.concepts[id as usize].label.clone();

    match a.task {
        QueryTask::ImageToConcept => {
            let (pixels, concepts, id): (Vec<f32>, Vec<usize>, u32) = match (&a.image, &a.data, a.id) {
                (Some(path), _, _) => {
                    let raster = decode_raster(&fs::read(path).map_err(|e| io_context(path, e))?)?;
                    if a.index >= raster.count() {
                        return Err(usage(format!("--index {} but the raster holds {} images", a.index, raster.count())));
                    }
                    (raster.image(a.index).to_vec(), Vec::new(), a.index as u32)
                }
                (None, Some(dir), Some(id)) => {
                    let ds = load_data(dir)?;
                    let i = find_image(&ds, id)?;
                    (ds.images[i].pixels.clone(), ds.records[i].concept_ids.clone(), id)
                }
                _ => return Err(usage("image-to-concept needs --image, or --data with --id")),
            };
            let input = ImageInput {
                id,
                pixels: &pixels,
                concepts: &concepts,
            };
            let list = extract(&net, &[input])?.image_to_concept(id)?;
            ranked_table(&list, a.top, concept_label).print();
        }
        QueryTask::ConceptToImage => {
            let (Some(dir), Some(expr)) = (&a.data, &a.expr) else {
                return Err(usage("concept-to-image needs --data and --expr"));
            };
            let parsed = parse_concept_expression(expr, &vocab)?;
            let ds = load_data(dir)?;
            let space = extract(&net, &all_inputs(&ds))?;
            let list = space.concept_arithmetic_query(&parsed.add, &parsed.sub)?;
            ranked_table(&list, a.top, |id| word_label(&ds, id)).print();
        }
        QueryTask::ImageToImage => {
            let (Some(dir), Some(id)) = (&a.data, a.id) else {
                return Err(usage("image-to-image needs --data and --id"));
            };
            let ds = load_data(dir)?;
            find_image(&ds, id)?;
            let space = extract(&net, &all_inputs(&ds))?;
            let list = space.image_to_image(id, Feature::Phi)?;
            ranked_table(&list, a.top, |i| word_label(&ds, i)).print();
        }
    }
    Ok(())
}

fn all_inputs(ds: &Dataset) -> Vec<ImageInput<'_>> {
    ds.records
        .iter()
        .zip(&ds.images)
        .map(|(r, img)| ImageInput {
            id: r.id,
            pixels: &img.pixels,
            concepts: &r.concept_ids,
        })
        .collect()
}

fn find_image(ds: &Dataset, id: u32) -> Outcome<usize> {
    ds.records
        .iter()
        .position(|r| r.id == id)
        .ok_or_else(|| Failure::Library(wordsem::Error::Lookup(format!("no image with id {id} in the dataset"))))
}

fn word_label(ds: &Dataset, id: u32) -> String {
    match ds.records.iter().find(|r| r.id == id) {
        Some(r) => format!("{id}:{}", r.word),
        None => id.to_string(),
    }
}
