use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "wordsem", version, about = "Map word images to semantic concepts")]
pub struct Cli {
    /// Cap on worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Replace existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine a concept vocabulary from a taxonomy and a word list.
    Mine(MineArgs),
    /// Render a synthetic word-image dataset for a vocabulary.
    Synth(SynthArgs),
    /// Train a network on a dataset's training split.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset's held-out renders.
    Eval(EvalArgs),
    /// Compare retrieval on clean and randomly cropped held-out renders.
    CropEval(CropEvalArgs),
    /// Train on 90% of the words and evaluate on the unseen rest.
    Zeroshot(ZeroshotArgs),
    /// Grow a checkpoint to a larger vocabulary and keep training.
    Finetune(FinetuneArgs),
    /// Rank concepts for an image, or images for a concept expression.
    Query(QueryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinTaxonomy {
    Fig3,
    Desk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinWords {
    Desk,
    DeskExtended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Desk,
    Paper,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QueryTask {
    ImageToConcept,
    ConceptToImage,
    ImageToImage,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct MineArgs {
    /// WordNet `index.noun`.
    #[arg(long, requires = "data")]
    pub index: Option<PathBuf>,
    /// WordNet `data.noun`.
    #[arg(long, requires = "index")]
    pub data: Option<PathBuf>,
    /// Taxonomy in the line-based fixture format.
    #[arg(long, conflicts_with_all = ["index", "builtin_taxonomy"])]
    pub mini: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "index")]
    pub builtin_taxonomy: Option<BuiltinTaxonomy>,
    /// One word per line.
    #[arg(long)]
    pub words: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "words")]
    pub builtin_words: Option<BuiltinWords>,
    /// Depth level of the concepts.
    #[arg(long)]
    pub level: u32,
    /// Number of concepts to keep (K).
    #[arg(long)]
    pub topk: usize,
    /// Depth of the root in your level convention; the root is level 0 here.
    #[arg(long, default_value_t = 0)]
    pub depth_offset: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub per_word: usize,
    /// Renders per word held out for evaluation.
    #[arg(long, default_value_t = 4)]
    pub val_replicas: usize,
    /// Canvas of the network preset the images are for.
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,
    /// Distortion ranges as JSON (default: built-in ranges).
    #[arg(long)]
    pub distortion: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Epochs between learning-rate decay steps.
    #[arg(long)]
    pub decay_period: Option<usize>,
    #[arg(long, value_enum)]
    pub dropout: Option<Switch>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training configuration as JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub vocab: PathBuf,
    /// Dataset directory written by `synth`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct EvalFlags {
    /// Comma-separated subset of image-to-concept, concept-to-image, image-to-image.
    #[arg(long, value_delimiter = ',')]
    pub tasks: Option<Vec<String>>,
    /// Image-to-image queries to sample.
    #[arg(long, default_value_t = 200)]
    pub queries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub eval: EvalFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct CropEvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Largest fraction removed per axis.
    #[arg(long, default_value_t = 0.2)]
    pub max_crop: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct ZeroshotArgs {
    /// Experiment specification as JSON (default: the desk experiment).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Master seed when no spec is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct FinetuneArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Vocabulary the checkpoint was trained on.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Larger vocabulary whose first concepts are those of `--vocab`.
    #[arg(long)]
    pub new_vocab: PathBuf,
    /// Dataset rendered from the new vocabulary.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub eval: EvalFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long, value_enum, default_value_t = QueryTask::ImageToConcept)]
    pub task: QueryTask,
    /// Raster file holding the query image(s).
    #[arg(long, conflicts_with = "data")]
    pub image: Option<PathBuf>,
    /// Image of `--image` to query.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Dataset directory to rank images from.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Query image id within `--data`, for image-to-image.
    #[arg(long)]
    pub id: Option<u32>,
    /// Concept expression such as `vertebrate - mammal`, for concept-to-image.
    #[arg(long)]
    pub expr: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}
