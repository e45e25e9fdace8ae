use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::embed::Feature;
use crate::error::{Error, Result};
use crate::taxonomy::{
    build_vocabulary, load_mini_taxonomy, parse_wndb, parse_word_list, ConceptVocabulary, SynsetGraph, DESK_FIXTURE,
    DESK_WORDS, DESK_WORDS_EXTENDED, FIG3_FIXTURE,
};
use crate::tinynet::{NetSpec, SgdParams};
use crate::wordgen::{Canvas, DatasetConfig, DistortionConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TaxonomySource {
    /// `fig3` or `desk`.
    Builtin { name: String },
    Mini { path: PathBuf },
    Wndb { index: PathBuf, data: PathBuf },
}

impl TaxonomySource {
    pub fn load(&self) -> Result<SynsetGraph> {
        match self {
            TaxonomySource::Builtin { name } => match name.as_str() {
                "fig3" => Ok(load_mini_taxonomy(FIG3_FIXTURE)?.into_graph()),
                "desk" => Ok(load_mini_taxonomy(DESK_FIXTURE)?.into_graph()),
                other => Err(Error::Config(format!("unknown builtin taxonomy {other:?} (fig3 or desk)"))),
            },
            TaxonomySource::Mini { path } => Ok(load_mini_taxonomy(&fs::read_to_string(path)?)?.into_graph()),
            TaxonomySource::Wndb { index, data } => parse_wndb(&fs::read(index)?, &fs::read(data)?),
        }
    }

    fn paths(&self) -> Vec<&PathBuf> {
        match self {
            TaxonomySource::Builtin { .. } => vec![],
            TaxonomySource::Mini { path } => vec![path],
            TaxonomySource::Wndb { index, data } => vec![index, data],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WordSource {
    /// `desk` or `desk-extended`.
    Builtin { name: String },
    File { path: PathBuf },
    List { words: Vec<String> },
}

impl WordSource {
    pub fn load(&self) -> Result<Vec<String>> {
        match self {
            WordSource::Builtin { name } => match name.as_str() {
                "desk" => Ok(parse_word_list(DESK_WORDS)),
                "desk-extended" => Ok(parse_word_list(DESK_WORDS_EXTENDED)),
                other => Err(Error::Config(format!(
                    "unknown builtin word list {other:?} (desk or desk-extended)"
                ))),
            },
            WordSource::File { path } => Ok(parse_word_list(&fs::read_to_string(path)?)),
            WordSource::List { words } => Ok(words.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub dropout: bool,
    /// Learning-rate multiplier applied at every decay step.
    pub lr_decay_factor: f64,
    /// Epochs between decay steps; unset means one step at two thirds of
    /// training.
    pub lr_decay_period: Option<usize>,
    /// Negative draws per WARP update; unset means K − 1.
    pub warp_budget: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            weight_decay: 5e-4,
            batch_size: 32,
            epochs: 30,
            seed: 0,
            dropout: true,
            lr_decay_factor: 0.1,
            lr_decay_period: None,
            warp_budget: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Param(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Param(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Param(format!("weight decay {} must be >= 0", self.weight_decay)));
        }
        if self.batch_size == 0 {
            return Err(Error::Param("batch size must be >= 1".into()));
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return Err(Error::Param(format!("decay factor {} outside (0, 1]", self.lr_decay_factor)));
        }
        if self.lr_decay_period == Some(0) {
            return Err(Error::Param("decay period must be >= 1".into()));
        }
        if self.warp_budget == Some(0) {
            return Err(Error::Param("WARP budget must be >= 1".into()));
        }
        Ok(())
    }

    pub fn decay_period(&self) -> usize {
        self.lr_decay_period
            .unwrap_or_else(|| ((2 * self.epochs) as f64 / 3.0).round() as usize)
            .max(1)
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate * self.lr_decay_factor.powi((epoch / self.decay_period()) as i32)
    }

    /// Epochs `e` in `1..epochs` at which the learning rate changes.
    pub fn decay_boundaries(&self) -> Vec<usize> {
        if self.lr_decay_factor == 1.0 {
            return Vec::new();
        }
        let p = self.decay_period();
        (1..self.epochs).filter(|e| e % p == 0).collect()
    }

    pub fn sgd(&self, epoch: usize) -> SgdParams {
        SgdParams {
            learning_rate: self.learning_rate_at(epoch),
            momentum: self.momentum,
            weight_decay: self.weight_decay,
        }
    }
}

/// Which retrieval tasks an evaluation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    ImageToConcept,
    ConceptToImage,
    ImageToImage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalOptions {
    pub tasks: Vec<TaskKind>,
    /// Image-to-image queries sampled from the evaluated images.
    pub image_queries: usize,
    pub image_features: Vec<Feature>,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            tasks: vec![TaskKind::ImageToConcept, TaskKind::ConceptToImage, TaskKind::ImageToImage],
            image_queries: 200,
            image_features: vec![Feature::Phi, Feature::Scores],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroShotConfig {
    pub train_fraction: f64,
    pub chance_trials: usize,
}

impl Default for ZeroShotConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.9,
            chance_trials: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinetuneConfig {
    pub k: usize,
    #[serde(default)]
    pub words: Option<WordSource>,
    #[serde(default)]
    pub train: TrainConfig,
}

fn default_level() -> u32 {
    2
}
fn default_per_word() -> usize {
    20
}
fn default_val_replicas() -> usize {
    4
}
fn default_canvas() -> Canvas {
    Canvas::DESK
}
fn default_preset() -> String {
    "desk".into()
}
fn default_max_crop() -> f64 {
    0.2
}

/// Everything needed to reproduce an experiment from scratch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub taxonomy: TaxonomySource,
    #[serde(default = "default_level")]
    pub level: u32,
    pub k: usize,
    pub words: WordSource,
    #[serde(default = "default_per_word")]
    pub per_word: usize,
    #[serde(default = "default_val_replicas")]
    pub val_replicas: usize,
    #[serde(default = "default_canvas")]
    pub canvas: Canvas,
    #[serde(default)]
    pub distortion: DistortionConfig,
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalOptions,
    #[serde(default = "default_max_crop")]
    pub max_crop: f64,
    #[serde(default)]
    pub zero_shot: ZeroShotConfig,
    #[serde(default)]
    pub finetune: Option<FinetuneConfig>,
    /// Seed for rendering, splitting, crops and query sampling.
    pub seed: u64,
}

impl ExperimentSpec {
    /// Desk-scale defaults over the builtin taxonomy and word list. Both
    /// seeds are set to `seed` and dropout is off: with both 0.5 dropout
    /// layers active the desk network needs about twice the 30 epochs to
    /// leave chance level.
    pub fn desk(seed: u64) -> Self {
        Self {
            taxonomy: TaxonomySource::Builtin { name: "desk".into() },
            level: default_level(),
            k: 8,
            words: WordSource::Builtin { name: "desk".into() },
            per_word: default_per_word(),
            val_replicas: default_val_replicas(),
            canvas: default_canvas(),
            distortion: DistortionConfig::default(),
            preset: default_preset(),
            train: TrainConfig {
                seed,
                dropout: false,
                ..TrainConfig::default()
            },
            eval: EvalOptions::default(),
            max_crop: default_max_crop(),
            zero_shot: ZeroShotConfig::default(),
            finetune: None,
            seed,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let mut paths = self.taxonomy.paths();
        if let WordSource::File { path } = &self.words {
            paths.push(path);
        }
        if let Some(missing) = paths.into_iter().find(|p| !p.exists()) {
            return Err(Error::Config(format!("{} does not exist", missing.display())));
        }
        if self.k == 0 {
            return Err(Error::Param("K must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.max_crop) {
            return Err(Error::Param(format!("max crop {} outside [0, 1)", self.max_crop)));
        }
        let zs = &self.zero_shot;
        if !(zs.train_fraction > 0.0 && zs.train_fraction < 1.0) || zs.chance_trials == 0 {
            return Err(Error::Param("zero-shot needs a fraction in (0, 1) and at least one trial".into()));
        }
        if let Some(ft) = &self.finetune {
            if ft.k < self.k {
                return Err(Error::Param(format!("finetune K {} is below K {}", ft.k, self.k)));
            }
            ft.train.validate()?;
        }
        self.train.validate()?;
        self.dataset_config().validate()?;
        self.net_spec(self.k)?;
        Ok(())
    }

    pub fn vocabulary(&self) -> Result<ConceptVocabulary> {
        build_vocabulary(&self.taxonomy.load()?, &self.words.load()?, self.level, self.k)
    }

    pub fn dataset_config(&self) -> DatasetConfig {
        DatasetConfig {
            per_word: self.per_word,
            val_replicas: self.val_replicas,
            canvas: self.canvas,
            distortion: self.distortion.clone(),
            seed: self.seed,
        }
    }

    /// The preset network for `k` concepts; its input must match the canvas.
    pub fn net_spec(&self, k: usize) -> Result<NetSpec> {
        net_spec_for(&self.preset, k, self.canvas)
    }
}

pub fn net_spec_for(preset: &str, k: usize, canvas: Canvas) -> Result<NetSpec> {
    let spec = NetSpec::preset(preset, k)?;
    if (spec.input.height, spec.input.width) != (canvas.height, canvas.width) || spec.input.channels != 1 {
        return Err(Error::Config(format!(
            "preset {preset} expects {}x{} images, canvas is {}x{}",
            spec.input.height, spec.input.width, canvas.height, canvas.width
        )));
    }
    Ok(spec)
}
