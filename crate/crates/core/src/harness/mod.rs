//! End-to-end experiments: training runs, retrieval evaluation, crop
//! robustness, zero-shot word splits, fine-tuning to a larger K, and the
//! reports they write.

mod config;
mod eval;
mod finetune;
mod pipeline;
mod report;
mod train;
mod zeroshot;

pub use config::{
    net_spec_for, EvalOptions, ExperimentSpec, FinetuneConfig, TaskKind, TaxonomySource, TrainConfig, WordSource,
    ZeroShotConfig,
};
pub use eval::{
    chance_map, check_k, crop_robustness, crop_seed, dataset_inputs, evaluate, evaluate_space, test_inputs,
    CropReport, EvalResult, MetricRatio, TaskSummary,
};
pub use finetune::{check_concept_prefix, run_finetune, FinetuneReport, FinetuneRun};
pub use pipeline::{prepare, run_training, TrainingRun};
pub use report::{
    RunReport, Stopwatch, Timing, METRICS_FILE, REPORT_FILE, REPORT_FORMAT, TIMINGS_FILE, TRAIN_LOG_FILE,
};
pub use train::{train_network, EpochLog, TrainSummary};
pub use zeroshot::{run_zero_shot, run_zero_shot_with, ZeroShotReport, ZeroShotRun, MIN_ZERO_SHOT_WORDS};
