use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::train::TrainSummary;
use crate::embed::{metrics_csv, QueryMetrics};
use crate::error::Result;
use crate::rng::MIX_FUNCTION_ID;

pub const REPORT_FORMAT: &str = "wordsem-report-v1";
pub const REPORT_FILE: &str = "report.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const TRAIN_LOG_FILE: &str = "train_log.jsonl";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub phase: String,
    pub seconds: f64,
}

/// Records wall-clock durations of named phases.
#[derive(Debug, Default)]
pub struct Stopwatch {
    timings: Vec<Timing>,
}

impl Stopwatch {
    pub fn time<R>(&mut self, phase: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        self.timings.push(Timing {
            phase: phase.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn into_timings(self) -> Vec<Timing> {
        self.timings
    }
}

/// Results of one command. Everything except `timings` is a function of
/// the configuration and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub command: String,
    pub mix: String,
    /// Resolved configuration with defaults filled in.
    pub config: serde_json::Value,
    pub train: Option<TrainSummary>,
    pub results: serde_json::Value,
    #[serde(skip)]
    pub per_query: Vec<QueryMetrics>,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl RunReport {
    pub fn new(command: &str, config: &impl Serialize, results: &impl Serialize) -> Result<Self> {
        Ok(Self {
            format: REPORT_FORMAT.into(),
            command: command.into(),
            mix: MIX_FUNCTION_ID.into(),
            config: serde_json::to_value(config)?,
            train: None,
            results: serde_json::to_value(results)?,
            per_query: Vec::new(),
            timings: Vec::new(),
        })
    }

    pub fn metrics_csv(&self) -> String {
        metrics_csv(&self.per_query)
    }

    pub fn train_log(&self) -> Result<String> {
        let mut out = String::new();
        for e in self.train.iter().flat_map(|t| &t.epochs) {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Writes `report.json`, `metrics.csv`, `train_log.jsonl` and
    /// `timings.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut summary = serde_json::to_string_pretty(self)?;
        summary.push('\n');
        fs::write(dir.join(REPORT_FILE), summary)?;
        fs::write(dir.join(METRICS_FILE), self.metrics_csv())?;
        fs::write(dir.join(TRAIN_LOG_FILE), self.train_log()?)?;
        fs::write(dir.join(TIMINGS_FILE), serde_json::to_string_pretty(&self.timings)? + "\n")?;
        Ok(())
    }
}
