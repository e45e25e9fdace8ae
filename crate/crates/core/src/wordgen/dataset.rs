use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::raster::{decode_raster, encode_raster, Raster};
use super::render::{render, Canvas, DistortionConfig, WordImage};
use crate::error::{Error, Result};
use crate::rng::{mix, tag, MIX_FUNCTION_ID};
use crate::taxonomy::ConceptVocabulary;

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const RASTER_FILE: &str = "images.lwimg";
pub const MANIFEST_FORMAT: &str = "wordsem-dataset-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub per_word: usize,
    /// The last `val_replicas` renders of every word form the validation split.
    pub val_replicas: usize,
    pub canvas: Canvas,
    pub distortion: DistortionConfig,
    pub seed: u64,
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.per_word == 0 {
            return Err(Error::Param("per_word must be at least 1".into()));
        }
        if self.val_replicas > self.per_word {
            return Err(Error::Param("val_replicas exceeds per_word".into()));
        }
        self.distortion.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
}

/// First line of a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestHeader {
    pub format: String,
    pub canvas: Canvas,
    pub distortion: DistortionConfig,
    pub seed: u64,
    pub mix: String,
    pub per_word: usize,
    pub val_replicas: usize,
    pub count: usize,
    pub raster: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub id: u32,
    pub word: String,
    pub concept_ids: Vec<usize>,
    pub seed: u64,
    pub replica: usize,
    pub split: Split,
    /// Byte offset of the image inside the raster file.
    pub offset: u64,
}

/// A rendered dataset: manifest plus pixels, records ordered by
/// (word index, replica index).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: ManifestHeader,
    pub records: Vec<ImageRecord>,
    pub images: Vec<WordImage>,
}

/// Seed of replica `replica` of the `word_index`-th word.
pub fn image_seed(seed: u64, word_index: usize, replica: usize) -> u64 {
    mix(seed, &[tag::RENDER, word_index as u64, replica as u64])
}

pub fn build_dataset(vocab: &ConceptVocabulary, config: &DatasetConfig) -> Result<Dataset> {
    config.validate()?;
    if vocab.annotations.is_empty() {
        return Err(Error::Config("vocabulary has no annotated words".into()));
    }
    let jobs: Vec<(usize, &str, &[usize], usize)> = vocab
        .annotations
        .iter()
        .enumerate()
        .flat_map(|(wi, (word, ids))| (0..config.per_word).map(move |r| (wi, word.as_str(), ids.as_slice(), r)))
        .collect();
    if jobs.len() > u32::MAX as usize {
        return Err(Error::Config("dataset too large".into()));
    }

    let images = jobs
        .par_iter()
        .map(|&(wi, word, ids, r)| {
            render(word, config.canvas, &config.distortion, image_seed(config.seed, wi, r))
                .map(|img| img.with_concepts(ids.to_vec()))
        })
        .collect::<Result<Vec<_>>>()?;

    let first_val = config.per_word - config.val_replicas;
    let records = jobs
        .iter()
        .zip(&images)
        .enumerate()
        .map(|(i, (&(_, word, ids, r), img))| ImageRecord {
            id: i as u32,
            word: word.to_string(),
            concept_ids: ids.to_vec(),
            seed: img.render_seed,
            replica: r,
            split: if r >= first_val { Split::Val } else { Split::Train },
            offset: Raster::offset_of(i, config.canvas.height, config.canvas.width),
        })
        .collect();

    Ok(Dataset {
        header: ManifestHeader {
            format: MANIFEST_FORMAT.into(),
            canvas: config.canvas,
            distortion: config.distortion.clone(),
            seed: config.seed,
            mix: MIX_FUNCTION_ID.into(),
            per_word: config.per_word,
            val_replicas: config.val_replicas,
            count: images.len(),
            raster: RASTER_FILE.into(),
        },
        records,
        images,
    })
}

/// Parses a manifest into its header and records, checking internal
/// consistency (count, ids, offsets, non-empty concept sets).
pub fn parse_manifest(text: &str) -> Result<(ManifestHeader, Vec<ImageRecord>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::parse("manifest", 1, "header", "empty manifest"))?;
    let header: ManifestHeader =
        serde_json::from_str(first).map_err(|e| Error::parse("manifest", 1, "header", e.to_string()))?;
    if header.format != MANIFEST_FORMAT {
        return Err(Error::parse("manifest", 1, "format", format!("unsupported format {:?}", header.format)));
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let rec: ImageRecord =
            serde_json::from_str(line).map_err(|e| Error::parse("manifest", i + 1, "record", e.to_string()))?;
        let expect_id = records.len();
        if rec.id as usize != expect_id {
            return Err(Error::parse("manifest", i + 1, "id", format!("expected id {expect_id}")));
        }
        if rec.concept_ids.is_empty() {
            return Err(Error::parse("manifest", i + 1, "concept_ids", "empty concept set"));
        }
        let expect_offset = Raster::offset_of(expect_id, header.canvas.height, header.canvas.width);
        if rec.offset != expect_offset {
            return Err(Error::parse("manifest", i + 1, "offset", format!("expected {expect_offset}")));
        }
        records.push(rec);
    }
    if records.len() != header.count {
        return Err(Error::parse(
            "manifest",
            1,
            "count",
            format!("header declares {} images, found {}", header.count, records.len()),
        ));
    }
    Ok((header, records))
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn canvas(&self) -> Canvas {
        self.header.canvas
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.split == split)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn manifest_text(&self) -> Result<String> {
        let mut out = serde_json::to_string(&self.header)?;
        out.push('\n');
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn raster_bytes(&self) -> Result<Vec<u8>> {
        let c = self.header.canvas;
        encode_raster(self.images.iter().map(|i| i.pixels.as_slice()), c.height, c.width)
    }

    /// Writes `manifest.jsonl` and `images.lwimg` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(MANIFEST_FILE), self.manifest_text()?)?;
        fs::write(dir.join(&self.header.raster), self.raster_bytes()?)?;
        Ok(())
    }

    pub fn read_from(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let (header, records) = parse_manifest(&text)?;
        if header.raster.contains(['/', '\\']) || header.raster.starts_with('.') {
            return Err(Error::Format(format!("raster name {:?} must be a plain file name", header.raster)));
        }
        let raster = decode_raster(&fs::read(dir.join(&header.raster))?)?;
        Self::assemble(header, records, &raster)
    }

    pub fn assemble(header: ManifestHeader, records: Vec<ImageRecord>, raster: &Raster) -> Result<Self> {
        let c = header.canvas;
        if raster.height != c.height || raster.width != c.width {
            return Err(Error::Format("raster dimensions disagree with manifest canvas".into()));
        }
        if raster.count() != records.len() {
            return Err(Error::Format(format!(
                "raster holds {} images, manifest lists {}",
                raster.count(),
                records.len()
            )));
        }
        let images = records
            .iter()
            .enumerate()
            .map(|(i, r)| WordImage {
                pixels: raster.image(i).to_vec(),
                height: c.height,
                width: c.width,
                word: r.word.clone(),
                concept_ids: r.concept_ids.clone(),
                render_seed: r.seed,
            })
            .collect();
        Ok(Dataset {
            header,
            records,
            images,
        })
    }
}
