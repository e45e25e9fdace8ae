//! Synthetic word images: glyph rendering, distortions, random crops,
//! dataset assembly and word-level splits.

mod crop;
mod dataset;
mod font;
mod raster;
mod render;
mod split;

pub use crop::{crop_with, random_crop, sample_crop, CropBox, CropParams};
pub use dataset::{
    build_dataset, image_seed, parse_manifest, Dataset, DatasetConfig, ImageRecord, ManifestHeader, Split,
    MANIFEST_FILE, MANIFEST_FORMAT, RASTER_FILE,
};
pub use font::{GlyphFont, GLYPH_HEIGHT, GLYPH_SPACING, GLYPH_WIDTH};
pub use raster::{decode_raster, encode_raster, Raster, RASTER_HEADER_LEN, RASTER_MAGIC};
pub use render::{render, resize_nearest, Canvas, DistortionConfig, WordImage, STRIP_MARGIN};
pub use split::{disjoint_word_split, WordSplit};
