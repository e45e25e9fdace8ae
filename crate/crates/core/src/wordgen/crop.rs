//! Random crops standing in for imperfect text localization.
//!
//! A total horizontal removal `f_h ~ U[0, max_frac]` is split between the
//! left and right edges by `u ~ U[0, 1]`; the vertical removal is drawn the
//! same way, independently. The crop box therefore keeps a fraction
//! `(1 - f_h)(1 - f_v) >= (1 - max_frac)^2` of the image, which is also its
//! IoU with the full frame.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::render::WordImage;
use crate::error::{Error, Result};
use crate::rng::{mix, rng_from, tag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropParams {
    /// Total fraction removed across left + right.
    pub horizontal: f64,
    /// Share of the horizontal removal taken from the left edge.
    pub horizontal_split: f64,
    pub vertical: f64,
    pub vertical_split: f64,
}

/// Crop rectangle in continuous source-pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropBox {
    pub top: f64,
    pub left: f64,
    pub height: f64,
    pub width: f64,
}

impl CropParams {
    pub const NONE: CropParams = CropParams {
        horizontal: 0.0,
        horizontal_split: 0.0,
        vertical: 0.0,
        vertical_split: 0.0,
    };

    pub fn sample<R: Rng + ?Sized>(max_frac: f64, rng: &mut R) -> Result<Self> {
        check_max_frac(max_frac)?;
        Ok(Self {
            horizontal: rng.random::<f64>() * max_frac,
            horizontal_split: rng.random(),
            vertical: rng.random::<f64>() * max_frac,
            vertical_split: rng.random(),
        })
    }

    /// Fraction of the source area kept by the crop (its IoU with the frame).
    pub fn retained_fraction(&self) -> f64 {
        (1.0 - self.horizontal) * (1.0 - self.vertical)
    }

    pub fn crop_box(&self, height: usize, width: usize) -> CropBox {
        let (h, w) = (height as f64, width as f64);
        CropBox {
            top: self.vertical * self.vertical_split * h,
            left: self.horizontal * self.horizontal_split * w,
            height: (1.0 - self.vertical) * h,
            width: (1.0 - self.horizontal) * w,
        }
    }
}

fn check_max_frac(max_frac: f64) -> Result<()> {
    if !(0.0..1.0).contains(&max_frac) {
        return Err(Error::Param(format!("max crop fraction {max_frac} outside [0, 1)")));
    }
    Ok(())
}

/// Crop parameters for `seed`, the same ones [`random_crop`] uses.
pub fn sample_crop(max_frac: f64, seed: u64) -> Result<CropParams> {
    CropParams::sample(max_frac, &mut rng_from(mix(seed, &[tag::CROP])))
}

pub fn random_crop(image: &WordImage, max_frac: f64, seed: u64) -> Result<WordImage> {
    crop_with(image, &sample_crop(max_frac, seed)?)
}

/// Crops with explicit parameters and resizes back to the source canvas
/// using nearest-neighbour sampling of the continuous box.
pub fn crop_with(image: &WordImage, params: &CropParams) -> Result<WordImage> {
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    if !(in_unit(params.horizontal_split) && in_unit(params.vertical_split))
        || !(0.0..1.0).contains(&params.horizontal)
        || !(0.0..1.0).contains(&params.vertical)
    {
        return Err(Error::Param(format!("invalid crop parameters {params:?}")));
    }
    let (h, w) = (image.height, image.width);
    let b = params.crop_box(h, w);
    if b.height < 1.0 || b.width < 1.0 {
        return Err(Error::Param(format!(
            "crop of {:.3}x{:.3} pixels leaves no full row or column",
            b.height, b.width
        )));
    }
    let sample = |start: f64, len: f64, i: usize, n: usize, limit: usize| -> usize {
        let pos = start + (i as f64 + 0.5) * len / n as f64;
        (pos.floor() as usize).min(limit - 1)
    };
    let cols: Vec<usize> = (0..w).map(|x| sample(b.left, b.width, x, w, w)).collect();
    let mut pixels = Vec::with_capacity(h * w);
    for y in 0..h {
        let sy = sample(b.top, b.height, y, h, h);
        let row = &image.pixels[sy * w..][..w];
        pixels.extend(cols.iter().map(|&x| row[x]));
    }
    Ok(WordImage {
        pixels,
        ..image.clone()
    })
}
