use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::font::GlyphFont;
use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Blank border around the glyph strip, wide enough for the default shift.
pub const STRIP_MARGIN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub height: usize,
    pub width: usize,
}

impl Canvas {
    pub const PAPER: Canvas = Canvas { height: 32, width: 100 };
    pub const DESK: Canvas = Canvas { height: 16, width: 48 };

    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width }
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }
}

/// Photometric and geometric jitter applied by [`render`].
///
/// Ranges are inclusive `[low, high]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionConfig {
    pub brightness: [f64; 2],
    pub contrast: [f64; 2],
    pub noise_sigma: [f64; 2],
    pub shift: [i32; 2],
    pub polarity_flip: f64,
}

impl Default for DistortionConfig {
    fn default() -> Self {
        Self {
            brightness: [-0.2, 0.2],
            contrast: [0.8, 1.2],
            noise_sigma: [0.0, 0.05],
            shift: [-2, 2],
            polarity_flip: 0.5,
        }
    }
}

impl DistortionConfig {
    /// No distortion at all: renders are the plain scaled glyph strip.
    pub fn identity() -> Self {
        Self {
            brightness: [0.0, 0.0],
            contrast: [1.0, 1.0],
            noise_sigma: [0.0, 0.0],
            shift: [0, 0],
            polarity_flip: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |name: &str, r: [f64; 2]| {
            if r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] {
                Ok(())
            } else {
                Err(Error::Param(format!("{name} range {r:?} is not well ordered")))
            }
        };
        ordered("brightness", self.brightness)?;
        ordered("contrast", self.contrast)?;
        ordered("noise_sigma", self.noise_sigma)?;
        if self.noise_sigma[0] < 0.0 {
            return Err(Error::Param("noise sigma must be non-negative".into()));
        }
        if self.shift[0] > self.shift[1] {
            return Err(Error::Param(format!("shift range {:?} is not well ordered", self.shift)));
        }
        if !(0.0..=1.0).contains(&self.polarity_flip) {
            return Err(Error::Param("polarity flip probability outside [0, 1]".into()));
        }
        Ok(())
    }
}

/// A grayscale word image with intensities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WordImage {
    pub pixels: Vec<f32>,
    pub height: usize,
    pub width: usize,
    pub word: String,
    pub concept_ids: Vec<usize>,
    pub render_seed: u64,
}

impl WordImage {
    pub fn canvas(&self) -> Canvas {
        Canvas::new(self.height, self.width)
    }

    pub fn with_concepts(mut self, concept_ids: Vec<usize>) -> Self {
        self.concept_ids = concept_ids;
        self
    }
}

/// Nearest-neighbour resize ignoring aspect ratio.
///
/// Destination pixel `d` samples source index `floor((d + 0.5) * src / dst)`.
pub fn resize_nearest(src: &[f32], sh: usize, sw: usize, dh: usize, dw: usize) -> Vec<f32> {
    let map = |d: usize, s: usize, dn: usize| ((2 * d + 1) * s / (2 * dn)).min(s - 1);
    let cols: Vec<usize> = (0..dw).map(|x| map(x, sw, dw)).collect();
    let mut out = Vec::with_capacity(dh * dw);
    for y in 0..dh {
        let row = &src[map(y, sh, dh) * sw..][..sw];
        out.extend(cols.iter().map(|&x| row[x]));
    }
    out
}

/// Renders `word` onto `canvas`.
///
/// Steps, in order: glyph strip with an integer shift, nearest-neighbour
/// resize to the canvas, contrast about mid-gray, brightness offset,
/// additive Gaussian noise, optional polarity flip, clamp to `[0, 1]`.
pub fn render(word: &str, canvas: Canvas, config: &DistortionConfig, seed: u64) -> Result<WordImage> {
    if word.is_empty() {
        return Err(Error::Param("cannot render an empty word".into()));
    }
    if canvas.height == 0 || canvas.width == 0 {
        return Err(Error::Param("canvas must be non-empty".into()));
    }
    config.validate()?;
    let mut rng = rng_from(seed);

    let dy = rng.random_range(config.shift[0]..=config.shift[1]);
    let dx = rng.random_range(config.shift[0]..=config.shift[1]);
    let contrast = uniform(&mut rng, config.contrast);
    let brightness = uniform(&mut rng, config.brightness);
    let sigma = uniform(&mut rng, config.noise_sigma);
    let flip = rng.random::<f64>() < config.polarity_flip;

    let (strip, sh, sw) = GlyphFont::builtin().strip(word, STRIP_MARGIN, dy, dx)?;
    let resized = resize_nearest(&strip, sh, sw, canvas.height, canvas.width);

    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Param(e.to_string()))?;
    let pixels = resized
        .into_iter()
        .map(|p| {
            let mut v = (p as f64 - 0.5) * contrast + 0.5;
            v += brightness;
            v += noise.sample(&mut rng);
            if flip {
                v = 1.0 - v;
            }
            v.clamp(0.0, 1.0) as f32
        })
        .collect();

    Ok(WordImage {
        pixels,
        height: canvas.height,
        width: canvas.width,
        word: word.to_lowercase(),
        concept_ids: Vec::new(),
        render_seed: seed,
    })
}

fn uniform<R: Rng>(rng: &mut R, range: [f64; 2]) -> f64 {
    let u: f64 = rng.random();
    range[0] + u * (range[1] - range[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_render_is_scaled_strip() {
        let canvas = Canvas::new(22, 30);
        let img = render("cat", canvas, &DistortionConfig::identity(), 99).unwrap();
        let (strip, h, w) = GlyphFont::builtin().strip("cat", STRIP_MARGIN, 0, 0).unwrap();
        assert_eq!(img.pixels, resize_nearest(&strip, h, w, 22, 30));
        let again = render("cat", canvas, &DistortionConfig::identity(), 5).unwrap();
        assert_eq!(img.pixels, again.pixels);
    }

    #[test]
    fn any_length_fills_canvas() {
        for word in ["a", "abcdefghij"] {
            let img = render(word, Canvas::PAPER, &DistortionConfig::default(), 1).unwrap();
            assert_eq!(img.pixels.len(), 32 * 100);
            assert!(img.pixels.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn seeds_change_pixels() {
        let cfg = DistortionConfig::default();
        for s in 0..100u64 {
            let a = render("cat", Canvas::PAPER, &cfg, s).unwrap();
            let b = render("cat", Canvas::PAPER, &cfg, s + 1).unwrap();
            assert_ne!(a.pixels, b.pixels, "seed pair {s}");
            assert_eq!(a, render("cat", Canvas::PAPER, &cfg, s).unwrap());
        }
    }

    #[test]
    fn unsupported_character() {
        let err = render("caf\u{e9}", Canvas::DESK, &DistortionConfig::default(), 0).unwrap_err();
        assert!(matches!(err, Error::Render('\u{e9}')));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = DistortionConfig {
            contrast: [1.2, 0.8],
            ..DistortionConfig::default()
        };
        assert!(render("cat", Canvas::DESK, &cfg, 0).is_err());
        let cfg = DistortionConfig {
            polarity_flip: 1.5,
            ..DistortionConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn resize_identity_and_upscale() {
        let src: Vec<f32> = (0..6).map(|v| v as f32).collect();
        assert_eq!(resize_nearest(&src, 2, 3, 2, 3), src);
        assert_eq!(
            resize_nearest(&src, 2, 3, 2, 6),
            vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 5.0, 5.0]
        );
    }
}
