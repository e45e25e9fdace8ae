use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub const GLYPH_WIDTH: usize = 5;
pub const GLYPH_HEIGHT: usize = 7;
pub const GLYPH_SPACING: usize = 1;

// Rows top to bottom, most significant of the low five bits is the
// leftmost column.
#[rustfmt::skip]
const GLYPHS: [(char, [u8; GLYPH_HEIGHT]); 36] = [
    ('a', [0b00000, 0b00000, 0b01110, 0b00001, 0b01111, 0b10001, 0b01111]),
    ('b', [0b10000, 0b10000, 0b10110, 0b11001, 0b10001, 0b10001, 0b11110]),
    ('c', [0b00000, 0b00000, 0b01110, 0b10000, 0b10000, 0b10001, 0b01110]),
    ('d', [0b00001, 0b00001, 0b01101, 0b10011, 0b10001, 0b10001, 0b01111]),
    ('e', [0b00000, 0b00000, 0b01110, 0b10001, 0b11111, 0b10000, 0b01110]),
    ('f', [0b00110, 0b01001, 0b01000, 0b11100, 0b01000, 0b01000, 0b01000]),
    ('g', [0b00000, 0b01111, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110]),
    ('h', [0b10000, 0b10000, 0b10110, 0b11001, 0b10001, 0b10001, 0b10001]),
    ('i', [0b00100, 0b00000, 0b01100, 0b00100, 0b00100, 0b00100, 0b01110]),
    ('j', [0b00010, 0b00000, 0b00110, 0b00010, 0b00010, 0b10010, 0b01100]),
    ('k', [0b10000, 0b10000, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010]),
    ('l', [0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110]),
    ('m', [0b00000, 0b00000, 0b11010, 0b10101, 0b10101, 0b10001, 0b10001]),
    ('n', [0b00000, 0b00000, 0b10110, 0b11001, 0b10001, 0b10001, 0b10001]),
    ('o', [0b00000, 0b00000, 0b01110, 0b10001, 0b10001, 0b10001, 0b01110]),
    ('p', [0b00000, 0b00000, 0b11110, 0b10001, 0b11110, 0b10000, 0b10000]),
    ('q', [0b00000, 0b00000, 0b01101, 0b10011, 0b01111, 0b00001, 0b00001]),
    ('r', [0b00000, 0b00000, 0b10110, 0b11001, 0b10000, 0b10000, 0b10000]),
    ('s', [0b00000, 0b00000, 0b01110, 0b10000, 0b01110, 0b00001, 0b11110]),
    ('t', [0b01000, 0b01000, 0b11100, 0b01000, 0b01000, 0b01001, 0b00110]),
    ('u', [0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b10011, 0b01101]),
    ('v', [0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100]),
    ('w', [0b00000, 0b00000, 0b10001, 0b10001, 0b10101, 0b10101, 0b01010]),
    ('x', [0b00000, 0b00000, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001]),
    ('y', [0b00000, 0b00000, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110]),
    ('z', [0b00000, 0b00000, 0b11111, 0b00010, 0b00100, 0b01000, 0b11111]),
    ('0', [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110]),
    ('1', [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110]),
    ('2', [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111]),
    ('3', [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110]),
    ('4', [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010]),
    ('5', [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110]),
    ('6', [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110]),
    ('7', [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000]),
    ('8', [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110]),
    ('9', [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100]),
];

/// Embedded 5×7 bitmap font covering `a`–`z` and `0`–`9`.
#[derive(Debug, Clone)]
pub struct GlyphFont {
    glyphs: BTreeMap<char, [u8; GLYPH_HEIGHT]>,
}

impl Default for GlyphFont {
    fn default() -> Self {
        Self::builtin()
    }
}

impl GlyphFont {
    pub fn builtin() -> Self {
        Self {
            glyphs: GLYPHS.iter().copied().collect(),
        }
    }

    pub fn supports(&self, c: char) -> bool {
        self.glyphs.contains_key(&c)
    }

    pub fn pixel(&self, c: char, row: usize, col: usize) -> Option<bool> {
        let rows = self.glyphs.get(&c)?;
        Some(rows[row] >> (GLYPH_WIDTH - 1 - col) & 1 == 1)
    }

    /// Width in pixels of the unpadded strip for `n` glyphs.
    pub fn strip_width(n: usize) -> usize {
        n * GLYPH_WIDTH + n.saturating_sub(1) * GLYPH_SPACING
    }

    /// Binary ink mask of `word` (case-folded), `margin` blank pixels on
    /// every side, content offset by `(dy, dx)` and clipped to the strip.
    pub fn strip(&self, word: &str, margin: usize, dy: i32, dx: i32) -> Result<(Vec<f32>, usize, usize)> {
        let chars: Vec<char> = word.chars().flat_map(char::to_lowercase).collect();
        if let Some(&bad) = chars.iter().find(|c| !self.supports(**c)) {
            return Err(Error::Render(bad));
        }
        let h = GLYPH_HEIGHT + 2 * margin;
        let w = Self::strip_width(chars.len()) + 2 * margin;
        let mut pixels = vec![0.0f32; h * w];
        for (i, &c) in chars.iter().enumerate() {
            let x0 = (margin + i * (GLYPH_WIDTH + GLYPH_SPACING)) as i64 + dx as i64;
            for row in 0..GLYPH_HEIGHT {
                for col in 0..GLYPH_WIDTH {
                    if self.pixel(c, row, col) != Some(true) {
                        continue;
                    }
                    let y = (margin + row) as i64 + dy as i64;
                    let x = x0 + col as i64;
                    if (0..h as i64).contains(&y) && (0..w as i64).contains(&x) {
                        pixels[y as usize * w + x as usize] = 1.0;
                    }
                }
            }
        }
        Ok((pixels, h, w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_glyph_present_and_distinct() {
        let font = GlyphFont::builtin();
        for c in ('a'..='z').chain('0'..='9') {
            assert!(font.supports(c), "{c}");
        }
        let mut seen = std::collections::BTreeSet::new();
        for (_, rows) in GLYPHS {
            assert!(rows.iter().all(|r| *r < 32));
            assert!(seen.insert(rows), "duplicate bitmap");
        }
    }

    #[test]
    fn strip_geometry() {
        let font = GlyphFont::builtin();
        let (px, h, w) = font.strip("ab", 2, 0, 0).unwrap();
        assert_eq!((h, w), (11, 15));
        // 'l' top row is 01100 → columns 1,2 of the glyph.
        let (px_l, _, w_l) = font.strip("l", 0, 0, 0).unwrap();
        assert_eq!(&px_l[..w_l], &[0.0, 1.0, 1.0, 0.0, 0.0]);
        assert!(px.contains(&1.0));
        assert!(matches!(font.strip("a-b", 0, 0, 0), Err(Error::Render('-'))));
        assert_eq!(font.strip("AB", 0, 0, 0).unwrap(), font.strip("ab", 0, 0, 0).unwrap());
    }
}
