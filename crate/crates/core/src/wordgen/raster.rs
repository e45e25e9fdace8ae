//! `LWIMG1` raster files: a packed stack of equally sized grayscale images.
//!
//! Layout (little-endian): magic `LWIMG1`, `u32` count, `u16` height,
//! `u16` width, then `count * height * width` `f32` intensities.

use crate::error::{Error, Result};

pub const RASTER_MAGIC: &[u8; 6] = b"LWIMG1";
pub const RASTER_HEADER_LEN: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Raster {
    pub fn count(&self) -> usize {
        self.data.len().checked_div(self.height * self.width).unwrap_or(0)
    }

    pub fn image(&self, i: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[i * n..(i + 1) * n]
    }

    /// Byte offset of image `i` inside an encoded file.
    pub fn offset_of(i: usize, height: usize, width: usize) -> u64 {
        (RASTER_HEADER_LEN + i * height * width * 4) as u64
    }
}

pub fn encode_raster<'a>(
    images: impl IntoIterator<Item = &'a [f32]>,
    height: usize,
    width: usize,
) -> Result<Vec<u8>> {
    let (h, w) = (
        u16::try_from(height).map_err(|_| Error::Format("height exceeds u16".into()))?,
        u16::try_from(width).map_err(|_| Error::Format("width exceeds u16".into()))?,
    );
    let mut out = Vec::with_capacity(RASTER_HEADER_LEN);
    out.extend_from_slice(RASTER_MAGIC);
    out.extend_from_slice(&[0; 4]);
    out.extend_from_slice(&h.to_le_bytes());
    out.extend_from_slice(&w.to_le_bytes());
    let mut count: u32 = 0;
    for img in images {
        if img.len() != height * width {
            return Err(Error::Format(format!(
                "image {count} has {} pixels, expected {}",
                img.len(),
                height * width
            )));
        }
        out.extend(img.iter().flat_map(|p| p.to_le_bytes()));
        count = count
            .checked_add(1)
            .ok_or_else(|| Error::Format("too many images".into()))?;
    }
    out[6..10].copy_from_slice(&count.to_le_bytes());
    Ok(out)
}

pub fn decode_raster(bytes: &[u8]) -> Result<Raster> {
    if bytes.len() < RASTER_HEADER_LEN {
        return Err(Error::Format("raster shorter than its header".into()));
    }
    if &bytes[..6] != RASTER_MAGIC {
        return Err(Error::Format("bad raster magic".into()));
    }
    let count = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as u64;
    let height = u16::from_le_bytes(bytes[10..12].try_into().unwrap()) as u64;
    let width = u16::from_le_bytes(bytes[12..14].try_into().unwrap()) as u64;
    let expected = count * height * width * 4;
    let payload = &bytes[RASTER_HEADER_LEN..];
    if payload.len() as u64 != expected {
        return Err(Error::Format(format!(
            "raster payload is {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(bad) = data.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Format(format!("intensity {} at sample {bad} outside [0, 1]", data[bad])));
    }
    Ok(Raster {
        height: height as usize,
        width: width as usize,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let a = [0.0f32, 0.5, 1.0, 0.25, 0.75, 0.125];
        let b = [1.0f32; 6];
        let bytes = encode_raster([&a[..], &b[..]], 2, 3).unwrap();
        assert_eq!(bytes.len(), RASTER_HEADER_LEN + 2 * 6 * 4);
        let r = decode_raster(&bytes).unwrap();
        assert_eq!(r.count(), 2);
        assert_eq!(r.image(0), &a);
        assert_eq!(r.image(1), &b);
        assert_eq!(Raster::offset_of(1, 2, 3), (RASTER_HEADER_LEN + 24) as u64);
    }

    #[test]
    fn rejects_damage() {
        let bytes = encode_raster([&[0.5f32; 4][..]], 2, 2).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_raster(&bad).is_err());
        assert!(decode_raster(&bytes[..bytes.len() - 1]).is_err());
        let mut out_of_range = bytes.clone();
        out_of_range[14..18].copy_from_slice(&2.0f32.to_le_bytes());
        assert!(decode_raster(&out_of_range).is_err());
        assert!(encode_raster([&[0.5f32; 3][..]], 2, 2).is_err());
    }
}
