//! `LWEMB1` embedding files.
//!
//! Layout (little-endian): magic `LWEMB1`, `u32` D, `u32` K, the D×K matrix
//! Ψ as `f32` in column-major order (ψ_0 first), `u32` image count, then per
//! image a `u32` id and `f32` φ[D].

use super::space::EmbeddingSpace;
use crate::error::{Error, Result};

pub const EMBEDDING_MAGIC: &[u8; 6] = b"LWEMB1";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingExport {
    pub dim: usize,
    /// `psi[k]` is ψ_k.
    pub psi: Vec<Vec<f32>>,
    pub images: Vec<(u32, Vec<f32>)>,
}

impl EmbeddingExport {
    pub fn k(&self) -> usize {
        self.psi.len()
    }

    pub fn from_space(space: &EmbeddingSpace) -> Self {
        let narrow = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<f32>>();
        Self {
            dim: space.dim(),
            psi: space.psi().iter().map(|c| narrow(c)).collect(),
            images: space
                .ids()
                .iter()
                .map(|&id| (id, narrow(space.phi(id).expect("listed id"))))
                .collect(),
        }
    }

    /// A space over the exported vectors, with scores recomputed as
    /// `φ · ψ_k` and the given per-image concept sets.
    pub fn to_space(&self, relevance: Vec<Vec<usize>>) -> Result<EmbeddingSpace> {
        let widen = |v: &[f32]| v.iter().map(|&x| x as f64).collect::<Vec<f64>>();
        EmbeddingSpace::from_embeddings(
            self.images.iter().map(|(id, _)| *id).collect(),
            self.images.iter().map(|(_, p)| widen(p)).collect(),
            self.psi.iter().map(|c| widen(c)).collect(),
            relevance,
        )
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let u32_of = |n: usize, what: &str| u32::try_from(n).map_err(|_| Error::Format(format!("{what} exceeds u32")));
        if self.psi.iter().any(|c| c.len() != self.dim) || self.images.iter().any(|(_, p)| p.len() != self.dim) {
            return Err(Error::Format("vector length differs from D".into()));
        }
        let mut out = Vec::new();
        out.extend_from_slice(EMBEDDING_MAGIC);
        out.extend_from_slice(&u32_of(self.dim, "D")?.to_le_bytes());
        out.extend_from_slice(&u32_of(self.k(), "K")?.to_le_bytes());
        for c in &self.psi {
            out.extend(c.iter().flat_map(|v| v.to_le_bytes()));
        }
        out.extend_from_slice(&u32_of(self.images.len(), "image count")?.to_le_bytes());
        for (id, phi) in &self.images {
            out.extend_from_slice(&id.to_le_bytes());
            out.extend(phi.iter().flat_map(|v| v.to_le_bytes()));
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut take = |n: u64, what: &str| -> Result<&[u8]> {
            let end = (pos as u64)
                .checked_add(n)
                .filter(|&e| e <= bytes.len() as u64)
                .ok_or_else(|| Error::Format(format!("embedding file truncated in {what}")))? as usize;
            let s = &bytes[pos..end];
            pos = end;
            Ok(s)
        };
        if take(6, "magic")? != EMBEDDING_MAGIC {
            return Err(Error::Format("bad embedding magic".into()));
        }
        let word = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap());
        let floats = |b: &[u8]| -> Vec<f32> { b.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect() };
        let dim = word(take(4, "D")?) as usize;
        let k = word(take(4, "K")?) as usize;
        let psi_bytes = take(4 * dim as u64 * k as u64, "psi")?;
        let psi = if dim == 0 {
            vec![Vec::new(); k]
        } else {
            psi_bytes.chunks_exact(4 * dim).map(floats).collect()
        };
        let count = word(take(4, "image count")?) as u64;
        let record = 4 + 4 * dim as u64;
        if count.checked_mul(record) != Some((bytes.len() - 18 - psi_bytes.len()) as u64) {
            return Err(Error::Format(format!("{count} images do not fill the remaining payload")));
        }
        let mut images = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let id = word(take(4, "image id")?);
            images.push((id, floats(take(4 * dim as u64, "phi")?)));
        }
        Ok(Self { dim, psi, images })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn export() -> EmbeddingExport {
        EmbeddingExport {
            dim: 2,
            psi: vec![vec![1.0, -0.5], vec![0.25, 2.0], vec![0.0, 3.5]],
            images: vec![(7, vec![0.5, 0.125]), (2, vec![-1.0, 4.0])],
        }
    }

    #[test]
    fn layout_and_round_trip() {
        let e = export();
        let bytes = e.encode().unwrap();
        assert_eq!(bytes.len(), 6 + 4 + 4 + 4 * 6 + 4 + 2 * (4 + 8));
        // Column-major Ψ: ψ_0 = (1, -0.5) comes first.
        assert_eq!(&bytes[14..18], &1.0f32.to_le_bytes());
        assert_eq!(&bytes[18..22], &(-0.5f32).to_le_bytes());
        let back = EmbeddingExport::decode(&bytes).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.encode().unwrap(), bytes);
    }

    #[test]
    fn damage_is_rejected() {
        let bytes = export().encode().unwrap();
        assert!(EmbeddingExport::decode(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(EmbeddingExport::decode(&extra).is_err());
        let mut magic = bytes.clone();
        magic[5] = b'2';
        assert!(EmbeddingExport::decode(&magic).is_err());
    }

    #[test]
    fn space_round_trip() {
        let e = export();
        let space = e.to_space(vec![vec![0], vec![1, 2]]).unwrap();
        assert_eq!(EmbeddingExport::from_space(&space), e);
        assert_eq!(space.compatibility(2, 1).unwrap(), -0.25 + 8.0);
    }
}
