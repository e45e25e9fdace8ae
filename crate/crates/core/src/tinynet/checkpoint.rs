//! `LWNET1` checkpoints.
//!
//! Layout (little-endian): magic `LWNET1`, `u32` version, `u32` length of a
//! JSON network spec followed by the spec itself, then for each parameter
//! tensor in network order: `u8` name length, name, `u8` rank, `u32` dims,
//! and the `f32` payload. Nothing may follow the last tensor.

use std::fs;
use std::path::Path;

use super::net::{parameter_shapes, Network, Tensor};
use super::real::Real;
use super::spec::NetSpec;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 6] = b"LWNET1";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn encode_checkpoint<T: Real>(net: &Network<T>) -> Result<Vec<u8>> {
    let spec = serde_json::to_vec(net.spec())?;
    let mut out = Vec::with_capacity(16 + spec.len() + 4 * net.num_parameters());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(spec.len() as u32).to_le_bytes());
    out.extend_from_slice(&spec);
    for t in net.params() {
        let name = t.name.as_bytes();
        out.push(u8::try_from(name.len()).map_err(|_| Error::Format(format!("tensor name {} too long", t.name)))?);
        out.extend_from_slice(name);
        out.push(t.dims.len() as u8);
        for &d in &t.dims {
            let d = u32::try_from(d).map_err(|_| Error::Format("tensor dimension exceeds u32".into()))?;
            out.extend_from_slice(&d.to_le_bytes());
        }
        out.extend(t.data.iter().flat_map(|v| (v.to_f64() as f32).to_le_bytes()));
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("checkpoint truncated in {what} at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

/// Decodes a checkpoint, validating the spec and every tensor against it.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<Network<f32>> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(6, "magic")? != CHECKPOINT_MAGIC {
        return Err(Error::Format("bad checkpoint magic".into()));
    }
    let version = cur.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let len = cur.u32("spec length")? as usize;
    let spec: NetSpec = serde_json::from_slice(cur.take(len, "spec")?)
        .map_err(|e| Error::Format(format!("checkpoint spec: {e}")))?;
    let shapes = parameter_shapes(&spec).map_err(|e| Error::Format(format!("checkpoint spec: {e}")))?;
    let declared: u128 = shapes
        .iter()
        .map(|(_, dims)| dims.iter().map(|&d| d as u128).product::<u128>())
        .sum();
    if declared * 4 > (bytes.len() - cur.pos) as u128 {
        return Err(Error::Format(format!(
            "spec declares {declared} parameters but only {} bytes remain",
            bytes.len() - cur.pos
        )));
    }
    let expected = Network::<f32>::zeros(&spec)?;
    let mut params = Vec::with_capacity(expected.params().len());
    for want in expected.params() {
        let n = cur.u8("tensor name length")? as usize;
        let name = std::str::from_utf8(cur.take(n, "tensor name")?)
            .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = cur.u8("tensor rank")? as usize;
        let dims = (0..rank)
            .map(|_| cur.u32("tensor dims").map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        if name != want.name || dims != want.dims {
            return Err(Error::Format(format!(
                "tensor {name:?} {dims:?} does not match expected {:?} {:?}",
                want.name, want.dims
            )));
        }
        let data = cur
            .take(want.data.len() * 4, "tensor payload")?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        params.push(Tensor { name, dims, data });
    }
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes after the last tensor", bytes.len() - cur.pos)));
    }
    Network::from_params(&spec, params)
}

pub fn save_checkpoint<T: Real>(net: &Network<T>, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(net)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Network<f32>> {
    decode_checkpoint(&fs::read(path)?)
}
