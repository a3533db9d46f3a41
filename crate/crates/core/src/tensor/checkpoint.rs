//! Binary checkpoint format for model parameters.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   4 bytes  "CCCP"
//! version u32      currently 1
//! count   u32      number of entries
//! entry:  name_len u32, name (UTF-8), rank u32, extents u32 x rank,
//!         data f32 x prod(extents)
//! ```
//!
//! Values are stored as f32 regardless of the in-memory scalar type; a
//! write/read cycle of an f32 model is bit-exact.

use super::params::ModelParams;
use super::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"CCCP";
const VERSION: u32 = 1;

pub fn save_params<S: Scalar>(params: &ModelParams<S>, path: &Path) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (name, tensor) in params.iter() {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        let shape = tensor.shape();
        buf.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &e in &shape {
            buf.extend_from_slice(&(e as u32).to_le_bytes());
        }
        for v in tensor.to_vec() {
            buf.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

/// Read a checkpoint into a fresh parameter list, preserving entry order.
pub fn load_params<S: Scalar>(path: &Path) -> Result<ModelParams<S>> {
    let display = path.display().to_string();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|_| Error::MissingArtifact(display.clone()))?
        .read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0, path: &display };

    if cur.take(4)? != MAGIC {
        return Err(Error::format(&display, "bad magic, not a checkpoint file"));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::format(&display, format!("unsupported version {version}")));
    }
    let count = cur.u32()? as usize;
    let mut params = ModelParams::new();
    for _ in 0..count {
        let name_len = cur.u32()? as usize;
        let name = String::from_utf8(cur.take(name_len)?.to_vec())
            .map_err(|_| Error::format(&display, "parameter name is not UTF-8"))?;
        let rank = cur.u32()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(cur.u32()? as usize);
        }
        let numel: usize = shape.iter().product();
        let mut data = Vec::with_capacity(numel);
        for _ in 0..numel {
            data.push(S::of(f32::from_le_bytes(cur.take(4)?.try_into().unwrap()) as f64));
        }
        params.register(name, Tensor::leaf(&shape, data, true)?)?;
    }
    if cur.pos != bytes.len() {
        return Err(Error::format(&display, format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    Ok(params)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::format(self.path, "file truncated"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}
