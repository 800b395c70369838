//! Binary tensor archive used for encoder parameters, tokenizer checkpoints
//! and adapters.
//!
//! Layout (all integers little-endian `u32`, all reals little-endian `f64`):
//!
//! ```text
//! magic    8 bytes  "MOLHIER\0"
//! version  u32      currently 1
//! count    u32      number of tensors
//! count times:
//!   name_len u32, name (UTF-8), rows u32, cols u32, rows*cols f64 (row-major)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

pub const MAGIC: &[u8; 8] = b"MOLHIER\0";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("not a tensor archive (bad magic)")]
    BadMagic,
    #[error("unsupported archive version {0}")]
    Version(u32),
    #[error("archive is truncated")]
    Truncated,
    #[error("tensor name is not UTF-8")]
    BadName,
    #[error("archive is missing tensor `{0}`")]
    Missing(String),
    #[error("tensor `{name}` has shape {got:?}, expected {want:?}")]
    Shape {
        name: String,
        got: (usize, usize),
        want: (usize, usize),
    },
    #[error("duplicate tensor `{0}`")]
    Duplicate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An ordered collection of named matrices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Archive {
    tensors: Vec<(String, Array2<f64>)>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Array2<f64>) -> Result<(), ArchiveError> {
        let name = name.into();
        if self.get(&name).is_some() {
            return Err(ArchiveError::Duplicate(name));
        }
        self.tensors.push((name, tensor));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Array2<f64>> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Fetches a tensor and checks its shape.
    pub fn take(&self, name: &str, shape: (usize, usize)) -> Result<Array2<f64>, ArchiveError> {
        let t = self.get(name).ok_or_else(|| ArchiveError::Missing(name.into()))?;
        if t.dim() != shape {
            return Err(ArchiveError::Shape {
                name: name.into(),
                got: t.dim(),
                want: shape,
            });
        }
        Ok(t.clone())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Appends every tensor of `other`.
    pub fn extend(&mut self, other: Archive) -> Result<(), ArchiveError> {
        for (n, t) in other.tensors {
            self.push(n, t)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, t) in &self.tensors {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(t.nrows() as u32).to_le_bytes());
            out.extend_from_slice(&(t.ncols() as u32).to_le_bytes());
            for x in t.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ArchiveError> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| ArchiveError::Truncated)?;
        if &magic != MAGIC {
            return Err(ArchiveError::BadMagic);
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(ArchiveError::Version(version));
        }
        let count = read_u32(&mut r)?;
        let mut archive = Archive::new();
        for _ in 0..count {
            let len = read_u32(&mut r)? as usize;
            if r.len() < len {
                return Err(ArchiveError::Truncated);
            }
            let name = std::str::from_utf8(&r[..len]).map_err(|_| ArchiveError::BadName)?.to_string();
            r = &r[len..];
            let rows = read_u32(&mut r)? as usize;
            let cols = read_u32(&mut r)? as usize;
            let total = rows.checked_mul(cols).ok_or(ArchiveError::Truncated)?;
            if r.len() / 8 < total {
                return Err(ArchiveError::Truncated);
            }
            let data: Vec<f64> = r[..total * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            r = &r[total * 8..];
            let t = Array2::from_shape_vec((rows, cols), data).expect("length checked");
            archive.push(name, t)?;
        }
        Ok(archive)
    }

    pub fn save(&self, path: &Path) -> Result<(), ArchiveError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ArchiveError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn read_u32(r: &mut &[u8]) -> Result<u32, ArchiveError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| ArchiveError::Truncated)?;
    Ok(u32::from_le_bytes(b))
}
