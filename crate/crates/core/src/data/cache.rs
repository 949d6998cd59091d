//! Binary container for preprocessed datasets.
//!
//! ```text
//! magic "QKDS" | version u32 | rows u64 | cols u64 | name_len u64 | name utf-8
//! | rows*cols f64 (row-major) | rows i8 labels
//! ```
//! All integers and doubles are little-endian.

use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const MAGIC: &[u8; 4] = b"QKDS";
const VERSION: u32 = 1;

impl Dataset {
    pub fn to_cache_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.name.len() + self.x.as_slice().len() * 8 + self.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.x.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(self.x.cols() as u64).to_le_bytes());
        out.extend_from_slice(&(self.name.len() as u64).to_le_bytes());
        out.extend_from_slice(self.name.as_bytes());
        for v in self.x.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend(self.y.iter().map(|&l| l as u8));
        out
    }

    /// `path` labels errors only.
    pub fn from_cache_bytes(bytes: &[u8], path: &Path) -> Result<Dataset> {
        let mut r = Reader { bytes, pos: 0, path };
        if r.take(4)? != MAGIC {
            return Err(Error::format(path, "byte 0", "not a dataset cache"));
        }
        let version = u32::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(Error::format(path, "byte 4", format!("unsupported cache version {version}")));
        }
        let rows = r.len()?;
        let cols = r.len()?;
        let name_len = r.len()?;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| Error::format(path, format!("byte {}", r.pos - name_len), "name is not utf-8"))?;
        let count = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::format(path, "byte 8", "shape overflows"))?;
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            data.push(f64::from_le_bytes(r.array()?));
        }
        let y = r.take(rows)?.iter().map(|&b| b as i8).collect();
        if r.pos != bytes.len() {
            return Err(Error::format(path, format!("byte {}", r.pos), "trailing bytes"));
        }
        Dataset::new(name, Matrix::from_vec(rows, cols, data)?, y)
    }

    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_cache_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_cache(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_cache_bytes(&bytes, path)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::format(self.path, format!("byte {}", self.bytes.len()), "cache truncated")
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn len(&mut self) -> Result<usize> {
        let at = self.pos;
        usize::try_from(u64::from_le_bytes(self.array()?))
            .map_err(|_| Error::format(self.path, format!("byte {at}"), "length does not fit in memory"))
    }
}
