//! Gram matrix serialization.
//!
//! Binary layout: `n` as little-endian `u64`, then the upper triangle
//! (diagonal included) row by row as little-endian `f64`.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::GramMatrix;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

impl GramMatrix {
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.n();
        let mut out = Vec::with_capacity(8 + 8 * n * (n + 1) / 2);
        out.extend_from_slice(&(n as u64).to_le_bytes());
        for i in 0..n {
            for &v in &self.entries.row(i)[i..] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let src = Path::new("<gram bytes>");
        let header: [u8; 8] = bytes
            .get(..8)
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| Error::format(src, "byte 0", "missing size header"))?;
        let n = u64::from_le_bytes(header) as usize;
        let count = n
            .checked_mul(n + 1)
            .map(|v| v / 2)
            .ok_or_else(|| Error::format(src, "byte 0", "size header overflows"))?;
        let expected = 8 + 8 * count;
        if bytes.len() != expected {
            return Err(Error::format(
                src,
                format!("byte {}", bytes.len().min(expected)),
                format!("expected {expected} bytes for n = {n}, found {}", bytes.len()),
            ));
        }
        let mut m = Matrix::zeros(n, n);
        let mut chunks = bytes[8..].chunks_exact(8);
        for i in 0..n {
            for j in i..n {
                let v = f64::from_le_bytes(chunks.next().unwrap().try_into().unwrap());
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        GramMatrix::new(m)
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Format { location, message, .. } => Error::format(path, location, message),
            other => other,
        })
    }

    /// Full matrix as CSV, one row per line, no header.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for row in self.entries.iter_rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Hex SHA-256 of the binary serialization.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.to_bytes()))
    }
}
