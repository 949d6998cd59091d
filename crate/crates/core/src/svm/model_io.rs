//! Plain-text model format, one field per line:
//!
//! ```text
//! n <count>
//! C <penalty>
//! b <bias>
//! alpha <α_0> <α_1> ...
//! y <y_0> <y_1> ...
//! support <i_0> <i_1> ...
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so a write/read cycle is
//! exact.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::SvcModel;
use crate::error::{Error, Result};

impl SvcModel {
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(" ");
        let mut s = String::new();
        let _ = writeln!(s, "n {}", self.alpha.len());
        let _ = writeln!(s, "C {}", self.c);
        let _ = writeln!(s, "b {}", self.bias);
        let _ = writeln!(s, "alpha {}", join(self.alpha.iter().map(|a| a.to_string()).collect()));
        let _ = writeln!(s, "y {}", join(self.labels.iter().map(|a| a.to_string()).collect()));
        let _ = writeln!(s, "support {}", join(self.support_indices.iter().map(|a| a.to_string()).collect()));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let src = Path::new("<model text>");
        let mut lines = text.lines().enumerate();
        let mut field = |key: &str| -> Result<(usize, Vec<String>)> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| Error::format(src, "end of input", format!("missing `{key}` line")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(Error::format(src, format!("line {}", no + 1), format!("expected `{key}`")));
            }
            Ok((no + 1, parts.map(str::to_owned).collect()))
        };
        fn parse<T: FromStr>(src: &Path, line: usize, v: &[String]) -> Result<Vec<T>> {
            v.iter()
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::format(src, format!("line {line}"), format!("cannot parse `{s}`")))
                })
                .collect()
        }
        fn single<T: FromStr>(src: &Path, line: usize, v: &[String]) -> Result<T> {
            let mut all: Vec<T> = parse(src, line, v)?;
            if all.len() != 1 {
                return Err(Error::format(src, format!("line {line}"), "expected exactly one value"));
            }
            Ok(all.remove(0))
        }

        let (l, v) = field("n")?;
        let n: usize = single(src, l, &v)?;
        let (l, v) = field("C")?;
        let c: f64 = single(src, l, &v)?;
        let (l, v) = field("b")?;
        let bias: f64 = single(src, l, &v)?;
        let (l, v) = field("alpha")?;
        let alpha: Vec<f64> = parse(src, l, &v)?;
        let (l, v) = field("y")?;
        let labels: Vec<i8> = parse(src, l, &v)?;
        let (l, v) = field("support")?;
        let support_indices: Vec<usize> = parse(src, l, &v)?;
        if alpha.len() != n || labels.len() != n || support_indices.iter().any(|&i| i >= n) {
            return Err(Error::format(src, format!("line {l}"), "field lengths disagree with n"));
        }
        Ok(SvcModel {
            alpha,
            labels,
            bias,
            c,
            support_indices,
            iterations: 0,
            kkt_gap: 0.0,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
