//! File helpers shared by the model and report writers.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// 17 significant digits; parsing the result gives back the same bits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn parse_f64(token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::ModelFormat(format!("cannot parse number `{token}`")))
}

pub(crate) fn parse_usize(token: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::ModelFormat(format!("cannot parse count `{token}`")))
}

/// Line cursor over a tab-separated model file.
pub(crate) struct Lines<'a> {
    inner: std::iter::Peekable<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().peekable(),
        }
    }

    pub(crate) fn next_fields(&mut self) -> Result<Vec<&'a str>> {
        let line = self
            .inner
            .next()
            .ok_or_else(|| Error::ModelFormat("unexpected end of file".into()))?;
        Ok(line.split('\t').collect())
    }

    /// Next line, which must start with `key`; returns the remaining fields.
    pub(crate) fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let fields = self.next_fields()?;
        if fields[0] != key {
            return Err(Error::ModelFormat(format!(
                "expected `{key}`, found `{}`",
                fields[0]
            )));
        }
        Ok(fields[1..].to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trip_is_bit_exact() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0, -0.0] {
            let back = parse_f64(&fmt_f64(v)).unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn atomic_write_creates_parent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.txt");
        write_atomic(&path, b"hello").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "hello");
    }
}
