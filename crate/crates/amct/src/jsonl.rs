//! Newline-delimited JSON reading/writing shared by every artifact format.
//!
//! Writers serialize the whole batch to memory and publish it with a
//! write-to-temp + atomic-rename, so a failed run never leaves a partial
//! output file behind. Reader errors carry the 1-based line number.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Line { path: PathBuf, line: usize, message: String },
}

/// Write `bytes` to `path` atomically: a sibling temp file is written,
/// flushed, and renamed over the destination.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), JsonlError> {
    let io_err = |source| JsonlError::Io { path: path.to_path_buf(), source };
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(bytes).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

/// Serialize items one-per-line and publish atomically. Returns the count.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<usize, JsonlError> {
    let mut buf = Vec::new();
    for (i, item) in items.iter().enumerate() {
        serde_json::to_writer(&mut buf, item).map_err(|e| JsonlError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        buf.push(b'\n');
    }
    atomic_write(path, &buf)?;
    Ok(items.len())
}

/// Read one item per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    let text = fs::read_to_string(path).map_err(|source| JsonlError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_jsonl(&text).map_err(|(line, message)| JsonlError::Line {
        path: path.to_path_buf(),
        line,
        message,
    })
}

/// Parse JSONL text; errors are (1-based line, message).
pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, (usize, String)> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line).map_err(|e| (idx + 1, e.to_string()))?;
        out.push(item);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Row {
        id: String,
        n: u32,
    }

    #[test]
    fn round_trips_and_skips_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        let rows = vec![Row { id: "a".into(), n: 1 }, Row { id: "b".into(), n: 2 }];
        assert_eq!(write_jsonl(&path, &rows).unwrap(), 2);

        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("\n\n");
        fs::write(&path, text).unwrap();
        let back: Vec<Row> = read_jsonl(&path).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_jsonl::<Row>("{\"id\":\"a\",\"n\":1}\nnot json\n").unwrap_err();
        assert_eq!(err.0, 2);
    }

    #[test]
    fn atomic_write_leaves_no_temp_on_success() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        atomic_write(&path, b"data").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"data");
        assert!(!dir.path().join("out.txt.tmp").exists());
    }
}
