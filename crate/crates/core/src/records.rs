//! JSON-lines artifacts and the checksum manifest.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RecordError + '_ {
    move |source| RecordError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn create_parent(path: &Path) -> Result<(), RecordError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(io_err(dir)),
        _ => Ok(()),
    }
}

pub fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a T>,
) -> Result<usize, RecordError> {
    create_parent(path)?;
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut n = 0;
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|source| RecordError::Json {
            path: path.display().to_string(),
            line: n + 1,
            source,
        })?;
        w.write_all(b"\n").map_err(io_err(path))?;
        n += 1;
    }
    w.flush().map_err(io_err(path))?;
    Ok(n)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, RecordError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| RecordError::Json {
            path: path.display().to_string(),
            line: i + 1,
            source,
        })?);
    }
    Ok(out)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), RecordError> {
    create_parent(path)?;
    fs::write(path, text).map_err(io_err(path))
}

pub fn sha256_file(path: &Path) -> Result<String, RecordError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Files under `dir`, recursively, as sorted paths relative to `dir`.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>, RecordError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(io_err(&d))? {
            let path = entry.map_err(io_err(&d))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if let Ok(rel) = path.strip_prefix(dir) {
                out.push(rel.to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}

pub const MANIFEST: &str = "manifest.tsv";

/// Writes `path \t sha256` for every file under `dir` except the manifest
/// itself, and returns the manifest text.
pub fn write_manifest(dir: &Path) -> Result<String, RecordError> {
    let mut text = String::new();
    for rel in list_files(dir)? {
        if rel == Path::new(MANIFEST) {
            continue;
        }
        let name = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        text.push_str(&format!("{name}\t{}\n", sha256_file(&dir.join(&rel))?));
    }
    write_text(&dir.join(MANIFEST), &text)?;
    Ok(text)
}
