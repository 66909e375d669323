//! Flat-directory document store.
//!
//! A document `id` owns `{id}.json` (its annotation) and page images
//! `{id}.page{n}.png`. Ids are restricted to `[A-Za-z0-9_-]`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct DocStore {
    root: PathBuf,
}

pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Replaces every character outside `[A-Za-z0-9_-]` with `_`.
pub fn sanitize_id(raw: &str) -> String {
    let s: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

/// Version token of stored annotation bytes: lowercase hex SHA-256.
pub fn version_token(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl DocStore {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        if !root.is_dir() {
            return Err(io::Error::new(
                io::ErrorKind::NotFound,
                format!("{} is not a directory", root.display()),
            ));
        }
        Ok(DocStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Sorted ids of all documents with an annotation file.
    pub fn ids(&self) -> io::Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let name = entry?.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(id) = name.strip_suffix(".json") {
                if is_valid_id(id) {
                    ids.push(id.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn annotation_path(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.json"))
    }

    pub fn page_path(&self, id: &str, page: u32) -> PathBuf {
        self.root.join(format!("{id}.page{page}.png"))
    }

    /// `None` when the id is invalid or has no annotation file.
    pub fn read_annotation(&self, id: &str) -> io::Result<Option<Vec<u8>>> {
        if !is_valid_id(id) {
            return Ok(None);
        }
        match fs::read(self.annotation_path(id)) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn read_page(&self, id: &str, page: u32) -> io::Result<Option<Vec<u8>>> {
        if !is_valid_id(id) {
            return Ok(None);
        }
        match fs::read(self.page_path(id, page)) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn write_annotation(&self, id: &str, bytes: &[u8]) -> io::Result<()> {
        atomic_write(&self.annotation_path(id), bytes)
    }
}

/// Writes `bytes` to `path` so readers see either the old or the new file,
/// never a partial one.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    atomic_write_with(path, bytes, |_| Ok(()))
}

/// [`atomic_write`] with a hook that runs after the temporary file is
/// complete and before it replaces `path`. A hook error aborts the write
/// and removes the temporary file.
pub fn atomic_write_with(
    path: &Path,
    bytes: &[u8],
    before_rename: impl FnOnce(&Path) -> io::Result<()>,
) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".tmp-")
        .suffix(".part")
        .tempfile_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    before_rename(tmp.path())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
