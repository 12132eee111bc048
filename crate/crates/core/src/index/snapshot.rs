//! On-disk snapshot container: one JSON header line, then the JSON body.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{IndexError, IndexSnapshot};

pub const MAGIC: &str = "plenum-index";
pub const FORMAT_VERSION: u32 = 1;
pub const FILE_NAME: &str = "index.snapshot";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub magic: String,
    pub format_version: u32,
    pub doc_count: usize,
    pub body_sha256: String,
}

impl IndexSnapshot {
    pub fn write_to(&self, mut w: impl Write) -> Result<SnapshotHeader, IndexError> {
        let body = serde_json::to_vec(self).map_err(|e| IndexError::Format(e.to_string()))?;
        let header = SnapshotHeader {
            magic: MAGIC.into(),
            format_version: FORMAT_VERSION,
            doc_count: self.doc_count(),
            body_sha256: hex::encode(Sha256::digest(&body)),
        };
        serde_json::to_writer(&mut w, &header).map_err(|e| IndexError::Format(e.to_string()))?;
        w.write_all(b"\n")?;
        w.write_all(&body)?;
        w.flush()?;
        Ok(header)
    }

    pub fn read_from(r: impl Read) -> Result<Self, IndexError> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: SnapshotHeader =
            serde_json::from_str(line.trim_end()).map_err(|e| IndexError::Format(format!("bad header: {e}")))?;
        if header.magic != MAGIC {
            return Err(IndexError::Format(format!("unexpected magic {:?}", header.magic)));
        }
        if header.format_version > FORMAT_VERSION {
            return Err(IndexError::UnsupportedVersion {
                found: header.format_version,
                supported: FORMAT_VERSION,
            });
        }
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if hex::encode(Sha256::digest(&body)) != header.body_sha256 {
            return Err(IndexError::Checksum);
        }
        let snap: IndexSnapshot = serde_json::from_slice(&body).map_err(|e| IndexError::Format(e.to_string()))?;
        if snap.doc_count() != header.doc_count {
            return Err(IndexError::Format(format!(
                "header says {} documents, body holds {}",
                header.doc_count,
                snap.doc_count()
            )));
        }
        snap.check()?;
        Ok(snap)
    }

    /// Writes `dir/index.snapshot` through a temporary file and rename.
    pub fn save(&self, dir: &Path) -> Result<SnapshotHeader, IndexError> {
        std::fs::create_dir_all(dir)?;
        let tmp = dir.join(format!("{FILE_NAME}.tmp"));
        let header = self.write_to(std::io::BufWriter::new(std::fs::File::create(&tmp)?))?;
        std::fs::rename(&tmp, dir.join(FILE_NAME))?;
        Ok(header)
    }

    /// Loads from a snapshot directory or a snapshot file.
    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let file = if path.is_dir() {
            path.join(FILE_NAME)
        } else {
            path.to_path_buf()
        };
        Self::read_from(std::fs::File::open(file)?)
    }
}
