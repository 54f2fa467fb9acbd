//! `CBF1` feature files.
//!
//! All integers and floats are little-endian.
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 4 | magic `CBF1` |
//! | 4 | 4 | `u32` dim |
//! | 8 | 8 | `u64` count |
//! | 16 | 8 | `u64` extractor fingerprint |
//! | 24 | ... | `count` ids, each a `u32` byte length then UTF-8 bytes |
//! | ... | `count·dim·4` | `f32` rows in id order |
//!
//! Ids must be unique. Writes go to a temporary sibling file that is
//! renamed into place.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use cbar_core::{FeatureTable, FeatureVector, Fingerprint};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"CBF1";
pub const HEADER_LEN: usize = 24;

/// Rows of one feature file, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureFile {
    pub dim: usize,
    pub fingerprint: Fingerprint,
    pub rows: Vec<(String, FeatureVector)>,
}

impl FeatureFile {
    pub fn new(dim: usize, fingerprint: Fingerprint) -> Self {
        Self {
            dim,
            fingerprint,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, id: impl Into<String>, v: FeatureVector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(cbar_core::Error::DimMismatch {
                expected: self.dim,
                found: v.dim(),
            }
            .into());
        }
        self.rows.push((id.into(), v));
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&FeatureVector> {
        self.rows.iter().find(|(i, _)| i == id).map(|(_, v)| v)
    }

    /// Byte size of the encoded file.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN
            + self.rows.iter().map(|(id, _)| 4 + id.len()).sum::<usize>()
            + self.rows.len() * self.dim * 4
    }

    pub fn to_table(&self) -> Result<FeatureTable> {
        Ok(FeatureTable::from_rows(
            self.dim,
            self.fingerprint,
            self.rows.clone(),
        )?)
    }

    /// Concatenates files sharing one extractor.
    pub fn merge(files: Vec<FeatureFile>) -> Result<FeatureFile> {
        let mut it = files.into_iter();
        let mut out = it
            .next()
            .ok_or_else(|| CliError::Config("no feature files given".into()))?;
        for f in it {
            out.fingerprint.check(f.fingerprint)?;
            if f.dim != out.dim {
                return Err(cbar_core::Error::DimMismatch {
                    expected: out.dim,
                    found: f.dim,
                }
                .into());
            }
            out.rows.extend(f.rows);
        }
        check_unique(&out.rows)?;
        Ok(out)
    }

    pub fn encode(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        w.write_all(&self.fingerprint.0.to_le_bytes())?;
        for (id, _) in &self.rows {
            w.write_all(&(id.len() as u32).to_le_bytes())?;
            w.write_all(id.as_bytes())?;
        }
        for (_, v) in &self.rows {
            for x in &v.0 {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn decode(r: &mut impl Read) -> Result<FeatureFile> {
        let mut header = [0u8; HEADER_LEN];
        read_exact(r, &mut header)?;
        if &header[..4] != MAGIC {
            return Err(CliError::Data("not a CBF1 feature file (bad magic)".into()));
        }
        let dim = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let count = u64::from_le_bytes(header[8..16].try_into().unwrap());
        let fingerprint = Fingerprint(u64::from_le_bytes(header[16..24].try_into().unwrap()));
        let count =
            usize::try_from(count).map_err(|_| CliError::Data("row count overflows".into()))?;
        let mut ids = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let mut len = [0u8; 4];
            read_exact(r, &mut len)?;
            let mut bytes = vec![0u8; u32::from_le_bytes(len) as usize];
            read_exact(r, &mut bytes)?;
            ids.push(
                String::from_utf8(bytes).map_err(|_| CliError::Data("id is not UTF-8".into()))?,
            );
        }
        let mut rows = Vec::with_capacity(ids.len());
        let mut buf = vec![0u8; dim * 4];
        for id in ids {
            read_exact(r, &mut buf)?;
            let v = buf
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            rows.push((id, FeatureVector(v)));
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)
            .map_err(|e| CliError::Data(e.to_string()))?
            != 0
        {
            return Err(CliError::Data("trailing bytes after feature rows".into()));
        }
        check_unique(&rows)?;
        Ok(FeatureFile {
            dim,
            fingerprint,
            rows,
        })
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => CliError::Data("truncated feature file".into()),
        _ => CliError::Data(e.to_string()),
    })
}

fn check_unique(rows: &[(String, FeatureVector)]) -> Result<()> {
    let mut seen = HashSet::with_capacity(rows.len());
    for (id, _) in rows {
        if !seen.insert(id.as_str()) {
            return Err(CliError::Data(format!("duplicate feature id `{id}`")));
        }
    }
    Ok(())
}

pub fn read_features(path: &Path) -> Result<FeatureFile> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    FeatureFile::decode(&mut BufReader::new(file)).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Reads a file and rejects it unless it came from `expected`.
pub fn read_features_expecting(path: &Path, expected: Fingerprint) -> Result<FeatureFile> {
    let f = read_features(path)?;
    expected.check(f.fingerprint)?;
    Ok(f)
}

pub fn write_features(path: &Path, file: &FeatureFile) -> Result<()> {
    check_unique(&file.rows)?;
    write_atomic(path, |w| file.encode(w))
}

/// Writes through a temporary sibling and renames it over `path`.
pub fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}
