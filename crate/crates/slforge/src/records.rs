//! Line-delimited JSON files and compressed inputs.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: line {line}: {message}")]
    Schema { path: PathBuf, line: usize, message: String },
}

impl RecordError {
    pub fn line(&self) -> Option<usize> {
        match self {
            RecordError::Schema { line, .. } => Some(*line),
            RecordError::Io { .. } => None,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RecordError + '_ {
    move |source| RecordError::Io { path: path.into(), source }
}

/// Opens `path` for buffered reading, gunzipping `.gz` files.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead + Send>, RecordError> {
    let f = File::open(path).map_err(io_err(path))?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(f))))
    } else {
        Ok(Box::new(BufReader::new(f)))
    }
}

/// Parses every non-blank line of a JSONL file. Line numbers are one-based.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, RecordError> {
    let mut out = Vec::new();
    for_each_jsonl(path, |_, t| {
        out.push(t);
        Ok(())
    })?;
    Ok(out)
}

pub fn for_each_jsonl<T: DeserializeOwned>(
    path: &Path,
    mut f: impl FnMut(usize, T) -> Result<(), RecordError>,
) -> Result<(), RecordError> {
    for (i, line) in open_input(path)?.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let t = serde_json::from_str(&line).map_err(|e| RecordError::Schema {
            path: path.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        f(i + 1, t)?;
    }
    Ok(())
}

/// Writes to a sibling temporary file and renames it over `path` on
/// [`AtomicFile::commit`], so readers never see half-written outputs.
pub struct AtomicFile {
    path: PathBuf,
    tmp: PathBuf,
    out: BufWriter<File>,
}

impl AtomicFile {
    pub fn create(path: &Path) -> Result<Self, RecordError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".tmp");
        let tmp = path.with_file_name(name);
        let out = BufWriter::new(File::create(&tmp).map_err(io_err(&tmp))?);
        Ok(AtomicFile { path: path.into(), tmp, out })
    }

    pub fn write_record<T: Serialize>(&mut self, t: &T) -> Result<(), RecordError> {
        serde_json::to_writer(&mut self.out, t)
            .map_err(|e| RecordError::Io { path: self.tmp.clone(), source: e.into() })?;
        self.out.write_all(b"\n").map_err(io_err(&self.tmp))
    }

    pub fn writer(&mut self) -> &mut impl Write {
        &mut self.out
    }

    pub fn commit(mut self) -> Result<(), RecordError> {
        self.out.flush().map_err(io_err(&self.tmp))?;
        self.out.get_ref().sync_all().map_err(io_err(&self.tmp))?;
        std::fs::rename(&self.tmp, &self.path).map_err(io_err(&self.path))
    }
}

pub fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    items: impl IntoIterator<Item = &'a T>,
) -> Result<(), RecordError> {
    let mut f = AtomicFile::create(path)?;
    for t in items {
        f.write_record(t)?;
    }
    f.commit()
}

/// Appends records to a file, flushing after each one.
pub struct Appender {
    path: PathBuf,
    out: File,
}

impl Appender {
    pub fn open(path: &Path) -> Result<Self, RecordError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let out = std::fs::OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))?;
        Ok(Appender { path: path.into(), out })
    }

    pub fn append<T: Serialize>(&mut self, t: &T) -> Result<(), RecordError> {
        let mut line = serde_json::to_vec(t).map_err(|e| RecordError::Io { path: self.path.clone(), source: e.into() })?;
        line.push(b'\n');
        self.out.write_all(&line).map_err(io_err(&self.path))?;
        self.out.flush().map_err(io_err(&self.path))
    }
}
