//! Append-only storage: one line-delimited log per session plus an index
//! of sessions in creation order.
//!
//! ```text
//! <root>/index.jsonl            {"ordinal":0,"session_id":"..."}
//! <root>/sessions/<id>.jsonl    {"event":"created",...}
//!                               {"event":"trial",...}
//!                               {"event":"status",...}
//! ```
//!
//! Each record is written with a single `write_all` followed by
//! `sync_data`. A last line without its newline is a torn write and is
//! cut off on load and before the next append.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::ServerError;
use crate::wire::{SessionHeader, StoredEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The next append fails before touching the file.
    FailBeforeWrite,
    /// The next append writes half its line and fails, as a crash
    /// mid-write would.
    TornWrite,
    /// The next append is durable but reports failure, as if the process
    /// died right after writing.
    FailAfterWrite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IndexEntry {
    ordinal: u64,
    session_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSession {
    pub header: SessionHeader,
    /// Events after the header.
    pub events: Vec<StoredEvent>,
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    fault: Mutex<Option<Fault>>,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ServerError> {
        let root = root.into();
        fs::create_dir_all(root.join("sessions"))?;
        Ok(Self {
            root,
            fault: Mutex::new(None),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Arms a one-shot fault for the next append.
    pub fn inject_fault(&self, fault: Fault) {
        *self.fault.lock().expect("fault lock") = Some(fault);
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.jsonl")
    }

    fn session_path(&self, session_id: &str) -> PathBuf {
        self.root
            .join("sessions")
            .join(format!("{session_id}.jsonl"))
    }

    /// Writes the session's first record, then its index entry. A crash
    /// between the two leaves an unindexed log that loading ignores.
    pub fn create_session(&self, header: &SessionHeader) -> Result<(), ServerError> {
        self.append_record(
            &self.session_path(&header.session_id),
            &StoredEvent::Created(header.clone()),
        )?;
        let entry = IndexEntry {
            ordinal: header.ordinal,
            session_id: header.session_id.clone(),
        };
        self.append_record(&self.index_path(), &entry)
    }

    pub fn append(&self, session_id: &str, event: &StoredEvent) -> Result<(), ServerError> {
        self.append_record(&self.session_path(session_id), event)
    }

    fn append_record<T: Serialize>(&self, path: &Path, record: &T) -> Result<(), ServerError> {
        let mut line = serde_json::to_vec(record).map_err(io::Error::other)?;
        line.push(b'\n');
        let fault = self.fault.lock().expect("fault lock").take();
        if fault == Some(Fault::FailBeforeWrite) {
            return Err(io::Error::other("injected failure before write").into());
        }
        repair_tail(path)?;
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if fault == Some(Fault::TornWrite) {
            file.write_all(&line[..line.len() / 2])?;
            file.sync_data()?;
            return Err(io::Error::other("injected torn write").into());
        }
        let before = file.metadata()?.len();
        if let Err(e) = file.write_all(&line).and_then(|()| file.sync_data()) {
            let _ = file.set_len(before);
            return Err(e.into());
        }
        if fault == Some(Fault::FailAfterWrite) {
            return Err(io::Error::other("injected failure after write").into());
        }
        Ok(())
    }

    /// Next free ordinal: one past the highest indexed session.
    pub fn next_ordinal(&self) -> Result<u64, ServerError> {
        Ok(self
            .read_index()?
            .iter()
            .map(|e| e.ordinal + 1)
            .max()
            .unwrap_or(0))
    }

    fn read_index(&self) -> Result<Vec<IndexEntry>, ServerError> {
        read_lines(&self.index_path())
    }

    /// Every indexed session, in ordinal order.
    pub fn load(&self) -> Result<Vec<LoadedSession>, ServerError> {
        let mut index = self.read_index()?;
        index.sort_by_key(|e| e.ordinal);
        let mut out = Vec::with_capacity(index.len());
        for entry in index {
            let path = self.session_path(&entry.session_id);
            if !path.exists() {
                continue;
            }
            let mut events: Vec<StoredEvent> = read_lines(&path)?;
            if events.is_empty() {
                continue;
            }
            let StoredEvent::Created(header) = events.remove(0) else {
                return Err(ServerError::Inconsistent(format!(
                    "{} does not start with a created record",
                    path.display()
                )));
            };
            out.push(LoadedSession { header, events });
        }
        Ok(out)
    }
}

/// Cuts a trailing partial line.
fn repair_tail(path: &Path) -> io::Result<()> {
    let mut file = match OpenOptions::new().read(true).write(true).open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(e),
    };
    let len = file.metadata()?.len();
    if len == 0 {
        return Ok(());
    }
    let mut last = [0u8; 1];
    file.seek(SeekFrom::Start(len - 1))?;
    file.read_exact(&mut last)?;
    if last[0] == b'\n' {
        return Ok(());
    }
    file.seek(SeekFrom::Start(0))?;
    let mut bytes = Vec::with_capacity(len as usize);
    file.read_to_end(&mut bytes)?;
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    tracing::warn!(path = %path.display(), dropped = len as usize - keep, "truncating torn record");
    file.set_len(keep as u64)?;
    file.sync_data()
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ServerError> {
    repair_tail(path)?;
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| ServerError::Corrupt {
                file: path.display().to_string(),
                source,
            })?,
        );
    }
    Ok(out)
}
