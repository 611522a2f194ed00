//! Conversation storage. Everything is kept in memory; with a path, every
//! change is also appended to a JSON lines file as a full snapshot, and on
//! start the last snapshot for each id wins.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use promodel::orchestrator::Conversation;
use thiserror::Error;
use uuid::Uuid;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

/// One conversation, locked while a turn runs so that turns on the same
/// conversation never interleave.
pub type Entry = Arc<Mutex<Conversation>>;

#[derive(Default)]
pub struct Store {
    entries: RwLock<HashMap<Uuid, Entry>>,
    log: Option<(PathBuf, Mutex<File>)>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store::default()
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let io = |source| StoreError::Io { path: path.clone(), source };
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(io)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                let conv: Conversation = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                    path: path.clone(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
                entries.insert(conv.id, Arc::new(Mutex::new(conv)));
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        Ok(Store { entries: RwLock::new(entries), log: Some((path, Mutex::new(file))) })
    }

    pub fn get(&self, id: &Uuid) -> Option<Entry> {
        self.entries.read().unwrap().get(id).cloned()
    }

    pub fn ids(&self) -> Vec<Uuid> {
        let mut ids: Vec<Uuid> = self.entries.read().unwrap().keys().copied().collect();
        ids.sort();
        ids
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, conv: Conversation) -> Result<Entry, StoreError> {
        self.persist(&conv)?;
        let entry = Arc::new(Mutex::new(conv.clone()));
        self.entries.write().unwrap().insert(conv.id, entry.clone());
        Ok(entry)
    }

    /// Appends a snapshot of `conv`; call after every change made through an [`Entry`].
    pub fn persist(&self, conv: &Conversation) -> Result<(), StoreError> {
        let Some((path, file)) = &self.log else { return Ok(()) };
        let mut line = serde_json::to_string(conv).expect("conversations serialize");
        line.push('\n');
        let mut f = file.lock().unwrap();
        f.write_all(line.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|source| StoreError::Io { path: path.clone(), source })
    }
}
