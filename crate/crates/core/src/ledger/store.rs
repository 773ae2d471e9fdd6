use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::change::{apply_changeset, diff, ChangeError, ChangeItem};
use crate::model::MetabolicModel;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const INDEX_FILE: &str = "index.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    AbductionAccepted,
    Curation,
    ExternalUpdate,
    Simulated,
}

impl std::str::FromStr for Reason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown reason `{s}` (ABDUCTION_ACCEPTED, CURATION, EXTERNAL_UPDATE, SIMULATED)"))
    }
}

impl std::fmt::Display for Reason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = serde_json::to_value(self).expect("unit variant serializes");
        f.write_str(v.as_str().expect("unit variant is a string"))
    }
}

/// Who, why and when, for one revision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordMeta {
    pub reason: Reason,
    pub description: String,
    pub author: String,
    /// Supplied by the caller so that ledgers can be rebuilt reproducibly.
    pub timestamp: String,
}

/// One immutable revision. `id` is the SHA-256 of the parent reference and
/// the canonical JSON of the changeset, hex encoded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevisionRecord {
    pub id: String,
    pub parent: Option<String>,
    pub model_id: String,
    /// Model version after this revision.
    pub version: String,
    pub changeset: Vec<ChangeItem>,
    pub reason: Reason,
    pub description: String,
    pub author: String,
    pub timestamp: String,
}

/// Content hash of a revision. Roots hash `root:<model id>` in place of a
/// parent id so that identical root changesets of different models differ.
pub fn revision_id(parent: Option<&str>, model_id: &str, changeset: &[ChangeItem]) -> String {
    let mut h = Sha256::new();
    match parent {
        Some(p) => h.update(p.as_bytes()),
        None => {
            h.update(b"root:");
            h.update(model_id.as_bytes());
        }
    }
    h.update(b"\n");
    h.update(serde_json::to_vec(changeset).expect("change items serialize"));
    hex::encode(h.finalize())
}

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("unknown revision `{0}`")]
    UnknownRevision(String),
    #[error("no revisions recorded for model `{0}`")]
    UnknownModel(String),
    #[error("empty changeset")]
    EmptyChangeset,
    #[error("revision `{revision}`: {source}")]
    Apply { revision: String, source: ChangeError },
    #[error("chain is broken at position {index}: revision `{revision}` does not follow `{expected}`")]
    ParentMismatch { index: usize, revision: String, expected: String },
    #[error("revision `{0}` does not match its content hash")]
    Tampered(String),
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Serialize, Deserialize)]
struct Index {
    records: usize,
    heads: BTreeMap<String, String>,
}

/// An append-only store of revision records.
///
/// On disk a ledger is a directory with `records.jsonl` (one record per line,
/// appended and fsynced) and `index.json` (record count and the latest head of
/// every model, replaced atomically on each append). The index is only a
/// cache: it is rebuilt from the records when missing or stale.
#[derive(Debug)]
pub struct Ledger {
    dir: Option<PathBuf>,
    records: Vec<RevisionRecord>,
    by_id: HashMap<String, usize>,
    heads: BTreeMap<String, String>,
    /// Most recently computed model state.
    cache: Mutex<Option<(String, MetabolicModel)>>,
}

impl Ledger {
    pub fn in_memory() -> Self {
        Self { dir: None, records: Vec::new(), by_id: HashMap::new(), heads: BTreeMap::new(), cache: Mutex::new(None) }
    }

    /// Opens the ledger in `dir`, creating the directory if needed. Every
    /// record is checked against its content hash and its parent.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, LedgerError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut ledger = Self { dir: Some(dir.clone()), ..Self::in_memory() };
        let path = dir.join(RECORDS_FILE);
        if path.exists() {
            for (i, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let corrupt = |message: String| LedgerError::Corrupt { path: path.clone(), line: i + 1, message };
                let rec: RevisionRecord = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
                if revision_id(rec.parent.as_deref(), &rec.model_id, &rec.changeset) != rec.id {
                    return Err(LedgerError::Tampered(rec.id));
                }
                if let Some(p) = &rec.parent {
                    if !ledger.by_id.contains_key(p) {
                        return Err(corrupt(format!("parent `{p}` precedes no record")));
                    }
                }
                if ledger.by_id.contains_key(&rec.id) {
                    return Err(corrupt(format!("duplicate revision `{}`", rec.id)));
                }
                ledger.push(rec);
            }
        }
        let index_ok = fs::read(dir.join(INDEX_FILE))
            .ok()
            .and_then(|b| serde_json::from_slice::<Index>(&b).ok())
            .is_some_and(|ix| ix.records == ledger.records.len() && ix.heads == ledger.heads);
        if !index_ok {
            ledger.write_index()?;
        }
        Ok(ledger)
    }

    fn push(&mut self, rec: RevisionRecord) {
        self.by_id.insert(rec.id.clone(), self.records.len());
        self.heads.insert(rec.model_id.clone(), rec.id.clone());
        self.records.push(rec);
    }

    fn write_index(&self) -> Result<(), LedgerError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let index = Index { records: self.records.len(), heads: self.heads.clone() };
        let tmp = dir.join(format!("{INDEX_FILE}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            serde_json::to_writer_pretty(&mut f, &index).map_err(io::Error::from)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, dir.join(INDEX_FILE))?;
        Ok(())
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All records in append order.
    pub fn records(&self) -> &[RevisionRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&RevisionRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    /// Latest revision appended for a model.
    pub fn head(&self, model_id: &str) -> Option<&str> {
        self.heads.get(model_id).map(String::as_str)
    }

    /// Records a root revision of `model_id`, applied to the empty model.
    pub fn record_root(
        &mut self,
        model_id: &str,
        changeset: Vec<ChangeItem>,
        meta: RecordMeta,
    ) -> Result<RevisionRecord, LedgerError> {
        self.append(None, model_id.to_string(), MetabolicModel::empty(model_id), changeset, meta)
    }

    /// Records a child of `parent`. The changeset must apply cleanly to the
    /// parent's model state.
    pub fn record(
        &mut self,
        parent: &str,
        changeset: Vec<ChangeItem>,
        meta: RecordMeta,
    ) -> Result<RevisionRecord, LedgerError> {
        let model_id =
            self.get(parent).ok_or_else(|| LedgerError::UnknownRevision(parent.to_string()))?.model_id.clone();
        let base = self.model_at(parent)?;
        self.append(Some(parent.to_string()), model_id, base, changeset, meta)
    }

    /// Records the change from the parent state (or the empty model for a
    /// root) to `target`.
    pub fn record_model(
        &mut self,
        parent: Option<&str>,
        target: &MetabolicModel,
        meta: RecordMeta,
    ) -> Result<RevisionRecord, LedgerError> {
        match parent {
            Some(p) => {
                let base = self.model_at(p)?;
                self.record(p, diff(&base, target), meta)
            }
            None => self.record_root(&target.model_id, diff(&MetabolicModel::empty(&target.model_id), target), meta),
        }
    }

    fn append(
        &mut self,
        parent: Option<String>,
        model_id: String,
        base: MetabolicModel,
        changeset: Vec<ChangeItem>,
        meta: RecordMeta,
    ) -> Result<RevisionRecord, LedgerError> {
        if changeset.is_empty() {
            return Err(LedgerError::EmptyChangeset);
        }
        let id = revision_id(parent.as_deref(), &model_id, &changeset);
        if let Some(existing) = self.get(&id) {
            return Ok(existing.clone());
        }
        let model =
            apply_changeset(&base, &changeset).map_err(|source| LedgerError::Apply { revision: id.clone(), source })?;
        let rec = RevisionRecord {
            id: id.clone(),
            parent,
            model_id,
            version: model.version.clone(),
            changeset,
            reason: meta.reason,
            description: meta.description,
            author: meta.author,
            timestamp: meta.timestamp,
        };
        if let Some(dir) = &self.dir {
            let mut line = serde_json::to_string(&rec).map_err(io::Error::from)?;
            line.push('\n');
            let mut f = OpenOptions::new().create(true).append(true).open(dir.join(RECORDS_FILE))?;
            f.write_all(line.as_bytes())?;
            f.sync_all()?;
        }
        self.push(rec.clone());
        self.write_index()?;
        *self.cache.lock().unwrap_or_else(|e| e.into_inner()) = Some((id, model));
        Ok(rec)
    }

    /// Chain from the root to `id`.
    pub fn lineage(&self, id: &str) -> Result<Vec<RevisionRecord>, LedgerError> {
        let mut chain = Vec::new();
        let mut cur = Some(id.to_string());
        while let Some(c) = cur {
            let rec = self.get(&c).ok_or(LedgerError::UnknownRevision(c))?;
            cur = rec.parent.clone();
            chain.push(rec.clone());
        }
        chain.reverse();
        Ok(chain)
    }

    /// Chain from the root to the latest head of `model_id`.
    pub fn history(&self, model_id: &str) -> Result<Vec<RevisionRecord>, LedgerError> {
        let head = self.head(model_id).ok_or_else(|| LedgerError::UnknownModel(model_id.to_string()))?;
        self.lineage(head)
    }

    /// Model state after revision `id`.
    pub fn model_at(&self, id: &str) -> Result<MetabolicModel, LedgerError> {
        if let Some((cid, m)) = self.cache.lock().unwrap_or_else(|e| e.into_inner()).as_ref() {
            if cid == id {
                return Ok(m.clone());
            }
        }
        let chain = self.lineage(id)?;
        let model = replay(&MetabolicModel::empty(&chain[0].model_id), &chain)?;
        *self.cache.lock().unwrap_or_else(|e| e.into_inner()) = Some((id.to_string(), model.clone()));
        Ok(model)
    }

    /// Every record as stored: one JSON line per record.
    pub fn export_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

/// Folds [`apply_changeset`] over `chain`, starting from `root`. Each record
/// must be the child of the one before it and match its content hash.
pub fn replay(root: &MetabolicModel, chain: &[RevisionRecord]) -> Result<MetabolicModel, LedgerError> {
    let mut model = root.clone();
    for (index, rec) in chain.iter().enumerate() {
        if revision_id(rec.parent.as_deref(), &rec.model_id, &rec.changeset) != rec.id {
            return Err(LedgerError::Tampered(rec.id.clone()));
        }
        if index > 0 && rec.parent.as_deref() != Some(chain[index - 1].id.as_str()) {
            return Err(LedgerError::ParentMismatch {
                index,
                revision: rec.id.clone(),
                expected: chain[index - 1].id.clone(),
            });
        }
        model = apply_changeset(&model, &rec.changeset)
            .map_err(|source| LedgerError::Apply { revision: rec.id.clone(), source })?;
    }
    Ok(model)
}

/// Human-readable changelog of a chain, oldest first.
pub fn changelog(chain: &[RevisionRecord]) -> String {
    let mut out = String::new();
    for rec in chain {
        let short = &rec.id[..rec.id.len().min(12)];
        let _ = writeln!(out, "revision {short} ({} version {:?})", rec.model_id, rec.version);
        if let Some(p) = &rec.parent {
            let _ = writeln!(out, "  parent: {}", &p[..p.len().min(12)]);
        }
        let _ = writeln!(out, "  reason: {}", rec.reason);
        let _ = writeln!(out, "  author: {}", rec.author);
        let _ = writeln!(out, "  date:   {}", rec.timestamp);
        if !rec.description.is_empty() {
            let _ = writeln!(out, "  {}", rec.description);
        }
        for item in &rec.changeset {
            let _ = writeln!(out, "    {} {} {}", item.verb, item.kind, item.entity);
        }
        out.push('\n');
    }
    out
}
