//! Revision tracking: change items, changeset application and diffing, and an
//! append-only, content-addressed store of revision records.

mod change;
mod store;

pub use change::{apply_changeset, diff, Bounds, ChangeError, ChangeItem, EntityKind, Verb};
pub use store::{
    changelog, replay, revision_id, Ledger, LedgerError, Reason, RecordMeta, RevisionRecord, INDEX_FILE, RECORDS_FILE,
};
