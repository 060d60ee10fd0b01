//! Content-addressed flat-file store.
//!
//! ```text
//! <root>/objects/<id>        payload, byte for byte as uploaded
//! <root>/objects/<id>.json   metadata
//! <root>/runs/<id>.json      generalization runs
//! ```
//!
//! Every file is written to a temporary name and renamed into place, and a
//! payload is written before its metadata, so a reader that finds the
//! metadata always finds the complete payload.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use genrules::formats::ArtifactKind;
use genrules::gart::GartOptions;
use genrules::model::Side;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Hex characters in an id.
const ID_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub id: String,
    pub kind: ArtifactKind,
    pub name: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationRun {
    pub id: String,
    pub ruleset_id: String,
    pub taxonomyset_id: String,
    #[serde(default)]
    pub dataset_id: Option<String>,
    pub side: Side,
    pub options: GartOptions,
    pub status: RunStatus,
    /// Present iff `status` is done.
    #[serde(default)]
    pub result_id: Option<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub error: Option<String>,
    pub created_at: u64,
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn hex_digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect::<String>()[..ID_LEN].to_string()
}

/// Same kind and bytes, same id.
pub fn artifact_id(kind: ArtifactKind, body: &[u8]) -> String {
    hex_digest(&[kind.as_str().as_bytes(), body])
}

/// Same inputs, side and options, same run id.
pub fn run_id(ruleset: &str, taxonomies: &str, dataset: Option<&str>, side: Side, options: &GartOptions) -> String {
    let options = serde_json::to_string(options).expect("options serialize");
    hex_digest(&[
        b"run",
        ruleset.as_bytes(),
        taxonomies.as_bytes(),
        dataset.unwrap_or("").as_bytes(),
        side.as_str().as_bytes(),
        options.as_bytes(),
    ])
}

/// Ids are generated here, so anything else is simply unknown. Checking
/// the shape also keeps request paths out of the filesystem.
fn well_formed(id: &str) -> bool {
    id.len() == ID_LEN && id.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

pub struct Store {
    root: PathBuf,
    writes: Mutex<()>,
    tmp_counter: AtomicU64,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Store> {
        let root = root.into();
        fs::create_dir_all(root.join("objects"))?;
        fs::create_dir_all(root.join("runs"))?;
        Ok(Store { root, writes: Mutex::new(()), tmp_counter: AtomicU64::new(0) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> io::Result<()> {
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = path.with_extension(format!("tmp-{}-{n}", std::process::id()));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, path).inspect_err(|_| {
            let _ = fs::remove_file(&tmp);
        })
    }

    fn object(&self, id: &str) -> PathBuf {
        self.root.join("objects").join(id)
    }

    fn object_meta(&self, id: &str) -> PathBuf {
        self.root.join("objects").join(format!("{id}.json"))
    }

    fn run_path(&self, id: &str) -> PathBuf {
        self.root.join("runs").join(format!("{id}.json"))
    }

    /// Stores a validated payload. Returns the metadata and whether the
    /// artifact is new; an existing artifact keeps its original metadata.
    pub fn put(&self, kind: ArtifactKind, name: &str, body: &[u8]) -> io::Result<(ArtifactMeta, bool)> {
        let id = artifact_id(kind, body);
        let _guard = self.writes.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(meta) = self.meta(&id)? {
            return Ok((meta, false));
        }
        let meta = ArtifactMeta { id: id.clone(), kind, name: name.to_string(), created_at: now(), size: body.len() };
        self.write_atomic(&self.object(&id), body)?;
        self.write_atomic(&self.object_meta(&id), &serde_json::to_vec_pretty(&meta)?)?;
        Ok((meta, true))
    }

    pub fn meta(&self, id: &str) -> io::Result<Option<ArtifactMeta>> {
        if !well_formed(id) {
            return Ok(None);
        }
        match fs::read(self.object_meta(id)) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn raw(&self, id: &str) -> io::Result<Option<(ArtifactMeta, Vec<u8>)>> {
        let Some(meta) = self.meta(id)? else {
            return Ok(None);
        };
        Ok(Some((meta, fs::read(self.object(id))?)))
    }

    pub fn put_run(&self, run: &GeneralizationRun) -> io::Result<()> {
        let _guard = self.writes.lock().unwrap_or_else(|e| e.into_inner());
        self.write_atomic(&self.run_path(&run.id), &serde_json::to_vec_pretty(run)?)
    }

    pub fn run(&self, id: &str) -> io::Result<Option<GeneralizationRun>> {
        if !well_formed(id) {
            return Ok(None);
        }
        match fs::read(self.run_path(id)) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_bytes_same_id() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let (a, new_a) = store.put(ArtifactKind::Transactions, "first", b"a b\n").unwrap();
        let (b, new_b) = store.put(ArtifactKind::Transactions, "second", b"a b\n").unwrap();
        assert!(new_a && !new_b);
        assert_eq!(a, b);
        let (c, _) = store.put(ArtifactKind::Taxonomy, "t", b"a b\n").unwrap();
        assert_ne!(a.id, c.id);
    }

    #[test]
    fn survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let id = {
            let store = Store::open(dir.path()).unwrap();
            store.put(ArtifactKind::Transactions, "db", b"x y\r\n").unwrap().0.id
        };
        let store = Store::open(dir.path()).unwrap();
        let (meta, body) = store.raw(&id).unwrap().unwrap();
        assert_eq!(body, b"x y\r\n");
        assert_eq!(meta.name, "db");
        // nothing left behind by the atomic writes
        let names: Vec<_> = fs::read_dir(dir.path().join("objects")).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 2);
    }

    #[test]
    fn foreign_ids_are_unknown() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.meta("../../etc/passwd").unwrap(), None);
        assert_eq!(store.meta(&"0".repeat(ID_LEN)).unwrap(), None);
        assert_eq!(store.run("nope").unwrap(), None);
    }
}
