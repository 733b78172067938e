//! The served bundle, reloaded whenever its stamp file changes.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::SystemTime;

use chrono::NaiveDate;
use compliance_core::export::{ExportBundle, Table, TableKind, STAMP_FILE};

/// Everything read from one bundle directory.
#[derive(Debug)]
pub struct LoadedBundle {
    pub generated_at: NaiveDate,
    pub tables: BTreeMap<TableKind, Table>,
    pub timeline: Table,
    pub enrollment: Table,
    /// participant_id -> (funding_group, team_id), from the timeline.
    pub membership: HashMap<String, (String, String)>,
}

impl LoadedBundle {
    fn read(dir: &Path) -> Result<LoadedBundle, String> {
        let bundle = ExportBundle::open(dir).map_err(|e| e.to_string())?;
        let mut tables = BTreeMap::new();
        for kind in TableKind::ALL {
            tables.insert(kind, bundle.read_table(kind).map_err(|e| e.to_string())?);
        }
        let timeline = bundle.read_timeline().map_err(|e| e.to_string())?;
        let enrollment = bundle
            .read_enrollment_overview()
            .map_err(|e| e.to_string())?;
        let col = |name: &str| {
            timeline
                .column(name)
                .ok_or_else(|| format!("timeline has no {name} column"))
        };
        let (pid, group, team) = (
            col("participant_id")?,
            col("funding_group")?,
            col("team_id")?,
        );
        let membership = timeline
            .rows
            .iter()
            .map(|r| (r[pid].clone(), (r[group].clone(), r[team].clone())))
            .collect();
        Ok(LoadedBundle {
            generated_at: bundle.generated_at,
            tables,
            timeline,
            enrollment,
            membership,
        })
    }
}

/// What a request sees: a full bundle or the reason there is none.
pub type Snapshot = Arc<Result<LoadedBundle, String>>;

type Signature = Option<(Vec<u8>, Option<SystemTime>)>;

struct Cached {
    signature: Signature,
    snapshot: Snapshot,
}

/// Serves a consistent snapshot and swaps in a new one when the stamp
/// changes. Readers hold an `Arc` so a swap never tears a response.
pub struct BundleCache {
    dir: PathBuf,
    current: RwLock<Cached>,
}

const RELOAD_ATTEMPTS: usize = 5;

impl BundleCache {
    pub fn new(dir: impl Into<PathBuf>) -> BundleCache {
        let dir = dir.into();
        let (signature, snapshot) = load(&dir);
        BundleCache {
            dir,
            current: RwLock::new(Cached {
                signature,
                snapshot,
            }),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn snapshot(&self) -> Snapshot {
        let signature = stamp_signature(&self.dir);
        {
            let cur = self.current.read().expect("bundle lock");
            if cur.signature == signature {
                return cur.snapshot.clone();
            }
        }
        let mut cur = self.current.write().expect("bundle lock");
        if cur.signature != stamp_signature(&self.dir) {
            let (signature, snapshot) = load(&self.dir);
            if let Ok(b) = snapshot.as_ref() {
                tracing::info!(generated_at = %b.generated_at, "bundle reloaded");
            }
            *cur = Cached {
                signature,
                snapshot,
            };
        }
        cur.snapshot.clone()
    }
}

fn stamp_signature(dir: &Path) -> Signature {
    let path = dir.join(STAMP_FILE);
    let bytes = fs::read(&path).ok()?;
    let mtime = fs::metadata(&path).and_then(|m| m.modified()).ok();
    Some((bytes, mtime))
}

/// Loads until the stamp is the same before and after reading, so a bundle
/// rewritten mid-load is never served as a mix.
fn load(dir: &Path) -> (Signature, Snapshot) {
    let mut last = (None, Arc::new(Err("bundle not loaded".to_owned())));
    for _ in 0..RELOAD_ATTEMPTS {
        let before = stamp_signature(dir);
        if before.is_none() {
            let reason = format!("no bundle stamp {} in {}", STAMP_FILE, dir.display());
            return (None, Arc::new(Err(reason)));
        }
        let result = LoadedBundle::read(dir);
        let after = stamp_signature(dir);
        if before == after {
            return (after, Arc::new(result));
        }
        last = (after, Arc::new(result));
    }
    last
}
