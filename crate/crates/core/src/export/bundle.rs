use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use sha2::{Digest, Sha256};

use super::tables::{
    build_enrollment_overview, build_table, build_timeline, Table, TableKind, ENROLLMENT_FILE,
    TIMELINE_FILE,
};
use crate::compliance::ComplianceDataset;
use crate::error::{Error, Result};
use crate::fsutil::{commit, write_temp, LockFile};

pub const STAMP_FILE: &str = "generated_at.txt";
const LOCK: &str = ".export.lock";

/// A directory written by [`export`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportBundle {
    pub dir: PathBuf,
    pub generated_at: NaiveDate,
}

/// Writes every table, the context files and finally the stamp. All files are
/// written to temporaries first; nothing is renamed unless every write
/// succeeded.
pub fn export(ds: &ComplianceDataset, out_dir: &Path) -> Result<ExportBundle> {
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let _lock = LockFile::acquire(out_dir.join(LOCK))?;

    let mut files: Vec<(String, Table)> = TableKind::ALL
        .into_iter()
        .map(|k| (k.file_name(), build_table(ds, k)))
        .collect();
    files.push((
        TIMELINE_FILE.into(),
        build_timeline(&ds.roster, ds.as_of, &ds.config),
    ));
    files.push((
        ENROLLMENT_FILE.into(),
        build_enrollment_overview(&ds.roster),
    ));

    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let discard = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (name, table) in &files {
        let target = out_dir.join(name);
        match write_temp(&target, |w| table.write_csv(w)) {
            Ok(tmp) => staged.push((tmp, target)),
            Err(e) => {
                discard(&staged);
                return Err(e);
            }
        }
    }
    let stamp = out_dir.join(STAMP_FILE);
    match write_temp(&stamp, |w| writeln!(w, "{}", ds.as_of)) {
        Ok(tmp) => staged.push((tmp, stamp)),
        Err(e) => {
            discard(&staged);
            return Err(e);
        }
    }
    for (i, (tmp, target)) in staged.iter().enumerate() {
        if let Err(e) = commit(tmp, target) {
            discard(&staged[i..]);
            return Err(e);
        }
    }
    Ok(ExportBundle {
        dir: out_dir.to_path_buf(),
        generated_at: ds.as_of,
    })
}

impl ExportBundle {
    /// Every file of a bundle, the stamp last.
    pub fn file_names() -> Vec<String> {
        let mut names: Vec<String> = TableKind::ALL
            .into_iter()
            .map(TableKind::file_name)
            .collect();
        names.push(TIMELINE_FILE.into());
        names.push(ENROLLMENT_FILE.into());
        names.push(STAMP_FILE.into());
        names
    }

    pub fn open(dir: impl Into<PathBuf>) -> Result<ExportBundle> {
        let dir = dir.into();
        let generated_at = read_stamp(&dir)?;
        Ok(ExportBundle { dir, generated_at })
    }

    fn read(&self, name: &str) -> Result<Table> {
        let path = self.dir.join(name);
        let file =
            File::open(&path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Table::read_csv(BufReader::new(file)).map_err(|e| Error::Bundle {
            path,
            reason: e.to_string(),
        })
    }

    pub fn read_table(&self, kind: TableKind) -> Result<Table> {
        self.read(&kind.file_name())
    }

    pub fn read_timeline(&self) -> Result<Table> {
        self.read(TIMELINE_FILE)
    }

    pub fn read_enrollment_overview(&self) -> Result<Table> {
        self.read(ENROLLMENT_FILE)
    }

    /// SHA-256 over the names and bytes of every bundle file.
    pub fn digest(&self) -> Result<String> {
        let mut h = Sha256::new();
        for name in Self::file_names() {
            let path = self.dir.join(&name);
            let bytes =
                fs::read(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            h.update(name.as_bytes());
            h.update([0]);
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(&bytes);
        }
        Ok(hex::encode(h.finalize()))
    }
}

pub(crate) fn read_stamp(dir: &Path) -> Result<NaiveDate> {
    let path = dir.join(STAMP_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let line = text.trim();
    line.parse().map_err(|_| Error::Bundle {
        path,
        reason: format!("stamp {line:?} is not an ISO-8601 date"),
    })
}
