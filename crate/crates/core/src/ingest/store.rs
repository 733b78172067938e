use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tracing::{info, warn};

use super::timefmt::write_instant;
use super::{
    parse_beacon_log, parse_heart_rate_log, parse_roster, parse_survey_log, FileKind, HeartRateLog,
    IngestReport,
};
use crate::domain::{BeaconSighting, ParticipantId, RosterEntry, StudyConfig, SurveySubmission};
use crate::error::{Error, Result};
use crate::fsutil::{write_atomic, LockFile};

const MANIFEST: &str = "manifest.txt";
const LOCK: &str = ".ingest.lock";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub sha256: String,
    pub file_name: String,
}

/// Everything a store holds, loaded into memory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StoreSnapshot {
    pub roster: Vec<RosterEntry>,
    pub heart_rate: HeartRateLog,
    pub surveys: Vec<SurveySubmission>,
    pub beacons: Vec<BeaconSighting>,
}

/// A directory of canonical, sorted record files plus a manifest of the
/// digests of every file ingested so far.
///
/// Ingesting is idempotent: a file whose digest is already in the manifest
/// changes nothing, and records are deduplicated on their natural key. A file
/// with a hard parse error leaves the store untouched.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
    config: StudyConfig,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>, config: StudyConfig) -> Result<Store> {
        let root = root.into();
        config.validate()?;
        fs::create_dir_all(&root)
            .map_err(|e| Error::io(format!("creating store {}", root.display()), e))?;
        let manifest = root.join(MANIFEST);
        if !manifest.exists() {
            write_atomic(&manifest, |_| Ok(()))?;
        }
        Ok(Store { root, config })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &StudyConfig {
        &self.config
    }

    pub fn manifest(&self) -> Result<Vec<ManifestEntry>> {
        let path = self.root.join(MANIFEST);
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Ok(text
            .lines()
            .filter_map(|l| l.split_once(' '))
            .map(|(sha, name)| ManifestEntry {
                sha256: sha.to_owned(),
                file_name: name.to_owned(),
            })
            .collect())
    }

    /// Ingests a file from disk. The file is read twice (digest, then parse)
    /// so large logs are never held in memory as raw bytes.
    pub fn ingest_file(&self, kind: FileKind, path: &Path) -> Result<IngestReport> {
        let open =
            || File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e));
        let mut hasher = Sha256::new();
        io::copy(&mut BufReader::new(open()?), &mut hasher)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let digest = hex::encode(hasher.finalize());
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.ingest_source(
            kind,
            &name,
            digest,
            BufReader::with_capacity(1 << 16, open()?),
        )
    }

    pub fn ingest_bytes(&self, kind: FileKind, name: &str, bytes: &[u8]) -> Result<IngestReport> {
        let digest = hex::encode(Sha256::digest(bytes));
        self.ingest_source(kind, name, digest, bytes)
    }

    fn ingest_source<R: Read>(
        &self,
        kind: FileKind,
        name: &str,
        digest: String,
        input: R,
    ) -> Result<IngestReport> {
        let _lock = LockFile::acquire(self.root.join(LOCK))?;
        let known = self.manifest()?.iter().any(|m| m.sha256 == digest);

        let mut report = match kind {
            FileKind::Roster => {
                let (entries, mut report) = parse_roster(input, &self.config)?;
                if !known {
                    let mut merged: BTreeMap<ParticipantId, RosterEntry> = self
                        .load_roster()?
                        .into_iter()
                        .map(|e| (e.participant_id.clone(), e))
                        .collect();
                    let mut unchanged = 0;
                    for e in entries {
                        match merged.get(&e.participant_id) {
                            Some(old) if *old == e => unchanged += 1,
                            _ => {
                                merged.insert(e.participant_id.clone(), e);
                            }
                        }
                    }
                    report.demote_to_duplicates(unchanged);
                    if report.records_accepted > 0 {
                        self.write_roster(merged.into_values().collect())?;
                    }
                }
                report
            }
            FileKind::HeartRate => {
                let (log, mut report) = parse_heart_rate_log(input, &self.config)?;
                if !known {
                    let mut existing = self.load_heart_rate()?;
                    let (_, dups) = existing.merge(log);
                    report.demote_to_duplicates(dups);
                    if report.records_accepted > 0 {
                        self.write_heart_rate(&existing)?;
                    }
                }
                report
            }
            FileKind::Survey => {
                let (subs, mut report) = parse_survey_log(input)?;
                if !known {
                    let mut merged: BTreeMap<_, bool> = self
                        .load_surveys()?
                        .into_iter()
                        .map(|s| ((s.participant_id, s.survey_date), s.completed))
                        .collect();
                    let mut unchanged = 0;
                    for s in subs {
                        match merged.get_mut(&(s.participant_id.clone(), s.survey_date)) {
                            Some(slot) if *slot || !s.completed => unchanged += 1,
                            Some(slot) => *slot = true,
                            None => {
                                merged.insert((s.participant_id, s.survey_date), s.completed);
                            }
                        }
                    }
                    report.demote_to_duplicates(unchanged);
                    if report.records_accepted > 0 {
                        self.write_surveys(&merged)?;
                    }
                }
                report
            }
            FileKind::Beacon => {
                let (sightings, mut report) = parse_beacon_log(input)?;
                if !known {
                    let mut merged: std::collections::BTreeSet<BeaconSighting> =
                        self.load_beacons()?.into_iter().collect();
                    let before = merged.len();
                    let incoming = sightings.len();
                    merged.extend(sightings);
                    report.demote_to_duplicates((before + incoming - merged.len()) as u64);
                    if report.records_accepted > 0 {
                        self.write_beacons(&merged)?;
                    }
                }
                report
            }
        };

        if known {
            report.demote_to_duplicates(report.records_accepted);
            report.already_ingested = true;
            info!(kind = %kind, file = name, "file already ingested");
        } else {
            self.append_manifest(&digest, name)?;
        }
        Ok(report)
    }

    fn append_manifest(&self, digest: &str, name: &str) -> Result<()> {
        let path = self.root.join(MANIFEST);
        let mut text =
            fs::read(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        writeln!(text, "{digest} {name}").expect("write to vec");
        write_atomic(&path, |w| w.write_all(&text))
    }

    fn canonical(&self, kind: FileKind) -> Option<BufReader<File>> {
        File::open(self.root.join(kind.store_file()))
            .ok()
            .map(|f| BufReader::with_capacity(1 << 16, f))
    }

    fn note_rejections(&self, report: &IngestReport) {
        if report.records_rejected > 0 {
            warn!(
                kind = %report.file_kind,
                rejected = report.records_rejected,
                "canonical store file holds rows the current configuration rejects"
            );
        }
    }

    pub fn load_roster(&self) -> Result<Vec<RosterEntry>> {
        let Some(r) = self.canonical(FileKind::Roster) else {
            return Ok(Vec::new());
        };
        let (entries, report) = parse_roster(r, &self.config)?;
        self.note_rejections(&report);
        Ok(entries)
    }

    pub fn load_heart_rate(&self) -> Result<HeartRateLog> {
        let Some(r) = self.canonical(FileKind::HeartRate) else {
            return Ok(HeartRateLog::new());
        };
        let (log, report) = parse_heart_rate_log(r, &self.config)?;
        self.note_rejections(&report);
        Ok(log)
    }

    pub fn load_surveys(&self) -> Result<Vec<SurveySubmission>> {
        let Some(r) = self.canonical(FileKind::Survey) else {
            return Ok(Vec::new());
        };
        let (subs, report) = parse_survey_log(r)?;
        self.note_rejections(&report);
        Ok(subs)
    }

    pub fn load_beacons(&self) -> Result<Vec<BeaconSighting>> {
        let Some(r) = self.canonical(FileKind::Beacon) else {
            return Ok(Vec::new());
        };
        let (sightings, report) = parse_beacon_log(r)?;
        self.note_rejections(&report);
        Ok(sightings)
    }

    pub fn snapshot(&self) -> Result<StoreSnapshot> {
        Ok(StoreSnapshot {
            roster: self.load_roster()?,
            heart_rate: self.load_heart_rate()?,
            surveys: self.load_surveys()?,
            beacons: self.load_beacons()?,
        })
    }

    fn write_roster(&self, mut entries: Vec<RosterEntry>) -> Result<()> {
        entries
            .sort_by(|a, b| (&a.team_id, &a.participant_id).cmp(&(&b.team_id, &b.participant_id)));
        write_atomic(&self.root.join(FileKind::Roster.store_file()), |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(FileKind::Roster.header())?;
            for e in &entries {
                let date =
                    |d: Option<chrono::NaiveDate>| d.map(|d| d.to_string()).unwrap_or_default();
                out.write_record([
                    e.team_id.as_str(),
                    e.participant_id.as_str(),
                    e.funding_group.as_str(),
                    e.status.as_str(),
                    &date(e.start_date),
                    &date(e.end_date),
                    e.timezone.name(),
                ])?;
            }
            out.flush()
        })
    }

    fn write_heart_rate(&self, log: &HeartRateLog) -> Result<()> {
        write_atomic(&self.root.join(FileKind::HeartRate.store_file()), |w| {
            writeln!(w, "{}", FileKind::HeartRate.header().join(","))?;
            let mut line = String::with_capacity(64);
            for (id, points) in log.iter() {
                for p in points {
                    line.clear();
                    line.push_str(id.as_str());
                    line.push(',');
                    write_instant(&mut line, p.timestamp);
                    line.push(',');
                    let _ = std::fmt::Write::write_fmt(&mut line, format_args!("{}", p.hr_bpm));
                    line.push('\n');
                    w.write_all(line.as_bytes())?;
                }
            }
            Ok(())
        })
    }

    fn write_surveys(
        &self,
        merged: &BTreeMap<(ParticipantId, chrono::NaiveDate), bool>,
    ) -> Result<()> {
        write_atomic(&self.root.join(FileKind::Survey.store_file()), |w| {
            writeln!(w, "{}", FileKind::Survey.header().join(","))?;
            for ((id, date), completed) in merged {
                writeln!(w, "{id},{date},{completed}")?;
            }
            Ok(())
        })
    }

    fn write_beacons(&self, sightings: &std::collections::BTreeSet<BeaconSighting>) -> Result<()> {
        write_atomic(&self.root.join(FileKind::Beacon.store_file()), |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(FileKind::Beacon.header())?;
            for s in sightings {
                out.write_record([
                    s.participant_id.as_str(),
                    s.beacon_id.as_str(),
                    &super::format_instant(s.timestamp),
                ])?;
            }
            out.flush()
        })
    }
}
