//! Participant compliance monitoring for longitudinal wearable studies.
//!
//! The pipeline is: raw CSV logs are [`ingest`]ed into a [`Store`], the
//! [`compliance`] engine scores every participant-day against half-hour
//! windows, and [`export`] writes the deterministic table bundle that the
//! API server and researchers read. [`datagen`] produces synthetic cohorts
//! with known ground truth.

pub mod compliance;
pub mod datagen;
pub mod domain;
pub mod error;
pub mod export;
mod fsutil;
pub mod ingest;

pub use compliance::{compute_all, ComplianceDataset, ComputeContext, ParticipantCompliance};
pub use domain::*;
pub use error::{Error, Result};
pub use export::{ExportBundle, Table, TableKind};

pub use fsutil::LockFile;
pub use ingest::{FileKind, IngestReport, Store, StoreSnapshot};
