//! The report bundle: seven compliance tables, two context tables and a
//! stamp file, all plain CSV.

mod bundle;
mod tables;

pub use bundle::{export, ExportBundle, STAMP_FILE};
pub use tables::{
    build_enrollment_overview, build_table, build_timeline, recent_week, Table, TableKind,
    ENROLLMENT_FILE, TIMELINE_FILE,
};
