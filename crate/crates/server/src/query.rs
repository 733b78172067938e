//! Server-side filtering and sorting of bundle tables.

use std::cmp::Ordering;
use std::collections::HashMap;

use compliance_core::export::Table;
use compliance_core::FundingGroup;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SortDir {
    #[default]
    Asc,
    Desc,
}

/// Raw query-string parameters of a table request.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct TableParams {
    pub group: Option<String>,
    pub team: Option<String>,
    pub q: Option<String>,
    pub sort: Option<String>,
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("unknown sort column {column:?}; valid columns: {}", valid.join(", "))]
    UnknownColumn { column: String, valid: Vec<String> },
    #[error("unknown sort direction {0:?}; use asc or desc")]
    Direction(String),
    #[error("unknown funding group {0:?}; use A or B")]
    Group(String),
    #[error("table has no participant_id column")]
    NoParticipantColumn,
}

/// Returns the indices of `table.rows` that pass the filters, in response order.
pub fn select(
    table: &Table,
    membership: &HashMap<String, (String, String)>,
    params: &TableParams,
) -> Result<Vec<usize>, QueryError> {
    let pid = table
        .column("participant_id")
        .ok_or(QueryError::NoParticipantColumn)?;
    let group = nonempty(&params.group)
        .map(|g| {
            g.parse::<FundingGroup>()
                .map(|g| g.to_string())
                .map_err(|_| QueryError::Group(g.to_owned()))
        })
        .transpose()?;
    let team = nonempty(&params.team).map(str::to_ascii_uppercase);
    let needle = nonempty(&params.q).map(str::to_ascii_uppercase);
    let dir = match nonempty(&params.dir) {
        None => SortDir::Asc,
        Some(d) if d.eq_ignore_ascii_case("asc") => SortDir::Asc,
        Some(d) if d.eq_ignore_ascii_case("desc") => SortDir::Desc,
        Some(d) => return Err(QueryError::Direction(d.to_owned())),
    };
    let sort = nonempty(&params.sort)
        .map(|c| {
            table.column(c).ok_or_else(|| QueryError::UnknownColumn {
                column: c.to_owned(),
                valid: table.columns.clone(),
            })
        })
        .transpose()?;

    let mut keep: Vec<usize> = (0..table.rows.len())
        .filter(|&i| {
            let id = &table.rows[i][pid];
            let (g, t) = membership
                .get(id.as_str())
                .map(|(g, t)| (g.as_str(), t.as_str()))
                .unwrap_or(("", ""));
            group.as_deref().is_none_or(|want| g == want)
                && team
                    .as_deref()
                    .is_none_or(|want| t.eq_ignore_ascii_case(want))
                && needle.as_deref().is_none_or(|n| {
                    id.to_ascii_uppercase().contains(n) || t.to_ascii_uppercase().contains(n)
                })
        })
        .collect();

    if let Some(col) = sort {
        let date = table.column("date");
        keep.sort_by(|&a, &b| {
            let (ra, rb) = (&table.rows[a], &table.rows[b]);
            compare_cells(&ra[col], &rb[col], dir)
                .then_with(|| ra[pid].cmp(&rb[pid]))
                .then_with(|| date.map_or(Ordering::Equal, |d| ra[d].cmp(&rb[d])))
        });
    }
    Ok(keep)
}

fn nonempty(v: &Option<String>) -> Option<&str> {
    v.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

/// Typed cell order: numbers numerically, everything else as text, empty
/// cells after all others in either direction.
pub fn compare_cells(a: &str, b: &str, dir: SortDir) -> Ordering {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Greater,
        (false, true) => return Ordering::Less,
        _ => {}
    }
    let ord = match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    };
    match dir {
        SortDir::Asc => ord,
        SortDir::Desc => ord.reverse(),
    }
}
