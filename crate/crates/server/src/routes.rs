use std::sync::Arc;

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chrono::NaiveDate;
use compliance_core::export::{Table, TableKind};
use compliance_core::FundingGroup;
use serde::Serialize;
use serde_json::{json, Map, Value};
use tower_http::services::ServeDir;

use crate::bins::ColorBins;
use crate::bundle::{BundleCache, LoadedBundle, Snapshot};
use crate::config::ServiceConfig;
use crate::query::{select, TableParams};

#[derive(Clone)]
pub struct AppState {
    cache: Arc<BundleCache>,
    token: Arc<str>,
    bins: Arc<ColorBins>,
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> AppState {
        AppState {
            cache: Arc::new(BundleCache::new(&config.bundle_dir)),
            token: config.token.as_str().into(),
            bins: Arc::new(config.bins.clone()),
        }
    }
}

pub fn router(config: &ServiceConfig) -> Router {
    let state = AppState::new(config);
    let protected = Router::new()
        .route("/tables/:kind", get(table))
        .route("/timeline", get(timeline))
        .route("/enrollment-overview", get(enrollment_overview))
        .fallback(|| async { error(StatusCode::NOT_FOUND, "not_found", "no such route".into()) })
        .layer(middleware::from_fn_with_state(state.clone(), require_token));
    let api = Router::new().route("/health", get(health)).merge(protected);
    let app = Router::new().nest("/api", api).with_state(state);
    match &config.assets_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(placeholder)),
    }
}

/// A JSON error body `{"status": code, "error": message}`.
#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "status": self.code, "error": self.message })),
        )
            .into_response()
    }
}

fn error(status: StatusCode, code: &'static str, message: String) -> ApiError {
    ApiError {
        status,
        code,
        message,
    }
}

fn tokens_match(given: &[u8], expected: &[u8]) -> bool {
    given.len() == expected.len()
        && given
            .iter()
            .zip(expected)
            .fold(0u8, |acc, (a, b)| acc | (a ^ b))
            == 0
}

async fn require_token(State(state): State<AppState>, req: Request, next: Next) -> Response {
    let given = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim);
    match given {
        Some(t) if tokens_match(t.as_bytes(), state.token.as_bytes()) => next.run(req).await,
        _ => {
            let mut resp = error(
                StatusCode::UNAUTHORIZED,
                "unauthorized",
                "missing or invalid bearer token".into(),
            )
            .into_response();
            resp.headers_mut().insert(
                header::WWW_AUTHENTICATE,
                HeaderValue::from_static("Bearer realm=\"compliance\""),
            );
            resp
        }
    }
}

fn loaded(snapshot: &Snapshot) -> Result<&LoadedBundle, ApiError> {
    snapshot
        .as_ref()
        .as_ref()
        .map_err(|reason| error(StatusCode::SERVICE_UNAVAILABLE, "no_data", reason.clone()))
}

async fn health(State(state): State<AppState>) -> Response {
    let snap = state.cache.snapshot();
    match snap.as_ref() {
        Ok(b) => Json(json!({ "status": "ok", "generated_at": b.generated_at })).into_response(),
        Err(reason) => Json(json!({ "status": "no_data", "reason": reason })).into_response(),
    }
}

#[derive(Debug, Serialize)]
struct ColumnMeta {
    name: String,
    /// `compliance` or `beacon` when cells carry a color bin.
    scale: Option<&'static str>,
}

#[derive(Debug, Serialize)]
struct TablePayload<'a> {
    kind: TableKind,
    generated_at: NaiveDate,
    columns: Vec<ColumnMeta>,
    total_rows: usize,
    rows: Vec<&'a [String]>,
    bins: Vec<Vec<Option<u8>>>,
}

fn column_scale(kind: TableKind, name: &str) -> Option<&'static str> {
    match (kind, name) {
        (TableKind::BeaconLastSighted, "days_since") => Some("beacon"),
        (TableKind::BeaconLastSighted, _) => None,
        (_, "mean_daily_pct" | "compliance_pct") => Some("compliance"),
        (TableKind::WearableRecentWeek | TableKind::SurveyRecentWeek, n)
            if n.parse::<NaiveDate>().is_ok() =>
        {
            Some("compliance")
        }
        _ => None,
    }
}

fn cell_bin(bins: &ColorBins, scale: Option<&str>, cell: &str) -> Option<u8> {
    match scale? {
        "beacon" if cell.is_empty() => Some(bins.beacon(None)),
        "beacon" => cell.parse().ok().map(|d| bins.beacon(Some(d))),
        _ => cell.parse().ok().map(|v| bins.compliance(v)),
    }
}

async fn table(
    State(state): State<AppState>,
    Path(kind): Path<String>,
    Query(params): Query<TableParams>,
) -> Result<Response, ApiError> {
    let Ok(kind) = kind.parse::<TableKind>() else {
        let valid: Vec<_> = TableKind::ALL.iter().map(|k| k.slug()).collect();
        return Err(error(
            StatusCode::NOT_FOUND,
            "unknown_table",
            format!("unknown table {kind:?}; valid tables: {}", valid.join(", ")),
        ));
    };
    let snap = state.cache.snapshot();
    let bundle = loaded(&snap)?;
    let t: &Table = &bundle.tables[&kind];
    let order = select(t, &bundle.membership, &params)
        .map_err(|e| error(StatusCode::BAD_REQUEST, "bad_request", e.to_string()))?;
    let scales: Vec<_> = t.columns.iter().map(|c| column_scale(kind, c)).collect();
    let rows: Vec<&[String]> = order.iter().map(|&i| t.rows[i].as_slice()).collect();
    let bins = rows
        .iter()
        .map(|r| {
            r.iter()
                .zip(&scales)
                .map(|(c, s)| cell_bin(&state.bins, *s, c))
                .collect()
        })
        .collect();
    Ok(Json(TablePayload {
        kind,
        generated_at: bundle.generated_at,
        columns: t
            .columns
            .iter()
            .zip(scales)
            .map(|(name, scale)| ColumnMeta {
                name: name.clone(),
                scale,
            })
            .collect(),
        total_rows: t.rows.len(),
        rows,
        bins,
    })
    .into_response())
}

fn row_object(t: &Table, row: &[String], skip: &[&str]) -> Value {
    let obj: Map<String, Value> = t
        .columns
        .iter()
        .zip(row)
        .filter(|(c, _)| !skip.contains(&c.as_str()))
        .map(|(c, v)| (c.clone(), Value::String(v.clone())))
        .collect();
    Value::Object(obj)
}

fn group_rows(t: &Table, group: FundingGroup) -> impl Iterator<Item = &Vec<String>> {
    let col = t.column("funding_group");
    let want = group.to_string();
    t.rows
        .iter()
        .filter(move |r| col.is_some_and(|c| r[c] == want))
}

async fn timeline(State(state): State<AppState>) -> Result<Json<Value>, ApiError> {
    let snap = state.cache.snapshot();
    let b = loaded(&snap)?;
    let groups: Vec<Value> = FundingGroup::ALL
        .into_iter()
        .map(|g| {
            let participants: Vec<Value> = group_rows(&b.timeline, g)
                .map(|r| row_object(&b.timeline, r, &["funding_group"]))
                .collect();
            json!({ "funding_group": g.to_string(), "participants": participants })
        })
        .collect();
    Ok(Json(
        json!({ "generated_at": b.generated_at, "groups": groups }),
    ))
}

async fn enrollment_overview(State(state): State<AppState>) -> Result<Json<Value>, ApiError> {
    let snap = state.cache.snapshot();
    let b = loaded(&snap)?;
    let t = &b.enrollment;
    let team_col = t.column("team_id");
    let groups: Vec<Value> = FundingGroup::ALL
        .into_iter()
        .map(|g| {
            let mut teams: Vec<(String, Vec<Value>)> = Vec::new();
            for r in group_rows(t, g) {
                let team = team_col.map(|c| r[c].clone()).unwrap_or_default();
                let member = row_object(t, r, &["funding_group", "team_id"]);
                match teams.last_mut() {
                    Some((id, members)) if *id == team => members.push(member),
                    _ => teams.push((team, vec![member])),
                }
            }
            let teams: Vec<Value> = teams
                .into_iter()
                .map(|(id, members)| json!({ "team_id": id, "size": members.len(), "participants": members }))
                .collect();
            json!({ "funding_group": g.to_string(), "teams": teams })
        })
        .collect();
    Ok(Json(
        json!({ "generated_at": b.generated_at, "groups": groups }),
    ))
}

async fn placeholder() -> Html<&'static str> {
    Html(
        "<!doctype html><html><head><meta charset=\"utf-8\"><title>Compliance monitor</title></head>\
         <body><h1>Compliance monitor</h1><p>No dashboard assets are installed. \
         The JSON API is available under <code>/api</code>.</p></body></html>",
    )
}
