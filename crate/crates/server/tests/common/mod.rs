use std::net::SocketAddr;
use std::path::Path;

use chrono::NaiveDate;
use compliance_core::datagen::{generate, CohortPlan, CohortSpec, Scenario};
use compliance_core::export::{export, ExportBundle};
use compliance_core::{compute_all, ComputeContext, FileKind, Store};
use compliance_server::ServiceConfig;

pub const TOKEN: &str = "test-token";

/// Generates, ingests and exports a small messy cohort into `dir/bundle`.
pub fn build_bundle(dir: &Path, as_of: Option<NaiveDate>) -> ExportBundle {
    let spec = CohortSpec {
        seed: 21,
        num_teams: 5,
        cadence_secs: 900,
        scenario: Scenario::realistic(),
        ..CohortSpec::default()
    };
    let files = generate(&CohortPlan::new(&spec), &dir.join("raw")).unwrap();
    let store = Store::open(dir.join("store"), spec.config.clone()).unwrap();
    for (kind, path) in [
        (FileKind::Roster, &files.roster),
        (FileKind::HeartRate, &files.heart_rate),
        (FileKind::Survey, &files.surveys),
        (FileKind::Beacon, &files.beacons),
    ] {
        store.ingest_file(kind, path).unwrap();
    }
    let manifest: compliance_core::datagen::Manifest =
        serde_json::from_slice(&std::fs::read(&files.manifest).unwrap()).unwrap();
    let ctx = ComputeContext::new(as_of.unwrap_or(manifest.as_of), spec.config.clone()).unwrap();
    export(
        &compute_all(&store.snapshot().unwrap(), &ctx),
        &dir.join("bundle"),
    )
    .unwrap()
}

pub struct Server {
    pub base: String,
    _shutdown: tokio::sync::oneshot::Sender<()>,
}

pub async fn start(bundle_dir: &Path) -> Server {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr: SocketAddr = listener.local_addr().unwrap();
    let config = ServiceConfig::new(addr, TOKEN, bundle_dir).unwrap();
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    tokio::spawn(compliance_server::serve_on(listener, config, async {
        let _ = rx.await;
    }));
    Server {
        base: format!("http://{addr}"),
        _shutdown: tx,
    }
}

pub async fn get(url: &str) -> (u16, serde_json::Value) {
    let resp = reqwest::Client::new()
        .get(url)
        .bearer_auth(TOKEN)
        .send()
        .await
        .unwrap();
    let status = resp.status().as_u16();
    (status, resp.json().await.unwrap_or(serde_json::Value::Null))
}
