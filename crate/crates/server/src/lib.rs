//! HTTP API over an exported compliance bundle.
//!
//! Every route under `/api` except `/api/health` requires
//! `Authorization: Bearer <token>`. The bundle is re-read whenever its stamp
//! file changes, and each request is answered from a single snapshot.

pub mod bins;
mod bundle;
mod config;
pub mod query;
mod routes;

use std::future::Future;

pub use bins::ColorBins;
pub use bundle::{BundleCache, LoadedBundle};
pub use config::{ConfigError, ServiceConfig, TOKEN_ENV};
pub use routes::{router, AppState};

/// Binds `config.addr` and serves until `shutdown` resolves.
pub async fn serve(
    config: ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    serve_on(listener, config, shutdown).await
}

/// Serves on an already bound listener, for callers that pick an ephemeral port.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    config: ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, bundle = %config.bundle_dir.display(), "serving");
    axum::serve(listener, router(&config))
        .with_graceful_shutdown(shutdown)
        .await
}
