use std::net::SocketAddr;
use std::path::PathBuf;

use serde::Deserialize;

use crate::bins::ColorBins;

pub const TOKEN_ENV: &str = "COMPLIANCE_API_TOKEN";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{TOKEN_ENV} is not set or empty")]
    MissingToken,
    #[error("invalid color bins: {0}")]
    Bins(String),
}

#[derive(Clone, Deserialize)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    #[serde(skip)]
    pub token: String,
    pub bundle_dir: PathBuf,
    /// Directory of built dashboard assets served at `/`.
    pub assets_dir: Option<PathBuf>,
    #[serde(default)]
    pub bins: ColorBins,
}

impl std::fmt::Debug for ServiceConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ServiceConfig")
            .field("addr", &self.addr)
            .field("token", &"<redacted>")
            .field("bundle_dir", &self.bundle_dir)
            .field("assets_dir", &self.assets_dir)
            .field("bins", &self.bins)
            .finish()
    }
}

impl ServiceConfig {
    pub fn new(
        addr: SocketAddr,
        token: impl Into<String>,
        bundle_dir: impl Into<PathBuf>,
    ) -> Result<Self, ConfigError> {
        let cfg = ServiceConfig {
            addr,
            token: token.into(),
            bundle_dir: bundle_dir.into(),
            assets_dir: None,
            bins: ColorBins::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like [`ServiceConfig::new`] with the token read from the environment.
    pub fn from_env(addr: SocketAddr, bundle_dir: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let token = std::env::var(TOKEN_ENV).unwrap_or_default();
        Self::new(addr, token, bundle_dir)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.token.trim().is_empty() {
            return Err(ConfigError::MissingToken);
        }
        self.bins.validate().map_err(ConfigError::Bins)
    }
}
