//! Sequential color bins for compliance and beacon cells.

use serde::{Deserialize, Serialize};

/// Bin edges. A compliance value `v` falls in bin `i` where `i` is the number
/// of edges `<= v`, so bin 0 is the worst. Beacon `days_since` uses the
/// number of edges `< d`, so higher is worse and a never-sighted beacon
/// gets its own class one past the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColorBins {
    pub compliance_edges: Vec<f64>,
    pub beacon_edges: Vec<u32>,
}

impl Default for ColorBins {
    fn default() -> Self {
        ColorBins {
            compliance_edges: vec![50.0, 65.0, 80.0, 90.0],
            beacon_edges: vec![1, 3, 6],
        }
    }
}

impl ColorBins {
    pub fn validate(&self) -> Result<(), String> {
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&self.compliance_edges) || self.compliance_edges.iter().any(|e| !e.is_finite()) {
            return Err("compliance_edges must be finite and strictly increasing".into());
        }
        if !self.beacon_edges.windows(2).all(|w| w[0] < w[1]) {
            return Err("beacon_edges must be strictly increasing".into());
        }
        Ok(())
    }

    pub fn compliance(&self, pct: f64) -> u8 {
        self.compliance_edges.iter().filter(|e| **e <= pct).count() as u8
    }

    pub fn beacon(&self, days_since: Option<u32>) -> u8 {
        match days_since {
            Some(d) => self.beacon_edges.iter().filter(|e| **e < d).count() as u8,
            None => self.never_sighted_class(),
        }
    }

    pub fn never_sighted_class(&self) -> u8 {
        self.beacon_edges.len() as u8 + 1
    }

    pub fn compliance_classes(&self) -> u8 {
        self.compliance_edges.len() as u8 + 1
    }
}
