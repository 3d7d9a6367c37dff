use std::io::Write;

use serde::{Deserialize, Serialize};

/// Sample statistics of one real component across checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub name: String,
    pub means: Vec<f64>,
    pub ses: Vec<f64>,
    pub zscores: Vec<f64>,
}

/// Monte Carlo drift report. Per-checkpoint arrays all have the length of
/// `checkpoints`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub observable: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub n_paths: usize,
    pub checkpoints: Vec<f64>,
    pub components: Vec<ComponentStats>,
    /// Absorbed (path, point) pairs at each checkpoint.
    pub absorbed_counts: Vec<usize>,
    /// Largest `|M|` component over all paths and points at each checkpoint.
    pub max_abs: Vec<f64>,
    /// (path, point) pairs excluded by the clip quantile at each checkpoint.
    #[serde(default)]
    pub clipped_counts: Vec<usize>,
}

pub const MC_CSV_HEADER: &str = "component,t,mean,se,zscore";

impl McReport {
    /// Pretty JSON with object keys in sorted order.
    pub fn to_json(&self) -> serde_json::Result<String> {
        let value = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Long-format CSV, one row per component and checkpoint.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{MC_CSV_HEADER}")?;
        for c in &self.components {
            for (k, t) in self.checkpoints.iter().enumerate() {
                writeln!(out, "{},{},{},{},{}", c.name, t, c.means[k], c.ses[k], c.zscores[k])?;
            }
        }
        Ok(())
    }

    /// Largest `|z|` over every component and checkpoint.
    pub fn max_abs_zscore(&self) -> f64 {
        self.components.iter().flat_map(|c| &c.zscores).fold(0.0, |m, z| m.max(z.abs()))
    }
}
