//! Run configuration: the key/value document every command reads and writes.
//!
//! Configs serialize to TOML. A run writes its effective config next to its
//! outputs, and that file re-parses to an equivalent config, so any run can
//! be reproduced from its output directory alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::QGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Cascade,
    Ingest,
    Estimate,
    Spectrum,
    Oracle,
    Verify,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Cascade => "cascade",
            Command::Ingest => "ingest",
            Command::Estimate => "estimate",
            Command::Spectrum => "spectrum",
            Command::Oracle => "oracle",
            Command::Verify => "verify",
        }
    }
}

/// Everything one run needs. Exactly one command; the q-grid is described
/// per coordinate (a single entry broadcasts to all coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub base: u32,
    pub dimension: u32,
    pub levels: usize,
    /// Weight vectors, one per measure, gauge last. Empty when the run
    /// ingests samples instead.
    #[serde(default)]
    pub weights: Vec<Vec<f64>>,
    /// Plain-text sample file: one point per line, whitespace-separated
    /// coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<PathBuf>,
    #[serde(default = "default_q_min")]
    pub q_min: Vec<f64>,
    #[serde(default = "default_q_max")]
    pub q_max: Vec<f64>,
    #[serde(default = "default_q_step")]
    pub q_step: Vec<f64>,
    /// Fit window (inclusive); defaults to the top half of the levels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(usize, usize)>,
    /// Histogram bin width; defaults to 5% of the spectral range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_q_min() -> Vec<f64> {
    vec![-3.0]
}

fn default_q_max() -> Vec<f64> {
    vec![3.0]
}

fn default_q_step() -> Vec<f64> {
    vec![0.25]
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base < 2 {
            return Err(Error::BadConfig(format!("base {} must be >= 2", self.base)));
        }
        if self.dimension < 1 {
            return Err(Error::BadConfig("dimension must be >= 1".into()));
        }
        if self.q_min.len() != self.q_max.len() || self.q_min.len() != self.q_step.len() {
            return Err(Error::BadConfig(
                "q-min/q-max/q-step must have matching lengths".into(),
            ));
        }
        if self.q_min.is_empty() {
            return Err(Error::BadConfig("empty q-grid description".into()));
        }
        for j in 0..self.q_min.len() {
            if !(self.q_step[j] > 0.0) {
                return Err(Error::BadConfig(format!(
                    "q-step {} must be positive",
                    self.q_step[j]
                )));
            }
            if self.q_max[j] < self.q_min[j] {
                return Err(Error::BadConfig(format!(
                    "empty q range [{}, {}]",
                    self.q_min[j], self.q_max[j]
                )));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return Err(Error::BadConfig(format!("delta {} must be positive", d)));
            }
        }
        if let Some((lo, hi)) = self.window {
            if lo < 1 || hi < lo {
                return Err(Error::BadConfig(format!(
                    "window {}..={} must satisfy 1 <= lo <= hi",
                    lo, hi
                )));
            }
        }
        let needs_measures = !matches!(self.command, Command::Verify);
        if needs_measures && self.weights.is_empty() && self.samples.is_none() {
            return Err(Error::BadConfig(
                "need weight vectors (gauge last) or a samples file".into(),
            ));
        }
        if matches!(self.command, Command::Oracle) && self.weights.len() < 2 {
            return Err(Error::BadConfig(
                "the oracle needs cascade weights (at least one analyzed vector plus the gauge)"
                    .into(),
            ));
        }
        Ok(())
    }

    /// The q-grid for `k` analyzed measures; singleton descriptions
    /// broadcast across coordinates.
    pub fn qgrid(&self, k: usize) -> Result<QGrid> {
        let expand = |v: &[f64]| -> Result<Vec<f64>> {
            if v.len() == k {
                Ok(v.to_vec())
            } else if v.len() == 1 {
                Ok(vec![v[0]; k])
            } else {
                Err(Error::BadConfig(format!(
                    "q-grid described for {} coordinates but the run has k = {}",
                    v.len(),
                    k
                )))
            }
        };
        QGrid::new(
            expand(&self.q_min)?,
            expand(&self.q_max)?,
            expand(&self.q_step)?,
        )
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<config>".into(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses the plain-text sample format: one point per line,
/// whitespace-separated coordinates, blank lines ignored.
pub fn parse_samples_text(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let coords: std::result::Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        match coords {
            Ok(c) => points.push(c),
            Err(e) => {
                return Err(Error::Parse {
                    path: format!("<samples> line {}", lineno + 1),
                    reason: e.to_string(),
                })
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(points)
}

pub fn load_samples(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_samples_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_config() -> RunConfig {
        RunConfig {
            command: Command::Estimate,
            base: 2,
            dimension: 1,
            levels: 12,
            weights: vec![vec![0.25, 0.75], vec![0.5, 0.5]],
            samples: None,
            q_min: vec![-3.0],
            q_max: vec![3.0],
            q_step: vec![0.25],
            window: Some((7, 12)),
            delta: None,
            out: PathBuf::from("out"),
            seed: 7,
        }
    }

    #[test]
    fn config_roundtrips_through_toml() {
        let cfg = sample_config();
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn config_rejects_zero_step() {
        let mut cfg = sample_config();
        cfg.q_step = vec![0.0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_requires_measures() {
        let mut cfg = sample_config();
        cfg.weights.clear();
        assert!(cfg.validate().is_err());
        cfg.samples = Some(PathBuf::from("points.txt"));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn qgrid_broadcasts_singletons() {
        let cfg = sample_config();
        let grid = cfg.qgrid(2).unwrap();
        assert_eq!(grid.min, vec![-3.0, -3.0]);
        assert_eq!(grid.step, vec![0.25, 0.25]);
    }

    #[test]
    fn samples_text_parses() {
        let pts = parse_samples_text("0.1 0.2\n\n0.9 1.0\n").unwrap();
        assert_eq!(pts, vec![vec![0.1, 0.2], vec![0.9, 1.0]]);
        assert!(parse_samples_text("a b\n").is_err());
        assert!(parse_samples_text("\n").is_err());
    }
}
