//! Run configuration: JSON file, command-line overrides and hashing.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use cachecast::analysis::EulerInversionParams;
use cachecast::geometry::SystemConfig;
use cachecast::planner::{LatencyParams, Objective};
use cachecast::Receiver;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Evenly spaced grid written `start:stop:points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + step * i as f64).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("grid `{s}` is not of the form start:stop:points"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("grid `{s}`: {e}"));
        let (start, stop) = (num(a)?, num(b)?);
        let points: usize = n.trim().parse().map_err(|e| format!("grid `{s}`: {e}"))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(format!("grid `{s}` has non-finite bounds"));
        }
        if points == 0 || (points > 1 && stop <= start) {
            return Err(format!("grid `{s}` needs points >= 1 and stop > start"));
        }
        Ok(Grid { start, stop, points })
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErgodicConfig {
    pub geometries: u64,
    pub fading_per_geometry: u64,
}

impl Default for ErgodicConfig {
    fn default() -> Self {
        Self {
            geometries: 500,
            fading_per_geometry: 20,
        }
    }
}

/// Latency parameters; the bandwidth comes from `system.bandwidth_w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyConfig {
    pub file_bits: f64,
    pub users: f64,
    pub mu: f64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        let p = LatencyParams::default();
        Self {
            file_bits: p.file_bits,
            users: p.users,
            mu: p.mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub users: usize,
    pub files: usize,
    /// Cache size `M` in files, an integer or a fraction such as `"3/2"`.
    pub cache_files: String,
    pub edge_nodes: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub file_bytes: usize,
    /// Requested file per user; defaults to `k mod N`.
    pub demand: Option<Vec<usize>>,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            users: 3,
            files: 3,
            cache_files: "1".into(),
            edge_nodes: 5,
            l: 2,
            file_bytes: 60,
            demand: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub receiver: Receiver,
    /// Geometry draws for Monte Carlo CDFs and outage curves.
    pub trials: u64,
    pub ergodic: ErgodicConfig,
    /// Delivery rates in bit/s/Hz.
    pub rate_grid: Grid,
    /// SIR thresholds in dB.
    pub sir_db_grid: Grid,
    pub objective: Objective,
    /// Monte Carlo draws used to re-score the planner's choice (0 = skip).
    pub verify_trials: u64,
    pub euler: EulerInversionParams,
    pub latency: LatencyConfig,
    pub demo: DemoConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            receiver: Receiver::Pzf,
            trials: 20_000,
            ergodic: ErgodicConfig::default(),
            rate_grid: Grid {
                start: 0.1,
                stop: 3.0,
                points: 30,
            },
            sir_db_grid: Grid {
                start: -10.0,
                stop: 40.0,
                points: 101,
            },
            objective: Objective::AverageRate,
            verify_trials: 0,
            euler: EulerInversionParams::default(),
            latency: LatencyConfig::default(),
            demo: DemoConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> CliResult<()> {
        self.system.validate()?;
        self.euler.validate()?;
        if self.trials == 0 {
            return Err(CliError::Config("trials must be >= 1".into()));
        }
        if self.ergodic.geometries == 0 || self.ergodic.fading_per_geometry == 0 {
            return Err(CliError::Config("ergodic trial counts must be >= 1".into()));
        }
        if self.rate_grid.start <= 0.0 {
            return Err(CliError::Config("rate grid must start above 0".into()));
        }
        if let Objective::TargetOutage { target } = self.objective {
            if !(target > 0.0 && target < 1.0) {
                return Err(CliError::Config(format!("target outage must lie in (0, 1), got {target}")));
            }
        }
        Ok(())
    }

    pub fn latency_params(&self) -> LatencyParams {
        LatencyParams {
            file_bits: self.latency.file_bits,
            bandwidth_hz: self.system.bandwidth_w,
            users: self.latency.users,
            mu: self.latency.mu,
        }
    }

    pub fn seed(&self) -> u64 {
        self.system.seed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON encoding. Worker count and output
    /// location are not part of the configuration and never affect it.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "0.5:2:4".parse().unwrap();
        assert_eq!(g.values(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.to_string(), "0.5:2:4");
        assert!("1:0:3".parse::<Grid>().is_err());
        assert!("1:2".parse::<Grid>().is_err());
        assert!("a:2:3".parse::<Grid>().is_err());
        assert_eq!("3:3:1".parse::<Grid>().unwrap().values(), vec![3.0]);
    }

    #[test]
    fn json_round_trip_and_hash() {
        let c = RunConfig::default();
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let mut d = c.clone();
        d.system.seed = 2;
        assert_ne!(d.hash(), c.hash());
    }

    #[test]
    fn partial_config_and_unknown_fields() {
        let c: RunConfig = serde_json::from_str(r#"{"system": {"L": 3, "n_r": 16}, "rate_grid": "0.2:1:5"}"#).unwrap();
        assert_eq!(c.system.l, 3);
        assert_eq!(c.system.n_r, 16);
        assert_eq!(c.system.eta, 3.75);
        assert_eq!(c.rate_grid.points, 5);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sytem": {}}"#).is_err());
        let o: RunConfig = serde_json::from_str(r#"{"objective": {"kind": "target-outage", "target": 0.1}}"#).unwrap();
        assert_eq!(o.objective, Objective::TargetOutage { target: 0.1 });
    }
}
