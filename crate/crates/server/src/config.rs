use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trustgrid_core::WorldConfig;

use crate::error::ServerError;

pub const ENV_HOST: &str = "TRUSTGRID_HOST";
pub const ENV_PORT: &str = "TRUSTGRID_PORT";
pub const ENV_DATA_DIR: &str = "TRUSTGRID_DATA_DIR";
pub const ENV_EXPERIMENT_SEED: &str = "TRUSTGRID_EXPERIMENT_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    pub data_dir: PathBuf,
    pub experiment_seed: u64,
    /// Allowed overrun of the trial length, as a fraction of its ticks.
    pub frame_slack: f64,
    /// Allowed deviation of each frame interval from 1/tick_rate, seconds.
    pub time_jitter: f64,
    pub world: WorldConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("data"),
            experiment_seed: 0,
            frame_slack: 0.05,
            time_jitter: 0.005,
            world: WorldConfig::default(),
        }
    }
}

impl ServerConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ServerError> {
        let cfg: Self = toml::from_str(s).map_err(|e| ServerError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` if given, then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ServerError> {
        let mut cfg = match path {
            Some(p) => Self::from_toml_str(&std::fs::read_to_string(p)?)?,
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ServerError> {
        let bad = |k: &str, v: &str| ServerError::Config(format!("{k}={v} is not valid"));
        if let Some(v) = var(ENV_HOST) {
            self.host = v;
        }
        if let Some(v) = var(ENV_PORT) {
            self.port = v.parse().map_err(|_| bad(ENV_PORT, &v))?;
        }
        if let Some(v) = var(ENV_DATA_DIR) {
            self.data_dir = PathBuf::from(v);
        }
        if let Some(v) = var(ENV_EXPERIMENT_SEED) {
            self.experiment_seed = v.parse().map_err(|_| bad(ENV_EXPERIMENT_SEED, &v))?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ServerError> {
        self.world
            .validate()
            .map_err(|e| ServerError::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.frame_slack) {
            return Err(ServerError::Config(format!(
                "frame_slack {} outside [0, 1]",
                self.frame_slack
            )));
        }
        if !(self.time_jitter >= 0.0 && self.time_jitter < self.world.dt()) {
            return Err(ServerError::Config(format!(
                "time_jitter {} must be in [0, dt)",
                self.time_jitter
            )));
        }
        Ok(())
    }

    /// Longest accepted frame log, the initial frame included.
    pub fn max_frames(&self) -> usize {
        (self.world.trial_ticks() as f64 * (1.0 + self.frame_slack)).floor() as usize + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = ServerConfig::from_toml_str("port = 9000\n[world]\naccel = 500.0\n").unwrap();
        assert_eq!(cfg.port, 9000);
        assert_eq!(cfg.world.accel, 500.0);
        assert_eq!(cfg.world.damping, WorldConfig::default().damping);
        assert_eq!(cfg.experiment_seed, 0);
    }

    #[test]
    fn environment_overrides_file() {
        let mut cfg = ServerConfig::from_toml_str("port = 9000\nexperiment_seed = 4\n").unwrap();
        let env: HashMap<&str, &str> = [
            (ENV_PORT, "9100"),
            (ENV_DATA_DIR, "/tmp/x"),
            (ENV_EXPERIMENT_SEED, "77"),
        ]
        .into();
        cfg.apply_env(|k| env.get(k).map(|v| v.to_string()))
            .unwrap();
        assert_eq!((cfg.port, cfg.experiment_seed), (9100, 77));
        assert_eq!(cfg.data_dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn bad_override_rejected() {
        let mut cfg = ServerConfig::default();
        assert!(cfg
            .apply_env(|k| (k == ENV_PORT).then(|| "eighty".to_string()))
            .is_err());
    }

    #[test]
    fn frame_limit() {
        assert_eq!(ServerConfig::default().max_frames(), 631);
    }
}
