//! Experiment configuration: one flat TOML table, every key optional.
//!
//! ```toml
//! master_seed = 0
//! output_dir = "out"
//! jobs = 1
//! n_instances = 30
//! n_vertices = 6
//! edge_prob = 0.5
//! channel = "both"          # dephasing | depolarizing | both
//! eps_min = 0.0
//! eps_max = 0.1             # default 0.1 (qaoa, drift), 0.25 (thermal)
//! eps_points = 21           # default 21 (qaoa, drift), 26 (thermal)
//! eta = 0.1
//! variance_threshold = 1e-3
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vdsim_core::noise::NoiseKind;
use vdsim_core::qaoa::MAX_VERTICES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    QaoaSweep,
    ThermalSweep,
    Drift,
    VdCheck,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::QaoaSweep => "qaoa_sweep",
            Experiment::ThermalSweep => "thermal_sweep",
            Experiment::Drift => "drift",
            Experiment::VdCheck => "vd_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelChoice {
    Dephasing,
    Depolarizing,
    Both,
}

impl ChannelChoice {
    pub fn kinds(self) -> Vec<NoiseKind> {
        match self {
            ChannelChoice::Dephasing => vec![NoiseKind::Dephasing],
            ChannelChoice::Depolarizing => vec![NoiseKind::Depolarizing],
            ChannelChoice::Both => NoiseKind::BOTH.to_vec(),
        }
    }
}

/// Values as written in the file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub master_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub n_instances: Option<u64>,
    pub n_vertices: Option<usize>,
    pub edge_prob: Option<f64>,
    pub channel: Option<ChannelChoice>,
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
    pub eps_points: Option<usize>,
    pub eta: Option<f64>,
    pub variance_threshold: Option<f64>,
}

/// Fully resolved configuration; echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub jobs: usize,
    pub n_instances: u64,
    pub n_vertices: usize,
    pub edge_prob: f64,
    pub channel: ChannelChoice,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_points: usize,
    pub eta: f64,
    pub variance_threshold: f64,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn load(path: Option<&Path>) -> Result<ConfigFile, ConfigError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn resolve(experiment: Experiment, file: ConfigFile, over: &Overrides) -> Result<Self, ConfigError> {
        if let Some(e) = file.experiment {
            if e != experiment {
                return Err(ConfigError(format!(
                    "config is for experiment '{}' but '{}' was requested",
                    e.as_str(),
                    experiment.as_str()
                )));
            }
        }
        let thermal = experiment == Experiment::ThermalSweep;
        let cfg = Self {
            experiment,
            master_seed: over.seed.or(file.master_seed).unwrap_or(0),
            output_dir: over.out.clone().or(file.output_dir).unwrap_or_else(|| PathBuf::from("out")),
            jobs: over.jobs.or(file.jobs).unwrap_or(1),
            n_instances: file.n_instances.unwrap_or(30),
            n_vertices: file.n_vertices.unwrap_or(6),
            edge_prob: file.edge_prob.unwrap_or(0.5),
            channel: file.channel.unwrap_or(ChannelChoice::Both),
            eps_min: file.eps_min.unwrap_or(0.0),
            eps_max: file.eps_max.unwrap_or(if thermal { 0.25 } else { 0.1 }),
            eps_points: file.eps_points.unwrap_or(if thermal { 26 } else { 21 }),
            eta: file.eta.unwrap_or(0.1),
            variance_threshold: file.variance_threshold.unwrap_or(1e-3),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        if self.jobs == 0 {
            return fail("jobs must be at least 1".into());
        }
        if self.n_instances == 0 {
            return fail("n_instances must be at least 1".into());
        }
        if !(2..=MAX_VERTICES).contains(&self.n_vertices) {
            return fail(format!("n_vertices must lie in 2..={MAX_VERTICES}"));
        }
        if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) {
            return fail("edge_prob must lie in (0, 1]".into());
        }
        if self.eps_points < 2 {
            return fail("eps_points must be at least 2".into());
        }
        if !(self.eps_min >= 0.0 && self.eps_max > self.eps_min) {
            return fail("need 0 <= eps_min < eps_max".into());
        }
        if matches!(self.experiment, Experiment::QaoaSweep | Experiment::Drift) && self.eps_min != 0.0 {
            return fail("QAOA sweeps start from the noiseless optimum: eps_min must be 0".into());
        }
        for kind in self.channel.kinds() {
            if self.eps_max > kind.max_eps() {
                return fail(format!("eps_max {} exceeds the {kind} limit {}", self.eps_max, kind.max_eps()));
            }
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return fail("eta must be finite and non-negative".into());
        }
        if !(self.variance_threshold > 0.0 && self.variance_threshold.is_finite()) {
            return fail("variance_threshold must be positive".into());
        }
        Ok(())
    }

    /// Equally spaced, endpoints included.
    pub fn eps_grid(&self) -> Vec<f64> {
        let last = (self.eps_points - 1) as f64;
        (0..self.eps_points)
            .map(|k| self.eps_min + (self.eps_max - self.eps_min) * k as f64 / last)
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}
