//! JSON simulation configuration: geometry, physical parameters in units of
//! the hopping rate κ, the initial excitation, and the requested outputs.
//!
//! All frequencies and rates are dimensionless ratios over κ, so internally
//! the graph is always built with κ = 1 and times are κ·t.

use crate::dynamics::{ExcitationKind, SystemParams};
use crate::graph::{GraphError, NetworkGraph, NodeCoord};
use crate::walk::RwMode;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config field `{field}`: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

/// Network topology selector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Geometry {
    /// Grid with both directions periodic; requires n1, n2 ≥ 3.
    Torus,
    /// Grid glued along one direction with a flip; requires n1 ≥ 3, n2 ≥ 2.
    Moebius,
    /// Edge list or adjacency loaded from a file; n1/n2 are taken from it.
    Custom { path: PathBuf },
}

/// Complex parameter given as magnitude and phase (radians, default 0);
/// a bare number is shorthand for phase 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Polar {
        magnitude: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl Default for ComplexSpec {
    fn default() -> Self {
        ComplexSpec::Real(0.0)
    }
}

impl ComplexSpec {
    pub fn to_complex(self) -> Complex64 {
        match self {
            ComplexSpec::Real(x) => Complex64::from(x),
            ComplexSpec::Polar { magnitude, phase } => Complex64::from_polar(magnitude, phase),
        }
    }

    fn magnitude(self) -> f64 {
        match self {
            ComplexSpec::Real(x) => x.abs(),
            ComplexSpec::Polar { magnitude, .. } => magnitude.abs(),
        }
    }
}

/// Where the excitation starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialSpec {
    /// 1-based grid coordinates (i1, i2).
    pub node: (usize, usize),
    pub kind: ExcitationKind,
}

/// One requested artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OutputSpec {
    /// Per-step |α_k|², |β_k|², norm and vacuum weight.
    QuantumTimeline,
    /// Per-step classical node probabilities.
    RandomWalkTimeline,
    /// Per-step reports for all four witness partitions.
    EntanglementTimeline,
    /// |α|² and |β|² grids at one chosen step.
    Snapshot { step: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub geometry: Geometry,
    #[serde(default)]
    pub n1: usize,
    #[serde(default)]
    pub n2: usize,
    #[serde(default)]
    pub omega_c_over_kappa: f64,
    #[serde(default)]
    pub omega_a_over_kappa: f64,
    #[serde(default)]
    pub g_over_kappa: ComplexSpec,
    #[serde(default)]
    pub gamma_c_over_kappa: f64,
    #[serde(default)]
    pub gamma_a_over_kappa: f64,
    #[serde(default = "default_dt")]
    pub dt_kappa: f64,
    pub steps: usize,
    pub initial: InitialSpec,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
    #[serde(default)]
    pub rw_mode: RwMode,
    /// Rate of the continuous-time walk, in units of κ (ignored in discrete
    /// mode).
    #[serde(default = "default_rw_rate")]
    pub rw_rate_over_kappa: f64,
    /// Reserved for stochastic extensions; simulation output is fully
    /// deterministic and does not consume it.
    #[serde(default)]
    pub seed: u64,
}

fn default_dt() -> f64 {
    1.0
}

fn default_rw_rate() -> f64 {
    1.0
}

impl SimulationConfig {
    /// Parse a config from JSON text and validate it. Relative custom-graph
    /// paths are resolved against `base_dir` when given.
    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config: SimulationConfig = serde_json::from_str(text)?;
        if let (Geometry::Custom { path }, Some(dir)) = (&mut config.geometry, base_dir) {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Load and validate a config file; relative custom-graph paths resolve
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path.parent())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.steps < 1 {
            return Err(invalid("steps", "must be at least 1"));
        }
        if !self.dt_kappa.is_finite() || self.dt_kappa <= 0.0 {
            return Err(invalid(
                "dt_kappa",
                format!("must be a positive finite number, got {}", self.dt_kappa),
            ));
        }
        for (field, value) in [
            ("gamma_c_over_kappa", self.gamma_c_over_kappa),
            ("gamma_a_over_kappa", self.gamma_a_over_kappa),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(ConfigError::Invalid {
                    field,
                    message: format!("rate must be finite and non-negative, got {value}"),
                });
            }
        }
        for (field, value) in [
            ("omega_c_over_kappa", self.omega_c_over_kappa),
            ("omega_a_over_kappa", self.omega_a_over_kappa),
        ] {
            if !value.is_finite() {
                return Err(ConfigError::Invalid {
                    field,
                    message: format!("must be finite, got {value}"),
                });
            }
        }
        if !self.g_over_kappa.magnitude().is_finite() {
            return Err(invalid("g_over_kappa", "magnitude must be finite"));
        }
        for output in &self.outputs {
            if let OutputSpec::Snapshot { step } = output {
                if *step > self.steps {
                    return Err(invalid(
                        "outputs",
                        format!("snapshot step {step} exceeds steps {}", self.steps),
                    ));
                }
            }
        }
        if self.rw_mode == RwMode::Continuous
            && (!self.rw_rate_over_kappa.is_finite() || self.rw_rate_over_kappa <= 0.0)
        {
            return Err(invalid(
                "rw_rate_over_kappa",
                format!(
                    "continuous mode needs a positive rate, got {}",
                    self.rw_rate_over_kappa
                ),
            ));
        }
        if self.initial.node.0 == 0 || self.initial.node.1 == 0 {
            return Err(invalid("initial.node", "coordinates are 1-based"));
        }
        Ok(())
    }

    /// Build the graph with κ = 1 (everything is expressed in units of κ).
    pub fn build_graph(&self) -> Result<NetworkGraph, GraphError> {
        match &self.geometry {
            Geometry::Torus => NetworkGraph::torus(self.n1, self.n2, 1.0),
            Geometry::Moebius => NetworkGraph::moebius(self.n1, self.n2, 1.0),
            Geometry::Custom { path } => NetworkGraph::load_custom(path, 1.0),
        }
    }

    pub fn system_params(&self) -> Result<SystemParams, crate::dynamics::DynamicsError> {
        SystemParams::new(
            self.omega_c_over_kappa,
            self.omega_a_over_kappa,
            self.g_over_kappa.to_complex(),
            self.gamma_c_over_kappa,
            self.gamma_a_over_kappa,
        )
    }

    pub fn initial_node(&self) -> NodeCoord {
        NodeCoord::new(self.initial.node.0, self.initial.node.1)
    }
}

/// Names of the configurations shipped with the crate, reproducing the three
/// studied scenarios on 5×5 grids: classical walks, lossless quantum walks,
/// and weakly lossy quantum walks, each on the torus and the Möbius strip.
pub const BUNDLED_NAMES: [&str; 6] = [
    "fig2_torus",
    "fig2_moebius",
    "fig3_torus",
    "fig3_moebius",
    "fig4_lossy_torus",
    "fig4_lossy_moebius",
];

/// Fetch a bundled config by name (with or without the `.json` suffix).
pub fn bundled(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    match stem {
        "fig2_torus" => Some(include_str!("../configs/fig2_torus.json")),
        "fig2_moebius" => Some(include_str!("../configs/fig2_moebius.json")),
        "fig3_torus" => Some(include_str!("../configs/fig3_torus.json")),
        "fig3_moebius" => Some(include_str!("../configs/fig3_moebius.json")),
        "fig4_lossy_torus" => Some(include_str!("../configs/fig4_lossy_torus.json")),
        "fig4_lossy_moebius" => Some(include_str!("../configs/fig4_lossy_moebius.json")),
        _ => None,
    }
}

/// Parse and validate a bundled config.
pub fn load_bundled(name: &str) -> Result<SimulationConfig, ConfigError> {
    let text = bundled(name).ok_or_else(|| {
        invalid(
            "geometry",
            format!(
                "unknown bundled config `{name}`; available: {}",
                BUNDLED_NAMES.join(", ")
            ),
        )
    })?;
    SimulationConfig::from_json(text, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> String {
        r#"{
            "geometry": { "type": "torus" },
            "n1": 5,
            "n2": 5,
            "omega_c_over_kappa": 0.9,
            "omega_a_over_kappa": 1.0,
            "g_over_kappa": { "magnitude": 2.5, "phase": 0.5 },
            "steps": 10,
            "initial": { "node": [3, 3], "kind": "cavity" },
            "outputs": [ { "type": "quantum_timeline" }, { "type": "snapshot", "step": 4 } ]
        }"#
        .to_string()
    }

    #[test]
    fn parses_a_full_config() {
        let config = SimulationConfig::from_json(&minimal_json(), None).unwrap();
        assert_eq!(config.geometry, Geometry::Torus);
        assert_eq!(config.dt_kappa, 1.0);
        assert_eq!(config.rw_mode, RwMode::Discrete);
        assert_eq!(config.initial.kind, ExcitationKind::Cavity);
        let g = config.g_over_kappa.to_complex();
        assert!((g - Complex64::from_polar(2.5, 0.5)).norm() < 1e-15);
        assert_eq!(config.outputs.len(), 2);
        assert_eq!(config.seed, 0);
    }

    #[test]
    fn bare_number_is_a_real_coupling() {
        let text = minimal_json().replace(r#"{ "magnitude": 2.5, "phase": 0.5 }"#, "3.0");
        let config = SimulationConfig::from_json(&text, None).unwrap();
        assert_eq!(config.g_over_kappa.to_complex(), Complex64::from(3.0));
    }

    #[test]
    fn rejects_zero_steps() {
        let text = minimal_json().replace(r#""steps": 10"#, r#""steps": 0"#);
        let err = SimulationConfig::from_json(&text, None).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { field: "steps", .. }));
    }

    #[test]
    fn rejects_negative_rates_and_bad_dt() {
        let with_rate = minimal_json().replace(
            r#""omega_c_over_kappa": 0.9,"#,
            r#""omega_c_over_kappa": 0.9, "gamma_c_over_kappa": -0.1,"#,
        );
        assert!(matches!(
            SimulationConfig::from_json(&with_rate, None),
            Err(ConfigError::Invalid {
                field: "gamma_c_over_kappa",
                ..
            })
        ));

        let with_dt = minimal_json().replace(r#""steps": 10"#, r#""steps": 10, "dt_kappa": 0.0"#);
        assert!(matches!(
            SimulationConfig::from_json(&with_dt, None),
            Err(ConfigError::Invalid {
                field: "dt_kappa",
                ..
            })
        ));
    }

    #[test]
    fn rejects_snapshot_beyond_steps() {
        let text = minimal_json().replace(r#""step": 4"#, r#""step": 11"#);
        assert!(matches!(
            SimulationConfig::from_json(&text, None),
            Err(ConfigError::Invalid {
                field: "outputs",
                ..
            })
        ));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_json() {
        let text = minimal_json().replace(r#""n1": 5,"#, r#""n1": 5, "typo_field": 1,"#);
        assert!(matches!(
            SimulationConfig::from_json(&text, None),
            Err(ConfigError::Json(_))
        ));
        assert!(matches!(
            SimulationConfig::from_json("not json", None),
            Err(ConfigError::Json(_))
        ));
    }

    #[test]
    fn custom_geometry_resolves_relative_paths() {
        let text = minimal_json().replace(
            r#"{ "type": "torus" }"#,
            r#"{ "type": "custom", "path": "rel/graph.txt" }"#,
        );
        let config = SimulationConfig::from_json(&text, Some(Path::new("/base/dir"))).unwrap();
        match &config.geometry {
            Geometry::Custom { path } => {
                assert_eq!(path, Path::new("/base/dir/rel/graph.txt"));
            }
            other => panic!("expected custom geometry, got {other:?}"),
        }
    }

    #[test]
    fn all_bundled_configs_parse_and_validate() {
        for name in BUNDLED_NAMES {
            let config = load_bundled(name).unwrap();
            config.validate().unwrap();
            let graph = config.build_graph().unwrap();
            assert_eq!(graph.node_count(), 25, "{name} should be a 5x5 grid");
            assert!(config.system_params().is_ok());
        }
        assert!(load_bundled("fig3_torus.json").is_ok());
        assert!(load_bundled("nope").is_err());
    }

    #[test]
    fn continuous_mode_requires_positive_rate() {
        let text = minimal_json().replace(
            r#""steps": 10"#,
            r#""steps": 10, "rw_mode": "continuous", "rw_rate_over_kappa": 0.0"#,
        );
        assert!(matches!(
            SimulationConfig::from_json(&text, None),
            Err(ConfigError::Invalid {
                field: "rw_rate_over_kappa",
                ..
            })
        ));
    }

    #[test]
    fn config_round_trips_through_serde() {
        let config = SimulationConfig::from_json(&minimal_json(), None).unwrap();
        let text = serde_json::to_string(&config).unwrap();
        let back = SimulationConfig::from_json(&text, None).unwrap();
        assert_eq!(config, back);
    }
}
