use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Knn,
    Mnn,
    Snn,
    Epsilon,
    Gabriel,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Knn, Method::Mnn, Method::Snn, Method::Epsilon, Method::Gabriel];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Knn => "knn",
            Method::Mnn => "mnn",
            Method::Snn => "snn",
            Method::Epsilon => "epsilon",
            Method::Gabriel => "gabriel",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ConfigError::Unknown { what: "method", value: s.to_string() })
    }
}

/// Only Euclidean distance is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetrize {
    /// Directed edges `i → j` for each `j` among `i`'s neighbours.
    None,
    /// Undirected `{i, j}` when either direction exists.
    #[default]
    Union,
}

impl FromStr for Symmetrize {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Symmetrize::None),
            "union" => Ok(Symmetrize::Union),
            _ => Err(ConfigError::Unknown { what: "symmetrize", value: s.to_string() }),
        }
    }
}

/// Which pairs the Gabriel builder tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GabrielMode {
    /// Every pair.
    #[default]
    Exact,
    /// Only pairs where one endpoint is among the other's `K` nearest
    /// neighbours. Every tested pair is still checked against all points, so
    /// the result is a subset of the exact graph.
    Candidate(usize),
}

pub const DEFAULT_GABRIEL_CANDIDATES: usize = 20;

impl FromStr for GabrielMode {
    type Err = ConfigError;

    /// Accepts `exact`, `candidate` (K = 20) or `candidate:K`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::Unknown { what: "gabriel mode", value: s.to_string() };
        match s.split_once(':') {
            None if s == "exact" => Ok(GabrielMode::Exact),
            None if s == "candidate" => Ok(GabrielMode::Candidate(DEFAULT_GABRIEL_CANDIDATES)),
            Some(("candidate", k)) => match k.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(GabrielMode::Candidate(k)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GabrielMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GabrielMode::Exact => f.write_str("exact"),
            GabrielMode::Candidate(k) => write!(f, "candidate:{k}"),
        }
    }
}

/// Whether a third point lying exactly on the diametral sphere blocks a
/// Gabriel edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GabrielBoundary {
    /// `‖C − mid‖² ≥ r²` keeps the edge; boundary points do not block.
    #[default]
    Open,
    /// Boundary points block (closed disc).
    Closed,
}

impl FromStr for GabrielBoundary {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(GabrielBoundary::Open),
            "closed" => Ok(GabrielBoundary::Closed),
            _ => Err(ConfigError::Unknown { what: "gabriel boundary", value: s.to_string() }),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown {what} '{value}'")]
    Unknown { what: &'static str, value: String },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("theta must be at least 1")]
    ZeroTheta,
    #[error("theta ({theta}) cannot exceed k ({k})")]
    ThetaAboveK { theta: usize, k: usize },
    #[error("epsilon must be a positive finite number, got {0}")]
    BadEpsilon(f64),
    #[error("gabriel candidate count must be at least 1")]
    ZeroCandidates,
}

/// Method tag plus every method parameter. Parameters the selected method
/// does not use are ignored but still recorded in graph provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr", into = "ConfigRepr")]
pub struct ConstructionConfig {
    pub method: Method,
    pub k: usize,
    pub theta: usize,
    pub epsilon: f64,
    pub metric: Metric,
    pub symmetrize: Symmetrize,
    pub gabriel_mode: GabrielMode,
    pub gabriel_boundary: GabrielBoundary,
    pub snn_weighted: bool,
}

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_THETA: usize = 2;
pub const DEFAULT_EPSILON: f64 = 0.5;

impl ConstructionConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            k: DEFAULT_K,
            theta: DEFAULT_THETA,
            epsilon: DEFAULT_EPSILON,
            metric: Metric::Euclidean,
            symmetrize: Symmetrize::Union,
            gabriel_mode: GabrielMode::Exact,
            gabriel_boundary: GabrielBoundary::Open,
            snn_weighted: false,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_theta(mut self, theta: usize) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_symmetrize(mut self, symmetrize: Symmetrize) -> Self {
        self.symmetrize = symmetrize;
        self
    }

    pub fn with_gabriel_mode(mut self, mode: GabrielMode) -> Self {
        self.gabriel_mode = mode;
        self
    }

    pub fn with_gabriel_boundary(mut self, boundary: GabrielBoundary) -> Self {
        self.gabriel_boundary = boundary;
        self
    }

    pub fn with_snn_weighted(mut self, weighted: bool) -> Self {
        self.snn_weighted = weighted;
        self
    }

    /// Checks the parameters the selected method needs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.method {
            Method::Knn | Method::Mnn if self.k == 0 => Err(ConfigError::ZeroK),
            Method::Snn => {
                if self.k == 0 {
                    Err(ConfigError::ZeroK)
                } else if self.theta == 0 {
                    Err(ConfigError::ZeroTheta)
                } else if self.theta > self.k {
                    Err(ConfigError::ThetaAboveK { theta: self.theta, k: self.k })
                } else {
                    Ok(())
                }
            }
            Method::Epsilon if !(self.epsilon > 0.0 && self.epsilon.is_finite()) => {
                Err(ConfigError::BadEpsilon(self.epsilon))
            }
            Method::Gabriel if self.gabriel_mode == GabrielMode::Candidate(0) => Err(ConfigError::ZeroCandidates),
            _ => Ok(()),
        }
    }
}

/// Flat wire form used in `meta.json` and config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRepr {
    method: Method,
    #[serde(default = "default_k")]
    k: usize,
    #[serde(default = "default_theta")]
    theta: usize,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default)]
    metric: Metric,
    #[serde(default)]
    symmetrize: Symmetrize,
    #[serde(default = "default_mode")]
    gabriel_mode: String,
    #[serde(default = "default_candidates")]
    gabriel_candidates: usize,
    #[serde(default)]
    gabriel_boundary: GabrielBoundary,
    #[serde(default)]
    snn_weighted: bool,
}

fn default_k() -> usize {
    DEFAULT_K
}
fn default_theta() -> usize {
    DEFAULT_THETA
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_mode() -> String {
    "exact".to_string()
}
fn default_candidates() -> usize {
    DEFAULT_GABRIEL_CANDIDATES
}

impl From<ConstructionConfig> for ConfigRepr {
    fn from(c: ConstructionConfig) -> Self {
        let (mode, candidates) = match c.gabriel_mode {
            GabrielMode::Exact => ("exact", DEFAULT_GABRIEL_CANDIDATES),
            GabrielMode::Candidate(k) => ("candidate", k),
        };
        ConfigRepr {
            method: c.method,
            k: c.k,
            theta: c.theta,
            epsilon: c.epsilon,
            metric: c.metric,
            symmetrize: c.symmetrize,
            gabriel_mode: mode.to_string(),
            gabriel_candidates: candidates,
            gabriel_boundary: c.gabriel_boundary,
            snn_weighted: c.snn_weighted,
        }
    }
}

impl TryFrom<ConfigRepr> for ConstructionConfig {
    type Error = ConfigError;

    fn try_from(r: ConfigRepr) -> Result<Self, Self::Error> {
        let gabriel_mode = match r.gabriel_mode.as_str() {
            "exact" => GabrielMode::Exact,
            "candidate" => GabrielMode::Candidate(r.gabriel_candidates),
            other => return Err(ConfigError::Unknown { what: "gabriel mode", value: other.to_string() }),
        };
        Ok(ConstructionConfig {
            method: r.method,
            k: r.k,
            theta: r.theta,
            epsilon: r.epsilon,
            metric: r.metric,
            symmetrize: r.symmetrize,
            gabriel_mode,
            gabriel_boundary: r.gabriel_boundary,
            snn_weighted: r.snn_weighted,
        })
    }
}
