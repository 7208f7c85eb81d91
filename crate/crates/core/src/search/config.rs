use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Breadth-first reduction from the universal table.
    Apx,
    /// Bidirectional search with correlation-based pruning.
    Bi,
    /// Bidirectional search without pruning.
    Nobi,
    /// Bidirectional search with per-level diversification.
    Div,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Apx => "apx",
            Algorithm::Bi => "bi",
            Algorithm::Nobi => "nobi",
            Algorithm::Div => "div",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "apx" => Ok(Algorithm::Apx),
            "bi" => Ok(Algorithm::Bi),
            "nobi" => Ok(Algorithm::Nobi),
            "div" => Ok(Algorithm::Div),
            _ => Err(Error::Config(format!("unknown algorithm `{s}`"))),
        }
    }
}

fn d_epsilon() -> f64 {
    0.1
}
fn d_budget() -> usize {
    500
}
fn d_max_length() -> usize {
    usize::MAX
}
fn d_k() -> usize {
    5
}
fn d_alpha() -> f64 {
    0.5
}
fn d_theta() -> f64 {
    0.8
}
fn d_workers() -> usize {
    1
}
fn d_algorithm() -> Algorithm {
    Algorithm::Apx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "d_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    /// Maximum number of estimator calls.
    #[serde(default = "d_budget")]
    pub budget: usize,
    /// Maximum path length from a start state.
    #[serde(default = "d_max_length")]
    pub max_length: usize,
    #[serde(default = "d_k")]
    pub k: usize,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_theta")]
    pub theta: f64,
    /// Overrides which measure is decisive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decisive: Option<String>,
    /// Attribute every backward start state keeps whole.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default = "d_workers")]
    pub workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            algorithm: d_algorithm(),
            epsilon: d_epsilon(),
            budget: d_budget(),
            max_length: d_max_length(),
            k: d_k(),
            alpha: d_alpha(),
            theta: d_theta(),
            decisive: None,
            target: None,
            workers: d_workers(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        if self.algorithm == Algorithm::Div && self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta must lie in [0, 1], got {}", self.theta));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.algorithm != Algorithm::Apx && self.target.is_none() {
            return bad(format!("algorithm `{}` needs a target attribute", self.algorithm.as_str()));
        }
        Ok(())
    }
}
