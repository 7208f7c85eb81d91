//! Run configuration: schema check, typed parse, flag overrides, hashing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use sha2::{Digest, Sha256};
use skyforge_core::measures::{LookupTable, SubprocessConfig};
use skyforge_core::{Algorithm, MeasureSet, MeasureSpec, SearchConfig};

use crate::CliError;

pub const SCHEMA: &str = include_str!("../schema/run-config.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub path: PathBuf,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoinKey {
    pub left: String,
    pub right: String,
    pub on: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EstimatorConfig {
    Lookup {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<LookupTable>,
    },
    Ridge {
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    Subprocess {
        command: Vec<String>,
        measures: Vec<String>,
        #[serde(default = "default_timeout")]
        timeout_secs: f64,
        #[serde(default)]
        min_feature_columns: usize,
    },
}

fn default_lambda() -> f64 {
    1e-8
}

fn default_timeout() -> f64 {
    skyforge_core::measures::DEFAULT_TIMEOUT_SECS
}

fn default_clusters() -> usize {
    skyforge_core::tabular::DEFAULT_MAX_CLUSTERS
}

fn default_true() -> bool {
    true
}

fn default_output() -> PathBuf {
    PathBuf::from("skyforge-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sources: Vec<Source>,
    #[serde(default)]
    pub join_keys: Vec<JoinKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default = "default_clusters")]
    pub max_clusters: usize,
    #[serde(default = "default_true")]
    pub compress: bool,
    pub measures: Vec<MeasureSpec>,
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_tests: Option<PathBuf>,
    /// Directory of the config file; subprocess estimators run there.
    #[serde(skip)]
    pub base: PathBuf,
}

/// Command-line overrides; `None` keeps the file's value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub algorithm: Option<Algorithm>,
    pub epsilon: Option<f64>,
    pub max_length: Option<usize>,
    pub budget: Option<usize>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

fn schema_errors(doc: &Json) -> Vec<String> {
    let schema: Json = serde_json::from_str(SCHEMA).expect("bundled schema parses");
    let validator = jsonschema::validator_for(&schema).expect("bundled schema compiles");
    validator
        .iter_errors(doc)
        .map(|e| {
            let at = e.instance_path().to_string();
            format!("{}: {e}", if at.is_empty() { "/" } else { &at })
        })
        .collect()
}

impl RunConfig {
    /// Reads, schema-checks and parses a config file. Relative paths inside
    /// it are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let doc: Json = serde_json::from_str(text).map_err(|e| CliError::Config(vec![format!("invalid JSON: {e}")]))?;
        let errors = schema_errors(&doc);
        if !errors.is_empty() {
            return Err(CliError::Config(errors));
        }
        let mut cfg: RunConfig = serde_json::from_value(doc).map_err(|e| CliError::Config(vec![e.to_string()]))?;
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        self.base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base.to_path_buf() };
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for s in &mut self.sources {
            fix(&mut s.path);
        }
        fix(&mut self.output);
        if let Some(p) = &mut self.prior_tests {
            fix(p);
        }
        if let EstimatorConfig::Lookup { path: Some(p), .. } = &mut self.estimator {
            fix(p);
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        let s = &mut self.search;
        if let Some(v) = o.algorithm {
            s.algorithm = v;
        }
        if let Some(v) = o.epsilon {
            s.epsilon = v;
        }
        if let Some(v) = o.max_length {
            s.max_length = v;
        }
        if let Some(v) = o.budget {
            s.budget = v;
        }
        if let Some(v) = o.k {
            s.k = v;
        }
        if let Some(v) = o.alpha {
            s.alpha = v;
        }
        if let Some(v) = o.theta {
            s.theta = v;
        }
        if let Some(v) = o.workers {
            s.workers = v;
        }
        if let Some(v) = &o.output {
            self.output = v.clone();
        }
    }

    /// Checks that the schema cannot express. Call after overrides.
    pub fn validate(&mut self) -> Result<MeasureSet, CliError> {
        let mut errors = Vec::new();
        if self.search.target.is_none() {
            self.search.target = self.target.clone();
        }
        if self.target.is_some() && self.search.target.is_some() && self.target != self.search.target {
            errors.push("`target` and `search.target` disagree".to_string());
        }
        if let Err(e) = self.search.validate() {
            errors.push(e.to_string());
        }
        let measures = match MeasureSet::new(self.measures.clone(), self.search.decisive.as_deref()) {
            Ok(m) => Some(m),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        };
        let mut names: Vec<&str> = self.sources.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            errors.push("source names must be unique".into());
        }
        for k in &self.join_keys {
            for side in [&k.left, &k.right] {
                if !names.contains(&side.as_str()) {
                    errors.push(format!("join key names unknown source `{side}`"));
                }
            }
        }
        match &self.estimator {
            EstimatorConfig::Lookup { path, table } => {
                if path.is_some() == table.is_some() {
                    errors.push("lookup estimator needs exactly one of `path` and `table`".into());
                }
            }
            EstimatorConfig::Ridge { .. } => {
                if self.search.target.is_none() {
                    errors.push("ridge estimator needs a `target`".into());
                }
            }
            EstimatorConfig::Subprocess { .. } => {}
        }
        match (errors.is_empty(), measures) {
            (true, Some(m)) => Ok(m),
            _ => Err(CliError::Config(errors)),
        }
    }

    /// Subprocess settings, when that estimator is selected.
    pub fn subprocess(&self) -> Option<SubprocessConfig> {
        match &self.estimator {
            EstimatorConfig::Subprocess {
                command,
                measures,
                timeout_secs,
                min_feature_columns,
            } => Some(SubprocessConfig {
                command: command.clone(),
                measures: measures.clone(),
                timeout_secs: *timeout_secs,
                min_feature_columns: *min_feature_columns,
                working_dir: Some(self.base.clone()),
            }),
            _ => None,
        }
    }

    /// SHA-256 over the fields that affect results. The output directory
    /// and worker count are left out. Input file contents are not hashed.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        c.search.workers = 1;
        // Paths count relative to the config file, so moving a checkout
        // keeps the hash.
        let rel = |p: &mut PathBuf| {
            if let Ok(r) = p.strip_prefix(&self.base) {
                *p = r.to_path_buf();
            }
        };
        for s in &mut c.sources {
            rel(&mut s.path);
        }
        if let Some(p) = &mut c.prior_tests {
            rel(p);
        }
        if let EstimatorConfig::Lookup { path: Some(p), .. } = &mut c.estimator {
            rel(p);
        }
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
