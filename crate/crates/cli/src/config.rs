//! Experiment configuration: one TOML document per experiment.
//!
//! Relative paths inside the document resolve against the document's own
//! directory. The output directory can be overridden by a flag or by the
//! `ROBUSTOPT_OUTPUT_DIR` environment variable (flag wins).

use std::path::{Path, PathBuf};

use robustopt_core::learning::{CorruptionSet, Method, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const OUTPUT_DIR_ENV: &str = "ROBUSTOPT_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Influence,
    Learning,
    SyntheticRegret,
    Coverage,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Influence => "influence",
            ExperimentKind::Learning => "learning",
            ExperimentKind::SyntheticRegret => "synthetic-regret",
            ExperimentKind::Coverage => "coverage",
        }
    }
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfluenceParams {
    /// Complete directed graph on this many nodes. Exclusive with `edge_list`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complete_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_list: Option<PathBuf>,
    /// Number of sampled subgraphs `m`.
    pub objectives: usize,
    pub edge_probability: f64,
    /// Seed set size `k`.
    pub budget: usize,
    pub rounds: usize,
    /// Step size; `√(ln m / 2T)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Hybrid,
    Composite,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Hybrid => Method::Hybrid,
            MethodName::Composite => Method::Composite,
        }
    }
}

fn default_gammas() -> Vec<f64> {
    vec![0.5]
}

fn default_methods() -> Vec<MethodName> {
    vec![MethodName::Hybrid, MethodName::Composite]
}

fn default_lr() -> f64 {
    TrainConfig::default().learning_rate
}

fn default_steps() -> usize {
    TrainConfig::default().steps
}

fn default_batch() -> usize {
    TrainConfig::default().batch_size
}

fn default_hidden() -> usize {
    TrainConfig::default().hidden
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningParams {
    pub images: PathBuf,
    pub labels: PathBuf,
    /// Consecutive slices of the loaded file, in this order.
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub corruption_set: String,
    pub rounds: usize,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodName>,
    /// Also train the Uniform, Even Split and Individual baselines.
    #[serde(default = "yes")]
    pub baselines: bool,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
}

impl LearningParams {
    /// Training settings with the per-round seed left at zero.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            steps: self.steps,
            batch_size: self.batch_size,
            hidden: self.hidden,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticRegretParams {
    pub objectives: usize,
    pub solutions: usize,
    pub rounds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

fn default_cover_probability() -> f64 {
    0.3
}

fn default_roundings() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageParams {
    pub objectives: usize,
    pub items: usize,
    pub elements: usize,
    pub budget: usize,
    pub rounds: usize,
    pub ascent_steps: usize,
    #[serde(default = "default_cover_probability")]
    pub cover_probability: f64,
    /// Independent roundings averaged per run.
    #[serde(default = "default_roundings")]
    pub roundings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default = "one")]
    pub runs: usize,
    /// Not part of the echo or the hash, so relocating output keeps results identical.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub influence: Option<InfluenceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning: Option<LearningParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_regret: Option<SyntheticRegretParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageParams>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: usize) -> CliResult<()> {
    if v == 0 {
        return Err(bad(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn probability(name: &str, v: f64) -> CliResult<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(bad(format!("{name} = {v} must lie in [0, 1]")));
    }
    Ok(())
}

fn step_size(v: Option<f64>) -> CliResult<()> {
    match v {
        Some(eta) if !(eta.is_finite() && eta > 0.0) => Err(bad(format!("eta = {eta} must be finite and > 0"))),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> CliResult<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    /// Flag overrides, then the environment variable for the output directory.
    pub fn apply(&mut self, overrides: &Overrides, env_output: Option<PathBuf>) {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(runs) = overrides.runs {
            self.runs = runs;
        }
        if let Some(dir) = overrides.output_dir.clone().or(env_output) {
            // Overrides come from the shell, so they stay relative to the working directory.
            self.output_dir = Some(std::path::absolute(&dir).unwrap_or(dir));
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> CliResult<PathBuf> {
        self.output_dir
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| bad(format!("no output directory: set output_dir, --output-dir or {OUTPUT_DIR_ENV}")))
    }

    /// Checks every parameter and that referenced files exist.
    pub fn validate(&self) -> CliResult<()> {
        positive("runs", self.runs)?;
        if self.seed > i64::MAX as u64 {
            return Err(bad("seed must fit in a signed 64-bit TOML integer"));
        }
        let sections = [
            (ExperimentKind::Influence, self.influence.is_some()),
            (ExperimentKind::Learning, self.learning.is_some()),
            (ExperimentKind::SyntheticRegret, self.synthetic_regret.is_some()),
            (ExperimentKind::Coverage, self.coverage.is_some()),
        ];
        for (kind, present) in sections {
            let table = kind.name().replace('-', "_");
            if kind == self.kind && !present {
                return Err(bad(format!("kind = \"{}\" needs a [{table}] table", kind.name())));
            }
            if kind != self.kind && present {
                return Err(bad(format!("[{table}] table does not belong to kind = \"{}\"", self.kind.name())));
            }
        }
        match self.kind {
            ExperimentKind::Influence => self.validate_influence(self.influence.as_ref().expect("checked")),
            ExperimentKind::Learning => self.validate_learning(self.learning.as_ref().expect("checked")),
            ExperimentKind::SyntheticRegret => {
                let p = self.synthetic_regret.as_ref().expect("checked");
                positive("objectives", p.objectives)?;
                positive("solutions", p.solutions)?;
                positive("rounds", p.rounds)?;
                step_size(p.eta)
            }
            ExperimentKind::Coverage => {
                let p = self.coverage.as_ref().expect("checked");
                positive("objectives", p.objectives)?;
                positive("items", p.items)?;
                positive("elements", p.elements)?;
                positive("rounds", p.rounds)?;
                positive("ascent_steps", p.ascent_steps)?;
                positive("roundings", p.roundings)?;
                probability("cover_probability", p.cover_probability)?;
                if p.budget > p.items {
                    return Err(bad(format!("budget {} exceeds {} items", p.budget, p.items)));
                }
                Ok(())
            }
        }
    }

    fn existing(&self, p: &Path) -> CliResult<()> {
        let full = self.resolve(p);
        if !full.is_file() {
            return Err(bad(format!("file not found: {}", full.display())));
        }
        Ok(())
    }

    fn validate_influence(&self, p: &InfluenceParams) -> CliResult<()> {
        match (p.complete_nodes, &p.edge_list) {
            (Some(n), None) => {
                positive("complete_nodes", n)?;
                if p.budget > n {
                    return Err(bad(format!("budget {} exceeds {n} nodes", p.budget)));
                }
            }
            (None, Some(path)) => self.existing(path)?,
            _ => return Err(bad("set exactly one of complete_nodes and edge_list")),
        }
        positive("objectives", p.objectives)?;
        positive("rounds", p.rounds)?;
        probability("edge_probability", p.edge_probability)?;
        step_size(p.eta)
    }

    fn validate_learning(&self, p: &LearningParams) -> CliResult<()> {
        self.existing(&p.images)?;
        self.existing(&p.labels)?;
        positive("train", p.train)?;
        positive("validation", p.validation)?;
        positive("test", p.test)?;
        positive("rounds", p.rounds)?;
        CorruptionSet::by_name(&p.corruption_set).map_err(|e| bad(e.to_string()))?;
        if p.gammas.is_empty() || p.methods.is_empty() {
            return Err(bad("gammas and methods must be nonempty"));
        }
        if let Some(g) = p.gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(bad(format!("gamma = {g} must be finite and >= 0")));
        }
        p.train_config().validate().map_err(|e| bad(e.to_string()))
    }

    /// Canonical TOML echo of everything that affects results.
    pub fn echo(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| bad(e.to_string()))
    }

    /// Hex SHA-256 of [`Self::echo`].
    pub fn hash(&self) -> CliResult<String> {
        Ok(hash_text(&self.echo()?))
    }
}

pub fn hash_text(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
