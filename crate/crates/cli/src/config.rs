//! Experiment configuration: a TOML file with flag overrides.
//!
//! Grammar (all sections optional unless noted):
//!
//! ```toml
//! [dataset]                      # exactly one of `path` / `synthetic`
//! path = "data/iwpc.csv"
//! # [dataset.synthetic]
//! # n = 2000
//! # seed = 7
//! # noise_sd = 0.0
//! # theta_dose = [20.0, 50.0, 0.0, ...]   # 26 entries
//!
//! [dataset.schema]               # column-name map, PharmGKB defaults
//! dose = "Therapeutic Dose of Warfarin"
//!
//! [experiment]
//! n_runs = 20                    # ≥ 2
//! seed = 42
//! output_dir = "out"
//! stride = 1                     # thin curve CSV rows for plotting
//! episodes = false               # also dump one CSV per episode
//!
//! [reward]
//! kind = "standard"              # standard | reshaped | custom
//! r = 1.5                        # reshaped scale, > 0
//! # [reward.table]               # custom: nine labeled cells, true_chosen
//! # low_low = 0.0 ...
//!
//! [[policy]]                     # one block per configured policy
//! kind = "linucb"                # fixed | clinical | linucb | regression
//! alpha = 1.0                    # linucb
//! update = "incremental"         # linucb: incremental | fresh
//! lambda = 1.0                   # regression ridge
//! warmup = 1                     # regression warmup count
//! predict_sqrt_dose = false      # regression target transform
//! coefficients_path = "..."      # clinical: TOML file with the weights
//! # [policy.coefficients]        # clinical: inline weights
//!
//! [manifest]                     # feature-layout override (must total 26)
//! block = [ { name = "age", kind = "numeric", width = 1 }, ... ]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use dosebandit::dataset::{Block, EncodingManifest, SyntheticSpec, TableSchema};
use dosebandit::policies::{ClinicalCoefficients, LinUcbUpdateMode, PolicySpec};
use dosebandit::RewardTable;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(message.into()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: Option<RawDataset>,
    experiment: Option<RawExperiment>,
    reward: Option<RawReward>,
    #[serde(default)]
    policy: Vec<RawPolicy>,
    manifest: Option<RawManifest>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    path: Option<PathBuf>,
    synthetic: Option<RawSynthetic>,
    schema: Option<TableSchema>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynthetic {
    n: usize,
    seed: u64,
    #[serde(default)]
    noise_sd: f64,
    theta_dose: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    n_runs: Option<usize>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    stride: Option<usize>,
    episodes: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReward {
    kind: Option<String>,
    r: Option<f64>,
    table: Option<RawCustomTable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCustomTable {
    low_low: f64,
    low_medium: f64,
    low_high: f64,
    medium_low: f64,
    medium_medium: f64,
    medium_high: f64,
    high_low: f64,
    high_medium: f64,
    high_high: f64,
}

impl RawCustomTable {
    fn entries(&self) -> [[f64; 3]; 3] {
        [
            [self.low_low, self.low_medium, self.low_high],
            [self.medium_low, self.medium_medium, self.medium_high],
            [self.high_low, self.high_medium, self.high_high],
        ]
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    kind: String,
    alpha: Option<f64>,
    update: Option<String>,
    lambda: Option<f64>,
    warmup: Option<u64>,
    predict_sqrt_dose: Option<bool>,
    coefficients_path: Option<PathBuf>,
    coefficients: Option<ClinicalCoefficients>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    block: Vec<Block>,
}

/// Flag-level overrides applied on top of the config file; every config
/// key is reachable from the command line for scripting.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub n_runs: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub stride: Option<usize>,
    pub episodes: Option<bool>,
    pub reward: Option<String>,
    pub reward_scale: Option<f64>,
    pub policies: Option<String>,
    pub alpha: Option<f64>,
    pub linucb_update: Option<String>,
    pub lambda: Option<f64>,
    pub warmup: Option<u64>,
    pub predict_sqrt_dose: Option<bool>,
    pub coefficients: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum DatasetSource {
    Table(PathBuf),
    Synthetic(SyntheticSpec),
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub schema: TableSchema,
    pub n_runs: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub stride: usize,
    pub episodes: bool,
    pub reward: RewardTable,
    pub policies: Vec<PolicySpec>,
    pub manifest: EncodingManifest,
}

pub fn load_schema(path: &Path) -> Result<TableSchema, ConfigError> {
    let raw = read_raw(path)?;
    Ok(raw
        .dataset
        .and_then(|d| d.schema)
        .unwrap_or_default())
}

fn read_raw(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("invalid config: {e}")))
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let raw = read_raw(path)?;
    resolve(raw, overrides)
}

fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let dataset_section = raw.dataset.unwrap_or_default();
    let schema = dataset_section.schema.clone().unwrap_or_default();
    let dataset = match (&overrides.dataset, dataset_section.path, dataset_section.synthetic) {
        (Some(path), _, _) => DatasetSource::Table(path.clone()),
        (None, Some(path), None) => DatasetSource::Table(path),
        (None, None, Some(synth)) => DatasetSource::Synthetic(SyntheticSpec {
            n: synth.n,
            seed: synth.seed,
            noise_sd: synth.noise_sd,
            theta_dose: synth.theta_dose.unwrap_or_else(SyntheticSpec::default_theta),
        }),
        (None, Some(_), Some(_)) => {
            return err("[dataset] must set either `path` or `synthetic`, not both")
        }
        (None, None, None) => return err("[dataset] needs a `path` or a `synthetic` block"),
    };

    let experiment = raw.experiment.unwrap_or_default();
    let n_runs = overrides.n_runs.or(experiment.n_runs).unwrap_or(20);
    if n_runs < 2 {
        return err(format!("n_runs must be at least 2, got {n_runs}"));
    }
    let stride = overrides.stride.or(experiment.stride).unwrap_or(1);
    if stride == 0 {
        return err("stride must be positive");
    }

    let reward_section = raw.reward.unwrap_or_default();
    let reward_kind = overrides
        .reward
        .clone()
        .or(reward_section.kind)
        .unwrap_or_else(|| "standard".to_string());
    let reward_scale = overrides.reward_scale.or(reward_section.r).unwrap_or(1.5);
    let reward = match reward_kind.as_str() {
        "standard" => RewardTable::standard(),
        "reshaped" => RewardTable::reshaped(reward_scale)
            .map_err(|e| ConfigError(format!("invalid reshaped reward: {e}")))?,
        "custom" => {
            let Some(table) = reward_section.table else {
                return err("reward kind `custom` needs a [reward.table] block");
            };
            RewardTable::custom(table.entries())
                .map_err(|e| ConfigError(format!("invalid custom reward table: {e}")))?
        }
        other => return err(format!("unknown reward kind `{other}`")),
    };

    let manifest = match (&overrides.manifest, raw.manifest) {
        (Some(path), _) => {
            let raw: RawManifest = toml::from_str(
                &std::fs::read_to_string(path).map_err(|e| {
                    ConfigError(format!("cannot read manifest {}: {e}", path.display()))
                })?,
            )
            .map_err(|e| ConfigError(format!("invalid manifest file: {e}")))?;
            EncodingManifest::new(raw.block)
                .map_err(|e| ConfigError(format!("invalid manifest: {e}")))?
        }
        (None, Some(raw)) => EncodingManifest::new(raw.block)
            .map_err(|e| ConfigError(format!("invalid manifest: {e}")))?,
        (None, None) => EncodingManifest::default(),
    };

    let raw_policies: Vec<RawPolicy> = match &overrides.policies {
        Some(list) => list
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|kind| RawPolicy {
                kind: kind.trim().to_string(),
                alpha: None,
                update: None,
                lambda: None,
                warmup: None,
                predict_sqrt_dose: None,
                coefficients_path: None,
                coefficients: None,
            })
            .collect(),
        None => raw.policy,
    };
    if raw_policies.is_empty() {
        return err("no policies configured: add [[policy]] blocks or pass --policies");
    }
    let policies = raw_policies
        .into_iter()
        .map(|p| resolve_policy(p, overrides))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ExperimentConfig {
        dataset,
        schema,
        n_runs,
        seed: overrides.seed.or(experiment.seed).unwrap_or(0),
        output_dir: overrides
            .output_dir
            .clone()
            .or(experiment.output_dir)
            .unwrap_or_else(|| PathBuf::from("out")),
        stride,
        episodes: overrides.episodes.or(experiment.episodes).unwrap_or(false),
        reward,
        policies,
        manifest,
    })
}

fn resolve_policy(raw: RawPolicy, overrides: &Overrides) -> Result<PolicySpec, ConfigError> {
    match raw.kind.as_str() {
        "fixed" => Ok(PolicySpec::Fixed),
        "clinical" => {
            let path = overrides.coefficients.clone().or(raw.coefficients_path);
            let coefficients = match (path, raw.coefficients) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        ConfigError(format!("cannot read coefficients {}: {e}", path.display()))
                    })?;
                    toml::from_str(&text)
                        .map_err(|e| ConfigError(format!("invalid coefficients file: {e}")))?
                }
                (None, Some(inline)) => inline,
                (None, None) => ClinicalCoefficients::default(),
            };
            Ok(PolicySpec::Clinical { coefficients })
        }
        "linucb" => {
            let alpha = overrides.alpha.or(raw.alpha).unwrap_or(1.0);
            if alpha < 0.0 || !alpha.is_finite() {
                return err(format!("linucb alpha must be non-negative, got {alpha}"));
            }
            let update = overrides.linucb_update.clone().or(raw.update);
            let update_mode = match update.as_deref() {
                None | Some("incremental") => LinUcbUpdateMode::Incremental,
                Some("fresh") => LinUcbUpdateMode::FreshSolve,
                Some(other) => return err(format!("unknown linucb update mode `{other}`")),
            };
            Ok(PolicySpec::LinUcb { alpha, update_mode })
        }
        "regression" => {
            let lambda = overrides.lambda.or(raw.lambda).unwrap_or(1.0);
            if lambda < 0.0 || !lambda.is_finite() {
                return err(format!("regression lambda must be non-negative, got {lambda}"));
            }
            Ok(PolicySpec::Regression {
                lambda,
                warmup: overrides.warmup.or(raw.warmup).unwrap_or(1),
                predict_sqrt_dose: overrides
                    .predict_sqrt_dose
                    .or(raw.predict_sqrt_dose)
                    .unwrap_or(false),
            })
        }
        other => err(format!("unknown policy kind `{other}`")),
    }
}
