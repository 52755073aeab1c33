//! Contextual-bandit dosing policies and an offline replay harness for the
//! warfarin dose-bucket problem.
//!
//! Weekly warfarin doses fall into three buckets (low < 21 mg/week, medium
//! 21–49, high > 49). Given a patient table, this crate encodes each patient
//! as a 26-dimensional context, replays dosing policies over seeded shuffles
//! of the dataset, and scores them on cumulative expected regret and the
//! fraction of incorrect bucket decisions, with 95% t-distribution
//! confidence intervals over runs.
//!
//! Modules follow the pipeline:
//!
//! * [`dataset`] — table ingestion, imputation, feature encoding, dose
//!   bucketing, and synthetic data;
//! * [`reward`] — standard and severity-reshaped reward tables;
//! * [`linalg`] — the small dense kernel (Cholesky, normal equations,
//!   Sherman–Morrison) shared by policies and the oracle;
//! * [`policies`] — fixed, clinical, LinUCB, and online regression dosing
//!   policies behind one interface;
//! * [`evaluation`] — the regret oracle, episode replay, and multi-shuffle
//!   aggregation;
//! * [`rng`] — pinned SplitMix64 primitives so every run replays exactly.

pub mod dataset;
pub mod evaluation;
pub mod linalg;
pub mod policies;
pub mod reward;
pub mod rng;

pub use dataset::{
    bucket_dose, encode_features, impute, parse_patient_table, DoseBucket, EncodingManifest,
    FeatureVector, IngestReport, PatientRecord, TableSchema, FEATURE_DIM,
};
pub use evaluation::{
    fit_oracle, run_episode, run_experiment, t_critical, EpisodeTrace, ExperimentResult, Metric,
    RegretOracle, ReplayDataset,
};
pub use policies::{ClinicalCoefficients, Policy, PolicySpec};
pub use reward::{RewardLabel, RewardTable};
