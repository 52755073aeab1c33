//! Patient records, feature encoding, and dose bucketing.
//!
//! The pipeline is parse → impute → encode: rows come in as a delimited
//! table ([`parse_patient_table`]), missing numerics are filled from
//! whole-dataset statistics ([`impute`]), and each record becomes a fixed
//! 26-dimensional context vector ([`encode_features`]) whose layout is
//! described by an [`EncodingManifest`].

mod parse;
mod synthetic;

pub use parse::{parse_patient_table, IngestReport, TableSchema};
pub use synthetic::{
    generate_synthetic, generate_synthetic_records, write_records_table, SyntheticData,
    SyntheticSpec,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Weekly-dose cut points: below 21 mg/week is a low dose, above 49 a high one.
pub const LOW_DOSE_CEILING_MG_WEEK: f64 = 21.0;
pub const HIGH_DOSE_FLOOR_MG_WEEK: f64 = 49.0;

/// Context dimension shared by the encoder, policies, and the regret oracle.
pub const FEATURE_DIM: usize = 26;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("required column `{column}` (field `{field}`) not found in header")]
    MissingColumn { field: &'static str, column: String },
    #[error("cannot impute `{field}`: no record has a present value")]
    EmptyColumn { field: &'static str },
    #[error("dose must be positive and finite, got {0}")]
    InvalidDose(f64),
    #[error("record field `{field}` is missing; run imputation before encoding")]
    NotImputed { field: &'static str },
    #[error("encoding manifest is {actual} wide, expected {expected}")]
    ManifestWidth { expected: usize, actual: usize },
    #[error("encoding manifest block `{name}`: {reason}")]
    ManifestBlock { name: String, reason: String },
    #[error("synthetic dose model has {actual} coefficients, expected {expected}")]
    ThetaLength { expected: usize, actual: usize },
    #[error("synthetic noise standard deviation must be non-negative and finite, got {0}")]
    InvalidNoise(f64),
}

/// One of the three weekly-dose arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoseBucket {
    Low,
    Medium,
    High,
}

impl DoseBucket {
    pub const ALL: [DoseBucket; 3] = [DoseBucket::Low, DoseBucket::Medium, DoseBucket::High];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            DoseBucket::Low => 0,
            DoseBucket::Medium => 1,
            DoseBucket::High => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<DoseBucket> {
        DoseBucket::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DoseBucket::Low => "low",
            DoseBucket::Medium => "medium",
            DoseBucket::High => "high",
        }
    }
}

/// Buckets a weekly dose: `< 21` low, `21..=49` medium, `> 49` high.
pub fn bucket_dose(dose_mg_week: f64) -> Result<DoseBucket, DatasetError> {
    if dose_mg_week <= 0.0 || !dose_mg_week.is_finite() {
        return Err(DatasetError::InvalidDose(dose_mg_week));
    }
    Ok(if dose_mg_week < LOW_DOSE_CEILING_MG_WEEK {
        DoseBucket::Low
    } else if dose_mg_week <= HIGH_DOSE_FLOOR_MG_WEEK {
        DoseBucket::Medium
    } else {
        DoseBucket::High
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Race {
    Asian,
    BlackOrAfricanAmerican,
    White,
    MixedOrMissing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
    Missing,
}

/// Ternary for drug-intake columns where blank cells are meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrugStatus {
    Yes,
    No,
    Missing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Genotype {
    AA,
    AG,
    GG,
    Missing,
}

/// One row of the patient table after parsing.
///
/// Numeric covariates are `None` until [`impute`] fills them; categorical
/// covariates keep an explicit missing category instead.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    pub age_decades: Option<u8>,
    pub height_cm: Option<f64>,
    pub weight_kg: Option<f64>,
    pub race: Race,
    pub gender: Gender,
    pub amiodarone: DrugStatus,
    pub enzyme_inducer: bool,
    pub vkorc1_genotype: Genotype,
    pub vkorc1_qc_genotype: Genotype,
    pub therapeutic_dose_mg_week: f64,
}

impl PatientRecord {
    pub fn dose_bucket(&self) -> Result<DoseBucket, DatasetError> {
        bucket_dose(self.therapeutic_dose_mg_week)
    }
}

/// Fixed-width context vector (`d = 26`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self, DatasetError> {
        if values.len() != FEATURE_DIM {
            return Err(DatasetError::ManifestWidth {
                expected: FEATURE_DIM,
                actual: values.len(),
            });
        }
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Numeric,
    OneHot,
}

/// One named span of the feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub kind: BlockKind,
    pub width: usize,
}

/// Ordered block layout of the 26-dimensional feature vector.
///
/// Known block names map onto record fields; unrecognized numeric blocks
/// are zero-filled, which is how the reserved dimensions of the default
/// layout stay configurable without touching the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingManifest {
    blocks: Vec<Block>,
}

const KNOWN_ONE_HOT: [(&str, usize); 5] = [
    ("race", 4),
    ("amiodarone", 3),
    ("gender", 3),
    ("vkorc1", 4),
    ("vkorc1_qc", 4),
];
const KNOWN_NUMERIC: [&str; 5] = ["age", "height", "weight", "enzyme_inducer", "bias"];

impl EncodingManifest {
    /// Default 26-dimensional layout: age, height, weight, race(4),
    /// amiodarone(3), gender(3), VKORC1(4), VKORC1 QC(4), enzyme inducer,
    /// bias, and a 3-wide reserved block of zeros.
    pub fn default_layout() -> Self {
        let numeric = |name: &str, width: usize| Block {
            name: name.to_string(),
            kind: BlockKind::Numeric,
            width,
        };
        let one_hot = |name: &str, width: usize| Block {
            name: name.to_string(),
            kind: BlockKind::OneHot,
            width,
        };
        Self::new(vec![
            numeric("age", 1),
            numeric("height", 1),
            numeric("weight", 1),
            one_hot("race", 4),
            one_hot("amiodarone", 3),
            one_hot("gender", 3),
            one_hot("vkorc1", 4),
            one_hot("vkorc1_qc", 4),
            numeric("enzyme_inducer", 1),
            numeric("bias", 1),
            numeric("reserved", 3),
        ])
        .expect("default layout is valid")
    }

    pub fn new(blocks: Vec<Block>) -> Result<Self, DatasetError> {
        let total: usize = blocks.iter().map(|b| b.width).sum();
        if total != FEATURE_DIM {
            return Err(DatasetError::ManifestWidth {
                expected: FEATURE_DIM,
                actual: total,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for block in &blocks {
            if !seen.insert(block.name.as_str()) {
                return Err(DatasetError::ManifestBlock {
                    name: block.name.clone(),
                    reason: "duplicate block name".into(),
                });
            }
            if block.width == 0 {
                return Err(DatasetError::ManifestBlock {
                    name: block.name.clone(),
                    reason: "zero-width block".into(),
                });
            }
            match block.kind {
                BlockKind::OneHot => {
                    match KNOWN_ONE_HOT.iter().find(|(n, _)| *n == block.name) {
                        Some((_, width)) if *width == block.width => {}
                        Some((_, width)) => {
                            return Err(DatasetError::ManifestBlock {
                                name: block.name.clone(),
                                reason: format!("one-hot width must be {width}"),
                            })
                        }
                        None => {
                            return Err(DatasetError::ManifestBlock {
                                name: block.name.clone(),
                                reason: "unknown one-hot block; only known categoricals can be one-hot".into(),
                            })
                        }
                    }
                }
                BlockKind::Numeric => {
                    if KNOWN_ONE_HOT.iter().any(|(n, _)| *n == block.name) {
                        return Err(DatasetError::ManifestBlock {
                            name: block.name.clone(),
                            reason: "categorical block must be one-hot".into(),
                        });
                    }
                    if KNOWN_NUMERIC.contains(&block.name.as_str()) && block.width != 1 {
                        return Err(DatasetError::ManifestBlock {
                            name: block.name.clone(),
                            reason: "known numeric block must be width 1".into(),
                        });
                    }
                }
            }
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Start offset and width of a named block, if present.
    pub fn span_of(&self, name: &str) -> Option<(usize, usize)> {
        let mut offset = 0;
        for block in &self.blocks {
            if block.name == name {
                return Some((offset, block.width));
            }
            offset += block.width;
        }
        None
    }
}

impl Default for EncodingManifest {
    fn default() -> Self {
        Self::default_layout()
    }
}

fn one_hot(width: usize, hot: usize) -> Vec<f64> {
    let mut v = vec![0.0; width];
    v[hot] = 1.0;
    v
}

/// Encodes a fully imputed record as a 26-dimensional context vector.
pub fn encode_features(
    record: &PatientRecord,
    manifest: &EncodingManifest,
) -> Result<FeatureVector, DatasetError> {
    let mut values = Vec::with_capacity(FEATURE_DIM);
    for block in manifest.blocks() {
        match block.name.as_str() {
            "age" => values.push(f64::from(
                record.age_decades.ok_or(DatasetError::NotImputed { field: "age" })?,
            )),
            "height" => {
                values.push(record.height_cm.ok_or(DatasetError::NotImputed { field: "height" })?)
            }
            "weight" => {
                values.push(record.weight_kg.ok_or(DatasetError::NotImputed { field: "weight" })?)
            }
            "race" => values.extend(one_hot(
                4,
                match record.race {
                    Race::Asian => 0,
                    Race::BlackOrAfricanAmerican => 1,
                    Race::MixedOrMissing => 2,
                    Race::White => 3,
                },
            )),
            "amiodarone" => values.extend(one_hot(
                3,
                match record.amiodarone {
                    DrugStatus::Yes => 0,
                    DrugStatus::No => 1,
                    DrugStatus::Missing => 2,
                },
            )),
            "gender" => values.extend(one_hot(
                3,
                match record.gender {
                    Gender::Male => 0,
                    Gender::Female => 1,
                    Gender::Missing => 2,
                },
            )),
            "vkorc1" => values.extend(one_hot(4, genotype_index(record.vkorc1_genotype))),
            "vkorc1_qc" => values.extend(one_hot(4, genotype_index(record.vkorc1_qc_genotype))),
            "enzyme_inducer" => values.push(if record.enzyme_inducer { 1.0 } else { 0.0 }),
            "bias" => values.push(1.0),
            _ => values.extend(std::iter::repeat(0.0).take(block.width)),
        }
    }
    FeatureVector::new(values)
}

fn genotype_index(g: Genotype) -> usize {
    match g {
        Genotype::AA => 0,
        Genotype::AG => 1,
        Genotype::GG => 2,
        Genotype::Missing => 3,
    }
}

/// Fills missing numerics from whole-dataset statistics: age takes the mode
/// of the present decades (ties to the smaller decade), height and weight
/// take the mean of present values. Categorical missing values stay as their
/// explicit missing category.
pub fn impute(records: &[PatientRecord]) -> Result<Vec<PatientRecord>, DatasetError> {
    let age_mode = mode_decade(records.iter().filter_map(|r| r.age_decades))
        .ok_or(DatasetError::EmptyColumn { field: "age" })?;
    let height_mean = mean(records.iter().filter_map(|r| r.height_cm))
        .ok_or(DatasetError::EmptyColumn { field: "height" })?;
    let weight_mean = mean(records.iter().filter_map(|r| r.weight_kg))
        .ok_or(DatasetError::EmptyColumn { field: "weight" })?;

    Ok(records
        .iter()
        .map(|r| PatientRecord {
            age_decades: r.age_decades.or(Some(age_mode)),
            height_cm: r.height_cm.or(Some(height_mean)),
            weight_kg: r.weight_kg.or(Some(weight_mean)),
            ..r.clone()
        })
        .collect())
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut count) = (0.0, 0usize);
    for v in values {
        sum += v;
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

fn mode_decade(values: impl Iterator<Item = u8>) -> Option<u8> {
    let mut counts = [0usize; 16];
    let mut any = false;
    for v in values {
        counts[usize::from(v.min(15))] += 1;
        any = true;
    }
    if !any {
        return None;
    }
    let best = counts.iter().copied().max().unwrap();
    counts.iter().position(|&c| c == best).map(|i| i as u8)
}

#[cfg(test)]
pub(crate) fn test_record() -> PatientRecord {
    PatientRecord {
        age_decades: Some(5),
        height_cm: Some(168.0),
        weight_kg: Some(75.5),
        race: Race::White,
        gender: Gender::Female,
        amiodarone: DrugStatus::No,
        enzyme_inducer: false,
        vkorc1_genotype: Genotype::AG,
        vkorc1_qc_genotype: Genotype::GG,
        therapeutic_dose_mg_week: 35.0,
    }
}
