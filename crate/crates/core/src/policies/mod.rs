//! Dosing policies behind one replay interface.
//!
//! Four policies share [`Policy`]: a fixed medium dose, the published
//! clinical linear model, LinUCB with per-arm ridge state, and online
//! least-squares regression on the true weekly dose. A policy instance is
//! single-threaded; distinct instances are independent.

mod linucb;
mod regression;

pub use linucb::{LinUcbPolicy, LinUcbUpdateMode};
pub use regression::RegressionPolicy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{
    bucket_dose, DatasetError, DoseBucket, EncodingManifest, FeatureVector, PatientRecord,
};
use crate::linalg::LinalgError;

/// All patients on the fixed baseline receive 35 mg/week.
pub const FIXED_WEEKLY_DOSE_MG: f64 = 35.0;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy produced a non-finite score for arm {arm}")]
    NonFiniteScore { arm: usize },
    #[error("update requires a positive true dose, got {0}")]
    InvalidTrueDose(f64),
    #[error("policy requires the true dose but none was supplied")]
    MissingTrueDose,
    #[error("record is not imputed: field `{field}` missing")]
    NotImputed { field: &'static str },
    #[error("manifest lacks block `{block}` required by the clinical model")]
    MissingManifestBlock { block: &'static str },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Shared select/update contract for the replay harness.
///
/// `select` must be deterministic given the policy state and context;
/// `update` may mutate only the policy's own state. The true dose is passed
/// only to policies that declare they need it, keeping reward-only policies
/// honest about what they observe.
pub trait Policy: Send {
    fn name(&self) -> &'static str;

    fn select(&self, context: &FeatureVector) -> Result<DoseBucket, PolicyError>;

    fn update(
        &mut self,
        context: &FeatureVector,
        chosen: DoseBucket,
        reward: f64,
        true_dose: Option<f64>,
    ) -> Result<(), PolicyError>;

    fn needs_true_dose(&self) -> bool {
        false
    }
}

/// Constant 35 mg/week baseline; always a medium bucket, never learns.
#[derive(Debug, Clone, Default)]
pub struct FixedPolicy;

impl Policy for FixedPolicy {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn select(&self, _context: &FeatureVector) -> Result<DoseBucket, PolicyError> {
        Ok(bucket_dose(FIXED_WEEKLY_DOSE_MG)?)
    }

    fn update(
        &mut self,
        _context: &FeatureVector,
        _chosen: DoseBucket,
        _reward: f64,
        _true_dose: Option<f64>,
    ) -> Result<(), PolicyError> {
        Ok(())
    }
}

/// Weights of the published clinical dosing algorithm: a linear model over
/// eight covariates predicting the square root of the weekly dose.
///
/// The bundled defaults are the published coefficients, but they are config
/// data, not ground truth; load alternatives from file to experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClinicalCoefficients {
    pub intercept: f64,
    pub age_decades: f64,
    pub height_cm: f64,
    pub weight_kg: f64,
    pub asian: f64,
    pub black_or_african_american: f64,
    pub mixed_or_missing_race: f64,
    pub enzyme_inducer: f64,
    pub amiodarone: f64,
}

impl Default for ClinicalCoefficients {
    fn default() -> Self {
        Self {
            intercept: 4.0376,
            age_decades: -0.2546,
            height_cm: 0.0118,
            weight_kg: 0.0134,
            asian: -0.6752,
            black_or_african_american: 0.4060,
            mixed_or_missing_race: 0.0443,
            enzyme_inducer: 1.2799,
            amiodarone: -0.5695,
        }
    }
}

/// The eight clinical covariates in model order.
#[derive(Debug, Clone, Copy)]
struct ClinicalFeatures {
    age_decades: f64,
    height_cm: f64,
    weight_kg: f64,
    asian: f64,
    black: f64,
    mixed_or_missing: f64,
    enzyme_inducer: f64,
    amiodarone: f64,
}

fn clinical_score(features: &ClinicalFeatures, coeffs: &ClinicalCoefficients) -> f64 {
    coeffs.intercept
        + coeffs.age_decades * features.age_decades
        + coeffs.height_cm * features.height_cm
        + coeffs.weight_kg * features.weight_kg
        + coeffs.asian * features.asian
        + coeffs.black_or_african_american * features.black
        + coeffs.mixed_or_missing_race * features.mixed_or_missing
        + coeffs.enzyme_inducer * features.enzyme_inducer
        + coeffs.amiodarone * features.amiodarone
}

fn dose_from_sqrt(sqrt_dose: f64) -> f64 {
    if sqrt_dose > 0.0 {
        sqrt_dose * sqrt_dose
    } else {
        // a non-positive score is certainly a low dose
        f64::MIN_POSITIVE
    }
}

/// Predicted weekly dose for an imputed record under the clinical model.
pub fn clinical_weekly_dose(
    record: &PatientRecord,
    coeffs: &ClinicalCoefficients,
) -> Result<f64, PolicyError> {
    let features = ClinicalFeatures {
        age_decades: f64::from(
            record
                .age_decades
                .ok_or(PolicyError::NotImputed { field: "age" })?,
        ),
        height_cm: record
            .height_cm
            .ok_or(PolicyError::NotImputed { field: "height" })?,
        weight_kg: record
            .weight_kg
            .ok_or(PolicyError::NotImputed { field: "weight" })?,
        asian: f64::from(record.race == crate::dataset::Race::Asian),
        black: f64::from(record.race == crate::dataset::Race::BlackOrAfricanAmerican),
        mixed_or_missing: f64::from(record.race == crate::dataset::Race::MixedOrMissing),
        enzyme_inducer: f64::from(record.enzyme_inducer),
        amiodarone: f64::from(record.amiodarone == crate::dataset::DrugStatus::Yes),
    };
    Ok(dose_from_sqrt(clinical_score(&features, coeffs)))
}

/// Dose bucket chosen by the clinical model for an imputed record.
pub fn clinical_select(
    record: &PatientRecord,
    coeffs: &ClinicalCoefficients,
) -> Result<DoseBucket, PolicyError> {
    Ok(bucket_dose(clinical_weekly_dose(record, coeffs)?)?)
}

/// Positions of the clinical covariates inside an encoded context vector.
#[derive(Debug, Clone, Copy)]
struct ClinicalLayout {
    age: usize,
    height: usize,
    weight: usize,
    race: usize,
    amiodarone: usize,
    enzyme_inducer: usize,
}

impl ClinicalLayout {
    fn from_manifest(manifest: &EncodingManifest) -> Result<Self, PolicyError> {
        let span = |block: &'static str| {
            manifest
                .span_of(block)
                .map(|(off, _)| off)
                .ok_or(PolicyError::MissingManifestBlock { block })
        };
        Ok(Self {
            age: span("age")?,
            height: span("height")?,
            weight: span("weight")?,
            race: span("race")?,
            amiodarone: span("amiodarone")?,
            enzyme_inducer: span("enzyme_inducer")?,
        })
    }
}

/// The clinical linear model behind the uniform policy interface; reads its
/// eight covariates back out of the encoded context via the manifest.
#[derive(Debug, Clone)]
pub struct ClinicalPolicy {
    coeffs: ClinicalCoefficients,
    layout: ClinicalLayout,
}

impl ClinicalPolicy {
    pub fn new(
        coeffs: ClinicalCoefficients,
        manifest: &EncodingManifest,
    ) -> Result<Self, PolicyError> {
        Ok(Self {
            coeffs,
            layout: ClinicalLayout::from_manifest(manifest)?,
        })
    }
}

impl Policy for ClinicalPolicy {
    fn name(&self) -> &'static str {
        "clinical"
    }

    fn select(&self, context: &FeatureVector) -> Result<DoseBucket, PolicyError> {
        let x = context.values();
        let features = ClinicalFeatures {
            age_decades: x[self.layout.age],
            height_cm: x[self.layout.height],
            weight_kg: x[self.layout.weight],
            asian: x[self.layout.race],
            black: x[self.layout.race + 1],
            mixed_or_missing: x[self.layout.race + 2],
            enzyme_inducer: x[self.layout.enzyme_inducer],
            amiodarone: x[self.layout.amiodarone],
        };
        Ok(bucket_dose(dose_from_sqrt(clinical_score(
            &features,
            &self.coeffs,
        )))?)
    }

    fn update(
        &mut self,
        _context: &FeatureVector,
        _chosen: DoseBucket,
        _reward: f64,
        _true_dose: Option<f64>,
    ) -> Result<(), PolicyError> {
        Ok(())
    }
}

/// Everything needed to build a fresh policy instance per episode.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Fixed,
    Clinical {
        coefficients: ClinicalCoefficients,
    },
    LinUcb {
        alpha: f64,
        update_mode: LinUcbUpdateMode,
    },
    Regression {
        lambda: f64,
        warmup: u64,
        predict_sqrt_dose: bool,
    },
}

impl PolicySpec {
    pub fn linucb_default() -> Self {
        PolicySpec::LinUcb {
            alpha: 1.0,
            update_mode: LinUcbUpdateMode::Incremental,
        }
    }

    pub fn regression_default() -> Self {
        PolicySpec::Regression {
            lambda: 1.0,
            warmup: 1,
            predict_sqrt_dose: false,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Fixed => "fixed",
            PolicySpec::Clinical { .. } => "clinical",
            PolicySpec::LinUcb { .. } => "linucb",
            PolicySpec::Regression { .. } => "regression",
        }
    }

    pub fn build(&self, manifest: &EncodingManifest) -> Result<Box<dyn Policy>, PolicyError> {
        Ok(match self {
            PolicySpec::Fixed => Box::new(FixedPolicy),
            PolicySpec::Clinical { coefficients } => {
                Box::new(ClinicalPolicy::new(*coefficients, manifest)?)
            }
            PolicySpec::LinUcb { alpha, update_mode } => {
                Box::new(LinUcbPolicy::new(*alpha, *update_mode))
            }
            PolicySpec::Regression {
                lambda,
                warmup,
                predict_sqrt_dose,
            } => Box::new(RegressionPolicy::new(*lambda, *warmup, *predict_sqrt_dose)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{encode_features, impute, test_record, DrugStatus, Race};

    fn any_context() -> FeatureVector {
        encode_features(&test_record(), &EncodingManifest::default()).unwrap()
    }

    #[test]
    fn fixed_always_medium_and_stateless() {
        let mut p = FixedPolicy;
        let x = any_context();
        assert_eq!(p.select(&x).unwrap(), DoseBucket::Medium);
        assert_eq!(p.select(&x).unwrap(), DoseBucket::Medium);
        p.update(&x, DoseBucket::Medium, -1.0, None).unwrap();
        assert_eq!(p.select(&x).unwrap(), DoseBucket::Medium);
    }

    #[test]
    fn constant_clinical_model_hits_the_intended_bucket() {
        let zeroed = ClinicalCoefficients {
            intercept: 35.0f64.sqrt(),
            age_decades: 0.0,
            height_cm: 0.0,
            weight_kg: 0.0,
            asian: 0.0,
            black_or_african_american: 0.0,
            mixed_or_missing_race: 0.0,
            enzyme_inducer: 0.0,
            amiodarone: 0.0,
        };
        assert_eq!(
            clinical_select(&test_record(), &zeroed).unwrap(),
            DoseBucket::Medium
        );
        let low = ClinicalCoefficients {
            intercept: 20.0f64.sqrt(),
            ..zeroed
        };
        assert_eq!(
            clinical_select(&test_record(), &low).unwrap(),
            DoseBucket::Low
        );
    }

    #[test]
    fn negative_score_clamps_to_low() {
        let negative = ClinicalCoefficients {
            intercept: -3.0,
            age_decades: 0.0,
            height_cm: 0.0,
            weight_kg: 0.0,
            asian: 0.0,
            black_or_african_american: 0.0,
            mixed_or_missing_race: 0.0,
            enzyme_inducer: 0.0,
            amiodarone: 0.0,
        };
        assert_eq!(
            clinical_select(&test_record(), &negative).unwrap(),
            DoseBucket::Low
        );
    }

    #[test]
    fn published_defaults_give_plausible_doses() {
        let dose = clinical_weekly_dose(&test_record(), &ClinicalCoefficients::default()).unwrap();
        assert!(dose > 10.0 && dose < 80.0, "dose={dose}");
    }

    #[test]
    fn policy_interface_matches_record_level_model() {
        let manifest = EncodingManifest::default();
        let coeffs = ClinicalCoefficients::default();
        let policy = ClinicalPolicy::new(coeffs, &manifest).unwrap();
        let mut records = vec![test_record(), test_record(), test_record(), test_record()];
        records[1].race = Race::Asian;
        records[1].amiodarone = DrugStatus::Yes;
        records[2].race = Race::BlackOrAfricanAmerican;
        records[2].enzyme_inducer = true;
        records[3].race = Race::MixedOrMissing;
        records[3].age_decades = Some(9);
        for r in impute(&records).unwrap() {
            let via_record = clinical_select(&r, &coeffs).unwrap();
            let via_vector = policy
                .select(&encode_features(&r, &manifest).unwrap())
                .unwrap();
            assert_eq!(via_record, via_vector);
        }
    }

    #[test]
    fn unimputed_record_is_rejected() {
        let mut r = test_record();
        r.age_decades = None;
        assert!(matches!(
            clinical_select(&r, &ClinicalCoefficients::default()),
            Err(PolicyError::NotImputed { field: "age" })
        ));
    }

    #[test]
    fn spec_builds_all_policies() {
        let manifest = EncodingManifest::default();
        for spec in [
            PolicySpec::Fixed,
            PolicySpec::Clinical {
                coefficients: ClinicalCoefficients::default(),
            },
            PolicySpec::linucb_default(),
            PolicySpec::regression_default(),
        ] {
            let policy = spec.build(&manifest).unwrap();
            assert_eq!(policy.name(), spec.name());
        }
    }
}
