//! Online least-squares regression on the true weekly dose.
//!
//! Unlike LinUCB this policy observes the correct dose after each decision,
//! so it accumulates pooled normal-equation statistics `XᵀX` and `Xᵀy` and
//! predicts the dose directly; the predicted dose is then bucketed. Before
//! the warmup count is reached it falls back to the medium bucket.

use crate::dataset::{bucket_dose, DoseBucket, FeatureVector, FEATURE_DIM};
use crate::linalg::{dot, solve_normal_eq, Matrix};

use super::{Policy, PolicyError};

#[derive(Debug, Clone)]
pub struct RegressionPolicy {
    xtx: Matrix,
    xty: Vec<f64>,
    observations: u64,
    lambda: f64,
    warmup: u64,
    warmup_default: DoseBucket,
    predict_sqrt_dose: bool,
}

impl RegressionPolicy {
    pub fn new(lambda: f64, warmup: u64, predict_sqrt_dose: bool) -> Self {
        Self {
            xtx: Matrix::zeros(FEATURE_DIM, FEATURE_DIM),
            xty: vec![0.0; FEATURE_DIM],
            observations: 0,
            lambda,
            warmup,
            warmup_default: DoseBucket::Medium,
            predict_sqrt_dose,
        }
    }

    pub fn observations(&self) -> u64 {
        self.observations
    }

    /// Weekly-dose prediction from the current fit. `None` during warmup.
    pub fn predict_dose(&self, context: &FeatureVector) -> Result<Option<f64>, PolicyError> {
        if self.observations < self.warmup {
            return Ok(None);
        }
        let theta = solve_normal_eq(&self.xtx, &self.xty, self.lambda)?;
        let raw = dot(context.values(), &theta);
        let dose = if self.predict_sqrt_dose {
            if raw > 0.0 {
                raw * raw
            } else {
                f64::MIN_POSITIVE
            }
        } else {
            raw.max(f64::MIN_POSITIVE)
        };
        Ok(Some(dose))
    }
}

impl Policy for RegressionPolicy {
    fn name(&self) -> &'static str {
        "regression"
    }

    fn select(&self, context: &FeatureVector) -> Result<DoseBucket, PolicyError> {
        match self.predict_dose(context)? {
            None => Ok(self.warmup_default),
            Some(dose) => Ok(bucket_dose(dose)?),
        }
    }

    fn update(
        &mut self,
        context: &FeatureVector,
        _chosen: DoseBucket,
        _reward: f64,
        true_dose: Option<f64>,
    ) -> Result<(), PolicyError> {
        let dose = true_dose.ok_or(PolicyError::MissingTrueDose)?;
        if dose <= 0.0 || !dose.is_finite() {
            return Err(PolicyError::InvalidTrueDose(dose));
        }
        let target = if self.predict_sqrt_dose { dose.sqrt() } else { dose };
        let x = context.values();
        self.xtx.add_outer(x);
        for (acc, &xi) in self.xty.iter_mut().zip(x.iter()) {
            *acc += target * xi;
        }
        self.observations += 1;
        Ok(())
    }

    fn needs_true_dose(&self) -> bool {
        true
    }
}
