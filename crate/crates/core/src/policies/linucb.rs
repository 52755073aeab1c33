//! LinUCB with disjoint per-arm linear models.
//!
//! Each arm keeps `A = I + Σ x xᵀ` and `b = Σ r x`; the selection score is
//! `p = xᵀθ̂ + α √(xᵀ A⁻¹ x)` with `θ̂ = A⁻¹ b`, and the arm with the highest
//! score wins (ties to the lowest arm index). The inverse is either
//! maintained incrementally by Sherman–Morrison or recomputed from `A` on
//! every selection; both routes must agree and tests hold them to it.

use serde::{Deserialize, Serialize};

use crate::dataset::{DoseBucket, FeatureVector, FEATURE_DIM};
use crate::linalg::{dot, rank_one_inverse_update, solve_spd, Matrix};

use super::{Policy, PolicyError};

/// Re-symmetrize the maintained inverse after this many rank-one updates.
const SYMMETRIZE_EVERY: u64 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinUcbUpdateMode {
    /// Maintain `A⁻¹` by Sherman–Morrison, re-symmetrizing periodically.
    Incremental,
    /// Keep only `A` and factorize afresh on every selection.
    FreshSolve,
}

#[derive(Debug, Clone)]
struct ArmState {
    a: Matrix,
    a_inv: Matrix,
    b: Vec<f64>,
    updates: u64,
}

impl ArmState {
    fn new() -> Self {
        Self {
            a: Matrix::identity(FEATURE_DIM),
            a_inv: Matrix::identity(FEATURE_DIM),
            b: vec![0.0; FEATURE_DIM],
            updates: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinUcbPolicy {
    alpha: f64,
    mode: LinUcbUpdateMode,
    arms: Vec<ArmState>,
}

impl LinUcbPolicy {
    pub fn new(alpha: f64, mode: LinUcbUpdateMode) -> Self {
        Self {
            alpha,
            mode,
            arms: (0..DoseBucket::COUNT).map(|_| ArmState::new()).collect(),
        }
    }

    fn arm_inverse(&self, arm: &ArmState) -> Result<Matrix, PolicyError> {
        match self.mode {
            LinUcbUpdateMode::Incremental => Ok(arm.a_inv.clone()),
            LinUcbUpdateMode::FreshSolve => Ok(crate::linalg::invert_spd(&arm.a)?),
        }
    }

    /// Per-arm upper-confidence scores for a context.
    pub fn scores(&self, context: &FeatureVector) -> Result<[f64; 3], PolicyError> {
        let x = context.values();
        let mut out = [0.0; 3];
        for (i, arm) in self.arms.iter().enumerate() {
            let (theta, a_inv_x) = match self.mode {
                LinUcbUpdateMode::Incremental => {
                    (arm.a_inv.matvec(&arm.b), arm.a_inv.matvec(x))
                }
                LinUcbUpdateMode::FreshSolve => {
                    (solve_spd(&arm.a, &arm.b)?, solve_spd(&arm.a, x)?)
                }
            };
            let width = dot(x, &a_inv_x).max(0.0).sqrt();
            let p = dot(x, &theta) + self.alpha * width;
            if !p.is_finite() {
                return Err(PolicyError::NonFiniteScore { arm: i });
            }
            out[i] = p;
        }
        Ok(out)
    }

    /// Maintained and directly inverted design matrices for one arm;
    /// exposed for equivalence checks between the two update routes.
    pub fn arm_inverse_pair(&self, arm: usize) -> Result<(Matrix, Matrix), PolicyError> {
        let state = &self.arms[arm];
        Ok((
            self.arm_inverse(state)?,
            crate::linalg::invert_spd(&state.a)?,
        ))
    }
}

impl Policy for LinUcbPolicy {
    fn name(&self) -> &'static str {
        "linucb"
    }

    fn select(&self, context: &FeatureVector) -> Result<DoseBucket, PolicyError> {
        let scores = self.scores(context)?;
        let mut best = 0;
        for i in 1..scores.len() {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        Ok(DoseBucket::from_index(best).expect("arm index in range"))
    }

    fn update(
        &mut self,
        context: &FeatureVector,
        chosen: DoseBucket,
        reward: f64,
        _true_dose: Option<f64>,
    ) -> Result<(), PolicyError> {
        let x = context.values();
        let arm = &mut self.arms[chosen.index()];
        arm.a.add_outer(x);
        for (bi, &xi) in arm.b.iter_mut().zip(x.iter()) {
            *bi += reward * xi;
        }
        if self.mode == LinUcbUpdateMode::Incremental {
            arm.a_inv = rank_one_inverse_update(&arm.a_inv, x)?;
            arm.updates += 1;
            if arm.updates % SYMMETRIZE_EVERY == 0 {
                arm.a_inv.symmetrize();
            }
        }
        Ok(())
    }
}
