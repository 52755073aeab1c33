//! Reward structures over (true bucket, chosen bucket) pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DoseBucket;

#[derive(Debug, Error)]
pub enum RewardError {
    #[error("reshaping scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("reward table cell ({true_bucket:?}, {chosen:?}) must be strictly below the diagonal of its row")]
    DiagonalNotMaximal {
        true_bucket: DoseBucket,
        chosen: DoseBucket,
    },
    #[error("reward table contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardLabel {
    Standard,
    Reshaped,
    Custom,
}

impl RewardLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RewardLabel::Standard => "standard",
            RewardLabel::Reshaped => "reshaped",
            RewardLabel::Custom => "custom",
        }
    }
}

/// 3×3 reward matrix indexed by `(true bucket, chosen bucket)`.
///
/// Every valid table rewards the correct bucket strictly above any incorrect
/// one in the same row; construction enforces it.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable {
    entries: [[f64; 3]; 3],
    label: RewardLabel,
}

impl RewardTable {
    /// Uniform penalty: 0 for the correct bucket, −1 otherwise.
    pub fn standard() -> Self {
        let mut entries = [[-1.0; 3]; 3];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        Self {
            entries,
            label: RewardLabel::Standard,
        }
    }

    /// Severity-shaped penalties: under-dosing a high-need patient is the
    /// worst case (−2R), over-dosing a low-need patient next (−R), any
    /// near-miss −R/2, correct dose 0.
    pub fn reshaped(r: f64) -> Result<Self, RewardError> {
        if r <= 0.0 || !r.is_finite() {
            return Err(RewardError::NonPositiveScale(r));
        }
        let half = -r / 2.0;
        let entries = [
            [0.0, half, -r],
            [half, 0.0, half],
            [-2.0 * r, half, 0.0],
        ];
        Ok(Self {
            entries,
            label: RewardLabel::Reshaped,
        })
    }

    /// A caller-supplied table; rejects rows whose diagonal is not the
    /// strict maximum.
    pub fn custom(entries: [[f64; 3]; 3]) -> Result<Self, RewardError> {
        for (i, row) in entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(RewardError::NonFinite { row: i, col: j });
                }
                if j != i && *v >= row[i] {
                    return Err(RewardError::DiagonalNotMaximal {
                        true_bucket: DoseBucket::from_index(i).unwrap(),
                        chosen: DoseBucket::from_index(j).unwrap(),
                    });
                }
            }
        }
        Ok(Self {
            entries,
            label: RewardLabel::Custom,
        })
    }

    pub fn label(&self) -> RewardLabel {
        self.label
    }

    pub fn reward(&self, true_bucket: DoseBucket, chosen: DoseBucket) -> f64 {
        self.entries[true_bucket.index()][chosen.index()]
    }

    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use DoseBucket::*;

    #[test]
    fn standard_values() {
        let t = RewardTable::standard();
        assert_eq!(t.reward(Medium, Medium), 0.0);
        assert_eq!(t.reward(Low, High), -1.0);
        assert_eq!(t.reward(Low, Low), 0.0);
        for b in DoseBucket::ALL {
            for c in DoseBucket::ALL {
                if b == c {
                    assert_eq!(t.reward(b, c), 0.0);
                } else {
                    assert_eq!(t.reward(b, c), -1.0);
                }
            }
        }
    }

    #[test]
    fn reshaped_values_at_default_scale() {
        let t = RewardTable::reshaped(1.5).unwrap();
        assert_eq!(t.reward(High, Low), -3.0);
        assert_eq!(t.reward(Low, High), -1.5);
        assert_eq!(t.reward(Medium, Low), -0.75);
        assert_eq!(t.reward(Medium, High), -0.75);
        assert_eq!(t.reward(Low, Medium), -0.75);
        assert_eq!(t.reward(High, Medium), -0.75);
        assert_eq!(t.reward(High, High), 0.0);
    }

    #[test]
    fn reshaped_rejects_non_positive_scale() {
        assert!(RewardTable::reshaped(0.0).is_err());
        assert!(RewardTable::reshaped(-1.5).is_err());
        assert!(RewardTable::reshaped(f64::NAN).is_err());
    }

    #[test]
    fn custom_lookup_returns_stored_cell() {
        let t = RewardTable::custom([[5.0, 1.0, 0.0], [-1.0, 2.0, -3.0], [-9.0, -4.0, 7.0]]).unwrap();
        assert_eq!(t.reward(Medium, High), -3.0);
        assert_eq!(t.label(), RewardLabel::Custom);
    }

    #[test]
    fn custom_rejects_off_diagonal_maximum() {
        let bad = [[0.0, 0.0, -1.0], [-1.0, 0.0, -1.0], [-1.0, -1.0, 0.0]];
        assert!(RewardTable::custom(bad).is_err());
    }

    proptest! {
        // argmax over the chosen bucket recovers the true bucket
        #[test]
        fn diagonal_is_row_argmax(r in 1e-6f64..1e3) {
            for table in [RewardTable::standard(), RewardTable::reshaped(r).unwrap()] {
                for true_bucket in DoseBucket::ALL {
                    let best = DoseBucket::ALL
                        .into_iter()
                        .max_by(|a, b| {
                            table.reward(true_bucket, *a)
                                .partial_cmp(&table.reward(true_bucket, *b))
                                .unwrap()
                        })
                        .unwrap();
                    prop_assert_eq!(best, true_bucket);
                }
            }
        }

        // −2R < −R < −R/2 < 0 for all R > 0
        #[test]
        fn reshaped_severity_ordering(r in 1e-6f64..1e3) {
            let t = RewardTable::reshaped(r).unwrap();
            let worst = t.reward(DoseBucket::High, DoseBucket::Low);
            let over = t.reward(DoseBucket::Low, DoseBucket::High);
            prop_assert!(worst < over);
            for true_bucket in DoseBucket::ALL {
                for chosen in DoseBucket::ALL {
                    if true_bucket == chosen {
                        continue;
                    }
                    let v = t.reward(true_bucket, chosen);
                    prop_assert!(v < 0.0);
                    if (true_bucket, chosen) != (DoseBucket::High, DoseBucket::Low)
                        && (true_bucket, chosen) != (DoseBucket::Low, DoseBucket::High)
                    {
                        prop_assert!(over < v);
                    }
                }
            }
        }
    }
}
