//! Student-t critical values and confidence-interval aggregation.

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::EvalError;

/// Two-sided Student-t critical value: the `1 − (1 − level)/2` quantile at
/// `df` degrees of freedom.
pub fn t_critical(df: u64, level: f64) -> Result<f64, EvalError> {
    if df < 1 {
        return Err(EvalError::InvalidDegreesOfFreedom(df));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(EvalError::InvalidConfidenceLevel(level));
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64)
        .map_err(|_| EvalError::InvalidDegreesOfFreedom(df))?;
    Ok(dist.inverse_cdf(1.0 - (1.0 - level) / 2.0))
}

/// Mean and symmetric t-interval half-width of a sample.
pub fn mean_ci_half_width(samples: &[f64], t_crit: f64) -> (f64, f64) {
    let n = samples.len();
    debug_assert!(n >= 2);
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, t_crit * sd / (n as f64).sqrt())
}
