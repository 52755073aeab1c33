//! Regret oracle, episode replay, and multi-shuffle aggregation.
//!
//! The oracle fits one linear reward model per arm over the whole dataset;
//! expected regret of a decision is the gap to the best arm under those
//! models. Experiments replay a fresh policy over seeded shuffles of the
//! dataset and aggregate cumulative regret and incorrect-fraction curves
//! with 95% Student-t confidence intervals.

mod stats;

pub use stats::{mean_ci_half_width, t_critical};

use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{
    encode_features, DatasetError, DoseBucket, EncodingManifest, FeatureVector, PatientRecord,
    SyntheticData, FEATURE_DIM,
};
use crate::linalg::{dot, least_squares, LinalgError, Matrix};
use crate::policies::{PolicyError, PolicySpec};
use crate::reward::RewardTable;
use crate::rng;

/// Confidence level for all aggregate curves.
pub const CONFIDENCE_LEVEL: f64 = 0.95;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("contexts and buckets differ in length: {contexts} vs {buckets}")]
    MisalignedInputs { contexts: usize, buckets: usize },
    #[error("oracle needs a non-empty dataset")]
    EmptyDataset,
    #[error("order is not a permutation of 0..{expected}")]
    NotAPermutation { expected: usize },
    #[error("need at least two runs to form a confidence interval, got {0}")]
    TooFewRuns(usize),
    #[error("invalid degrees of freedom: {0}")]
    InvalidDegreesOfFreedom(u64),
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidConfidenceLevel(f64),
    #[error("policy failed at step {step}: {source}")]
    PolicyStep {
        step: usize,
        #[source]
        source: PolicyError,
    },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Replay-ready dataset: encoded contexts, true buckets, and true doses.
#[derive(Debug, Clone)]
pub struct ReplayDataset {
    pub contexts: Vec<FeatureVector>,
    pub true_buckets: Vec<DoseBucket>,
    pub doses: Vec<f64>,
    pub manifest: EncodingManifest,
}

impl ReplayDataset {
    /// Encodes imputed records under the manifest.
    pub fn from_records(
        records: &[PatientRecord],
        manifest: &EncodingManifest,
    ) -> Result<Self, EvalError> {
        let mut contexts = Vec::with_capacity(records.len());
        let mut true_buckets = Vec::with_capacity(records.len());
        let mut doses = Vec::with_capacity(records.len());
        for record in records {
            contexts.push(encode_features(record, manifest)?);
            true_buckets.push(record.dose_bucket()?);
            doses.push(record.therapeutic_dose_mg_week);
        }
        Ok(Self {
            contexts,
            true_buckets,
            doses,
            manifest: manifest.clone(),
        })
    }

    pub fn from_synthetic(data: SyntheticData) -> Self {
        Self {
            contexts: data.contexts,
            true_buckets: data.buckets,
            doses: data.doses,
            manifest: EncodingManifest::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
}

/// Per-arm linear reward models fitted over the whole dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretOracle {
    beta: [Vec<f64>; 3],
}

impl RegretOracle {
    pub fn from_betas(beta: [Vec<f64>; 3]) -> Self {
        Self { beta }
    }

    pub fn beta(&self, arm: DoseBucket) -> &[f64] {
        &self.beta[arm.index()]
    }

    /// `max_j xᵀβ_j − xᵀβ_chosen`; zero exactly when the chosen arm attains
    /// the maximum.
    pub fn expected_regret(&self, context: &FeatureVector, chosen: DoseBucket) -> f64 {
        let x = context.values();
        let scores = [
            dot(x, &self.beta[0]),
            dot(x, &self.beta[1]),
            dot(x, &self.beta[2]),
        ];
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        best - scores[chosen.index()]
    }

    /// Arm with the highest modeled reward (ties to the lowest index).
    pub fn best_arm(&self, context: &FeatureVector) -> DoseBucket {
        let x = context.values();
        let mut best = 0;
        let mut best_score = dot(x, &self.beta[0]);
        for i in 1..3 {
            let s = dot(x, &self.beta[i]);
            if s > best_score {
                best = i;
                best_score = s;
            }
        }
        DoseBucket::from_index(best).expect("arm index in range")
    }
}

/// Fits the per-arm reward models by least squares over all patients.
/// Refit whenever the reward table changes.
pub fn fit_oracle(
    contexts: &[FeatureVector],
    true_buckets: &[DoseBucket],
    table: &RewardTable,
) -> Result<RegretOracle, EvalError> {
    if contexts.len() != true_buckets.len() {
        return Err(EvalError::MisalignedInputs {
            contexts: contexts.len(),
            buckets: true_buckets.len(),
        });
    }
    if contexts.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let rows: Vec<Vec<f64>> = contexts.iter().map(|c| c.values().to_vec()).collect();
    let x = Matrix::from_rows(&rows);
    let mut beta: [Vec<f64>; 3] = [
        vec![0.0; FEATURE_DIM],
        vec![0.0; FEATURE_DIM],
        vec![0.0; FEATURE_DIM],
    ];
    for arm in DoseBucket::ALL {
        let y: Vec<f64> = true_buckets
            .iter()
            .map(|b| table.reward(*b, arm))
            .collect();
        beta[arm.index()] = match least_squares(&x, &y, 0.0) {
            Ok(b) => b,
            // singular XᵀX (collinear one-hot blocks): nudge with a tiny ridge
            Err(LinalgError::Singular { .. }) => least_squares(&x, &y, 1e-8)?,
            Err(e) => return Err(e.into()),
        };
    }
    Ok(RegretOracle { beta })
}

/// One replay step of an [`EpisodeTrace`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based step index.
    pub t: usize,
    pub chosen: DoseBucket,
    pub true_bucket: DoseBucket,
    pub reward: f64,
    pub expected_regret: f64,
    pub cumulative_regret: f64,
    /// Incorrect decisions so far divided by patients seen so far.
    pub incorrect_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeTrace {
    pub steps: Vec<StepRecord>,
}

impl EpisodeTrace {
    pub fn final_incorrect_fraction(&self) -> Option<f64> {
        self.steps.last().map(|s| s.incorrect_fraction)
    }

    pub fn final_cumulative_regret(&self) -> Option<f64> {
        self.steps.last().map(|s| s.cumulative_regret)
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<(), EvalError> {
    if order.len() != n {
        return Err(EvalError::NotAPermutation { expected: n });
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || seen[i] {
            return Err(EvalError::NotAPermutation { expected: n });
        }
        seen[i] = true;
    }
    Ok(())
}

/// Replays one episode: select, reward from the table, expected regret from
/// the oracle, then update (with the true dose only for policies that ask).
pub fn run_episode(
    policy: &mut dyn crate::policies::Policy,
    data: &ReplayDataset,
    order: &[usize],
    table: &RewardTable,
    oracle: &RegretOracle,
) -> Result<EpisodeTrace, EvalError> {
    check_permutation(order, data.len())?;
    let mut steps = Vec::with_capacity(order.len());
    let mut cumulative_regret = 0.0;
    let mut incorrect = 0usize;
    for (step, &idx) in order.iter().enumerate() {
        let t = step + 1;
        let attach = |source: PolicyError| EvalError::PolicyStep { step: t, source };
        let context = &data.contexts[idx];
        let chosen = policy.select(context).map_err(attach)?;
        let true_bucket = data.true_buckets[idx];
        let reward = table.reward(true_bucket, chosen);
        let expected_regret = oracle.expected_regret(context, chosen);
        let true_dose = policy.needs_true_dose().then(|| data.doses[idx]);
        policy
            .update(context, chosen, reward, true_dose)
            .map_err(attach)?;
        if chosen != true_bucket {
            incorrect += 1;
        }
        cumulative_regret += expected_regret;
        steps.push(StepRecord {
            t,
            chosen,
            true_bucket,
            reward,
            expected_regret,
            cumulative_regret,
            incorrect_fraction: incorrect as f64 / t as f64,
        });
    }
    Ok(EpisodeTrace { steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    CumulativeRegret,
    IncorrectFraction,
    FractionCorrect,
}

impl Metric {
    pub const ALL: [Metric; 3] = [
        Metric::CumulativeRegret,
        Metric::IncorrectFraction,
        Metric::FractionCorrect,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::CumulativeRegret => "cumulative_regret",
            Metric::IncorrectFraction => "incorrect_fraction",
            Metric::FractionCorrect => "fraction_correct",
        }
    }

    fn sample(&self, step: &StepRecord) -> f64 {
        match self {
            Metric::CumulativeRegret => step.cumulative_regret,
            Metric::IncorrectFraction => step.incorrect_fraction,
            Metric::FractionCorrect => 1.0 - step.incorrect_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub t: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Mean curve of one metric over runs, with t-interval bounds per step.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub metric: Metric,
    pub points: Vec<CurvePoint>,
    pub runs: usize,
    pub confidence: f64,
}

impl AggregateCurve {
    pub fn final_point(&self) -> Option<&CurvePoint> {
        self.points.last()
    }
}

/// All aggregate curves of one experiment plus its per-run traces.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub policy: &'static str,
    pub curves: Vec<AggregateCurve>,
    pub traces: Vec<EpisodeTrace>,
}

impl ExperimentResult {
    pub fn curve(&self, metric: Metric) -> &AggregateCurve {
        self.curves
            .iter()
            .find(|c| c.metric == metric)
            .expect("all metrics aggregated")
    }
}

/// Replays `n_runs` fresh policies over seeded shuffles (in parallel) and
/// aggregates each metric with a 95% t-interval per timestep.
pub fn run_experiment(
    spec: &PolicySpec,
    data: &ReplayDataset,
    n_runs: usize,
    seed: u64,
    table: &RewardTable,
    oracle: &RegretOracle,
) -> Result<ExperimentResult, EvalError> {
    if n_runs < 2 {
        return Err(EvalError::TooFewRuns(n_runs));
    }
    let traces: Vec<Result<EpisodeTrace, EvalError>> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let order = rng::permutation(data.len(), rng::derive_run_seed(seed, run as u64));
            let mut policy = spec.build(&data.manifest)?;
            run_episode(policy.as_mut(), data, &order, table, oracle)
        })
        .collect();
    let traces: Vec<EpisodeTrace> = traces.into_iter().collect::<Result<_, _>>()?;
    let curves = aggregate(&traces)?;
    Ok(ExperimentResult {
        policy: spec.name(),
        curves,
        traces,
    })
}

/// Aggregates traces of equal length into per-metric mean/CI curves.
pub fn aggregate(traces: &[EpisodeTrace]) -> Result<Vec<AggregateCurve>, EvalError> {
    if traces.len() < 2 {
        return Err(EvalError::TooFewRuns(traces.len()));
    }
    let horizon = traces[0].steps.len();
    debug_assert!(traces.iter().all(|t| t.steps.len() == horizon));
    let t_crit = t_critical((traces.len() - 1) as u64, CONFIDENCE_LEVEL)?;
    let mut curves = Vec::with_capacity(Metric::ALL.len());
    let mut samples = vec![0.0; traces.len()];
    for metric in Metric::ALL {
        let mut points = Vec::with_capacity(horizon);
        for step in 0..horizon {
            for (slot, trace) in samples.iter_mut().zip(traces.iter()) {
                *slot = metric.sample(&trace.steps[step]);
            }
            let (mean, half) = mean_ci_half_width(&samples, t_crit);
            points.push(CurvePoint {
                t: step + 1,
                mean,
                ci_low: mean - half,
                ci_high: mean + half,
            });
        }
        curves.push(AggregateCurve {
            metric,
            points,
            runs: traces.len(),
            confidence: CONFIDENCE_LEVEL,
        });
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticSpec};
    use crate::policies::FixedPolicy;
    use crate::rng::SplitMix64;

    fn unit_context(hot: usize) -> FeatureVector {
        let mut v = vec![0.0; FEATURE_DIM];
        v[hot] = 1.0;
        FeatureVector::new(v).unwrap()
    }

    /// Contexts whose first three dims one-hot the true bucket, plus a dense
    /// random tail: the table reward is then exactly linear in the context.
    fn bucket_coded_dataset(n: usize, seed: u64) -> (Vec<FeatureVector>, Vec<DoseBucket>) {
        let mut rng = SplitMix64::new(seed);
        let mut contexts = Vec::with_capacity(n);
        let mut buckets = Vec::with_capacity(n);
        for i in 0..n {
            let bucket = DoseBucket::from_index(i % 3).unwrap();
            let mut v: Vec<f64> = (0..FEATURE_DIM).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
            v[0] = 0.0;
            v[1] = 0.0;
            v[2] = 0.0;
            v[bucket.index()] = 1.0;
            contexts.push(FeatureVector::new(v).unwrap());
            buckets.push(bucket);
        }
        (contexts, buckets)
    }

    #[test]
    fn oracle_recovers_exactly_linear_rewards() {
        let (contexts, buckets) = bucket_coded_dataset(600, 51);
        let table = RewardTable::standard();
        let oracle = fit_oracle(&contexts, &buckets, &table).unwrap();
        for arm in DoseBucket::ALL {
            let beta = oracle.beta(arm);
            for (dim, &value) in beta.iter().enumerate() {
                let expected = if dim < 3 {
                    table.reward(DoseBucket::from_index(dim).unwrap(), arm)
                } else {
                    0.0
                };
                assert!(
                    (value - expected).abs() < 1e-6,
                    "arm {arm:?} dim {dim}: {value} vs {expected}"
                );
            }
        }
        // the modeled best arm is the true bucket for every patient
        for (x, b) in contexts.iter().zip(buckets.iter()) {
            assert_eq!(oracle.best_arm(x), *b);
        }
    }

    #[test]
    fn intercept_only_fit_uses_bias_column() {
        // constant target per arm and a bias column at dim 22 (default layout)
        let mut rng = SplitMix64::new(77);
        let contexts: Vec<FeatureVector> = (0..200)
            .map(|_| {
                let mut v: Vec<f64> =
                    (0..FEATURE_DIM).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                v[22] = 1.0;
                FeatureVector::new(v).unwrap()
            })
            .collect();
        let buckets = vec![DoseBucket::Medium; 200];
        let table = RewardTable::standard();
        let oracle = fit_oracle(&contexts, &buckets, &table).unwrap();
        // target for arm Medium is identically 0, for Low identically −1
        for (arm, c) in [(DoseBucket::Medium, 0.0), (DoseBucket::Low, -1.0)] {
            let beta = oracle.beta(arm);
            for (dim, &value) in beta.iter().enumerate() {
                let expected = if dim == 22 { c } else { 0.0 };
                assert!(
                    (value - expected).abs() < 1e-8,
                    "arm {arm:?} dim {dim}: {value} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn expected_regret_zero_at_argmax_and_toy_gap() {
        let mut beta0 = vec![0.0; FEATURE_DIM];
        beta0[0] = 1.0;
        let mut beta1 = vec![0.0; FEATURE_DIM];
        beta1[0] = 2.0;
        let beta2 = vec![0.0; FEATURE_DIM];
        let oracle = RegretOracle::from_betas([beta0, beta1, beta2]);
        let x = unit_context(0);
        assert_eq!(oracle.expected_regret(&x, DoseBucket::Medium), 0.0);
        assert_eq!(oracle.expected_regret(&x, DoseBucket::Low), 1.0);
        assert_eq!(oracle.expected_regret(&x, DoseBucket::High), 2.0);
    }

    #[test]
    fn oracle_self_consistency_against_naive_normal_equations() {
        // independent route: dense Gaussian elimination on the normal
        // equations, no shared code with the least-squares kernel
        let data = generate_synthetic(&SyntheticSpec {
            n: 300,
            seed: 9,
            theta_dose: SyntheticSpec::default_theta(),
            noise_sd: 4.0,
        })
        .unwrap();
        let table = RewardTable::reshaped(1.5).unwrap();
        let oracle = fit_oracle(&data.contexts, &data.buckets, &table).unwrap();
        for arm in DoseBucket::ALL {
            let y: Vec<f64> = data.buckets.iter().map(|b| table.reward(*b, arm)).collect();
            let beta = naive_least_squares(&data.contexts, &y);
            for (a, b) in oracle.beta(arm).iter().zip(beta.iter()) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    fn naive_least_squares(contexts: &[FeatureVector], y: &[f64]) -> Vec<f64> {
        let d = FEATURE_DIM;
        let mut a = vec![vec![0.0f64; d + 1]; d];
        for (x, &target) in contexts.iter().zip(y.iter()) {
            let v = x.values();
            for i in 0..d {
                for j in 0..d {
                    a[i][j] += v[i] * v[j];
                }
                a[i][d] += v[i] * target;
            }
        }
        // gaussian elimination with partial pivoting
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
                .unwrap();
            a.swap(col, pivot);
            let p = a[col][col];
            for j in col..=d {
                a[col][j] /= p;
            }
            for row in 0..d {
                if row == col {
                    continue;
                }
                let f = a[row][col];
                if f == 0.0 {
                    continue;
                }
                for j in col..=d {
                    a[row][j] -= f * a[col][j];
                }
            }
        }
        (0..d).map(|i| a[i][d]).collect()
    }

    #[test]
    fn episode_on_all_medium_dataset() {
        let (contexts, _) = bucket_coded_dataset(90, 3);
        let buckets = vec![DoseBucket::Medium; 90];
        let doses = vec![35.0; 90];
        let data = ReplayDataset {
            contexts,
            true_buckets: buckets,
            doses,
            manifest: EncodingManifest::default(),
        };
        let table = RewardTable::standard();
        let oracle = fit_oracle(&data.contexts, &data.true_buckets, &table).unwrap();
        let order: Vec<usize> = (0..data.len()).collect();
        let mut policy = FixedPolicy;
        let trace = run_episode(&mut policy, &data, &order, &table, &oracle).unwrap();
        for step in &trace.steps {
            assert_eq!(step.incorrect_fraction, 0.0);
            assert_eq!(step.reward, 0.0);
        }
        // cumulative regret is the sum of per-step expected regrets
        let total: f64 = trace.steps.iter().map(|s| s.expected_regret).sum();
        assert!((trace.final_cumulative_regret().unwrap() - total).abs() < 1e-12);
    }

    #[test]
    fn episode_replay_is_deterministic() {
        let data = ReplayDataset::from_synthetic(
            generate_synthetic(&SyntheticSpec {
                n: 120,
                seed: 31,
                theta_dose: SyntheticSpec::default_theta(),
                noise_sd: 2.0,
            })
            .unwrap(),
        );
        let table = RewardTable::standard();
        let oracle = fit_oracle(&data.contexts, &data.true_buckets, &table).unwrap();
        let order = rng::permutation(data.len(), 99);
        let spec = PolicySpec::linucb_default();
        let mut p1 = spec.build(&data.manifest).unwrap();
        let mut p2 = spec.build(&data.manifest).unwrap();
        let t1 = run_episode(p1.as_mut(), &data, &order, &table, &oracle).unwrap();
        let t2 = run_episode(p2.as_mut(), &data, &order, &table, &oracle).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn bad_order_is_rejected() {
        let data = ReplayDataset::from_synthetic(
            generate_synthetic(&SyntheticSpec {
                n: 10,
                seed: 1,
                theta_dose: SyntheticSpec::default_theta(),
                noise_sd: 0.0,
            })
            .unwrap(),
        );
        let table = RewardTable::standard();
        let oracle = fit_oracle(&data.contexts, &data.true_buckets, &table).unwrap();
        let mut policy = FixedPolicy;
        for bad in [vec![0usize; 10], (0..9).collect::<Vec<_>>(), vec![11; 10]] {
            assert!(matches!(
                run_episode(&mut policy, &data, &bad, &table, &oracle),
                Err(EvalError::NotAPermutation { .. })
            ));
        }
    }

    #[test]
    fn identical_traces_aggregate_to_zero_width() {
        let step = |t: usize| StepRecord {
            t,
            chosen: DoseBucket::Medium,
            true_bucket: DoseBucket::Medium,
            reward: 0.0,
            expected_regret: 0.5,
            cumulative_regret: 0.5 * t as f64,
            incorrect_fraction: 0.25,
        };
        let trace = EpisodeTrace {
            steps: (1..=10).map(step).collect(),
        };
        let curves = aggregate(&vec![trace.clone(), trace.clone(), trace]).unwrap();
        for curve in curves {
            for (i, point) in curve.points.iter().enumerate() {
                assert_eq!(point.ci_low, point.mean, "metric {:?} t {}", curve.metric, i);
                assert_eq!(point.ci_high, point.mean);
            }
        }
    }

    #[test]
    fn experiment_runs_and_orders_metrics() {
        let data = ReplayDataset::from_synthetic(
            generate_synthetic(&SyntheticSpec {
                n: 150,
                seed: 8,
                theta_dose: SyntheticSpec::default_theta(),
                noise_sd: 1.0,
            })
            .unwrap(),
        );
        let table = RewardTable::standard();
        let oracle = fit_oracle(&data.contexts, &data.true_buckets, &table).unwrap();
        let result = run_experiment(
            &PolicySpec::regression_default(),
            &data,
            4,
            123,
            &table,
            &oracle,
        )
        .unwrap();
        assert_eq!(result.traces.len(), 4);
        for curve in &result.curves {
            assert_eq!(curve.points.len(), data.len());
            assert_eq!(curve.runs, 4);
            for p in &curve.points {
                assert!(p.ci_low <= p.mean && p.mean <= p.ci_high);
            }
        }
        // cumulative regret is non-decreasing within every trace
        for trace in &result.traces {
            for pair in trace.steps.windows(2) {
                assert!(pair[1].cumulative_regret >= pair[0].cumulative_regret);
            }
        }
        assert!(run_experiment(
            &PolicySpec::Fixed,
            &data,
            1,
            123,
            &table,
            &oracle
        )
        .is_err());
    }

    #[test]
    fn fixed_policy_final_fraction_matches_medium_share() {
        let data = ReplayDataset::from_synthetic(
            generate_synthetic(&SyntheticSpec {
                n: 400,
                seed: 17,
                theta_dose: SyntheticSpec::default_theta(),
                noise_sd: 3.0,
            })
            .unwrap(),
        );
        let medium_share = data
            .true_buckets
            .iter()
            .filter(|b| **b == DoseBucket::Medium)
            .count() as f64
            / data.len() as f64;
        let table = RewardTable::standard();
        let oracle = fit_oracle(&data.contexts, &data.true_buckets, &table).unwrap();
        let result =
            run_experiment(&PolicySpec::Fixed, &data, 3, 5, &table, &oracle).unwrap();
        let final_incorrect = result
            .curve(Metric::IncorrectFraction)
            .final_point()
            .unwrap()
            .mean;
        assert!((final_incorrect - (1.0 - medium_share)).abs() < 1e-12);
    }
}
