//! Subcommand implementations: validate, run, synth.

use std::fmt::Write as _;
use std::path::Path;

use dosebandit::dataset::{
    generate_synthetic, generate_synthetic_records, write_records_table, DatasetError,
};
use dosebandit::evaluation::EvalError;
use dosebandit::policies::PolicyError;
use dosebandit::{
    fit_oracle, impute, parse_patient_table, run_experiment, ExperimentResult, Metric,
    ReplayDataset, TableSchema,
};

use crate::config::{self, DatasetSource, ExperimentConfig, Overrides};
use crate::AppError;

fn classify_dataset(e: DatasetError) -> AppError {
    match e {
        DatasetError::MissingColumn { .. }
        | DatasetError::EmptyColumn { .. }
        | DatasetError::InvalidDose(_) => AppError::Data(e.to_string()),
        DatasetError::ManifestWidth { .. }
        | DatasetError::ManifestBlock { .. }
        | DatasetError::ThetaLength { .. }
        | DatasetError::InvalidNoise(_) => AppError::Config(e.to_string()),
        DatasetError::NotImputed { .. } => AppError::Numeric(e.to_string()),
    }
}

fn classify_eval(e: EvalError) -> AppError {
    match e {
        EvalError::TooFewRuns(_)
        | EvalError::InvalidConfidenceLevel(_)
        | EvalError::InvalidDegreesOfFreedom(_) => AppError::Config(e.to_string()),
        EvalError::EmptyDataset | EvalError::MisalignedInputs { .. } => {
            AppError::Data(e.to_string())
        }
        EvalError::Dataset(inner) => classify_dataset(inner),
        EvalError::Policy(PolicyError::Dataset(inner)) => classify_dataset(inner),
        other => AppError::Numeric(other.to_string()),
    }
}

pub fn cmd_validate(dataset: &Path, config: Option<&Path>) -> Result<(), AppError> {
    let schema = match config {
        Some(path) => config::load_schema(path)?,
        None => TableSchema::default(),
    };
    let text = std::fs::read_to_string(dataset)
        .map_err(|e| AppError::Data(format!("cannot read dataset {}: {e}", dataset.display())))?;
    let (_, report) = parse_patient_table(&text, &schema).map_err(classify_dataset)?;
    print!("{report}");
    if report.retained == 0 {
        return Err(AppError::Data("no records retained".into()));
    }
    Ok(())
}

pub fn cmd_synth(n: usize, seed: u64, noise: f64, out: &Path) -> Result<(), AppError> {
    if n == 0 {
        return Err(AppError::Config("synth needs n > 0".into()));
    }
    let records = generate_synthetic_records(n, seed, noise).map_err(classify_dataset)?;
    let table = write_records_table(&records, &TableSchema::default()).map_err(classify_dataset)?;
    std::fs::write(out, table)
        .map_err(|e| AppError::Config(format!("cannot write {}: {e}", out.display())))?;
    println!("synth n={n} seed={seed} noise={noise} out={}", out.display());
    Ok(())
}

fn load_dataset(cfg: &ExperimentConfig) -> Result<ReplayDataset, AppError> {
    match &cfg.dataset {
        DatasetSource::Table(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                AppError::Data(format!("cannot read dataset {}: {e}", path.display()))
            })?;
            let (records, report) =
                parse_patient_table(&text, &cfg.schema).map_err(classify_dataset)?;
            eprintln!(
                "ingest rows_read={} retained={} dropped={}",
                report.rows_read, report.retained, report.dropped_missing_dose
            );
            if records.is_empty() {
                return Err(AppError::Data("dataset has no usable records".into()));
            }
            let records = impute(&records).map_err(classify_dataset)?;
            ReplayDataset::from_records(&records, &cfg.manifest).map_err(classify_eval)
        }
        DatasetSource::Synthetic(spec) => Ok(ReplayDataset::from_synthetic(
            generate_synthetic(spec).map_err(classify_dataset)?,
        )),
    }
}

pub fn cmd_run(config_path: &Path, overrides: &Overrides) -> Result<(), AppError> {
    let cfg = config::load(config_path, overrides)?;
    let data = load_dataset(&cfg)?;

    let oracle = fit_oracle(&data.contexts, &data.true_buckets, &cfg.reward)
        .map_err(classify_eval)?;
    eprintln!(
        "oracle_fit reward={} patients={}",
        cfg.reward.label().as_str(),
        data.len()
    );

    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        AppError::Config(format!(
            "cannot create output dir {}: {e}",
            cfg.output_dir.display()
        ))
    })?;

    let mut name_counts = std::collections::BTreeMap::new();
    for spec in &cfg.policies {
        let result = run_experiment(spec, &data, cfg.n_runs, cfg.seed, &cfg.reward, &oracle)
            .map_err(|e| {
                let classified = classify_eval(e);
                AppError::Numeric(format!(
                    "policy {} failed: {}",
                    spec.name(),
                    classified.message()
                ))
            })?;

        let count = name_counts
            .entry(spec.name())
            .and_modify(|c| *c += 1)
            .or_insert(1usize);
        let stem = if *count == 1 {
            format!("{}_{}", spec.name(), cfg.reward.label().as_str())
        } else {
            format!("{}{}_{}", spec.name(), count, cfg.reward.label().as_str())
        };

        let curve_path = cfg.output_dir.join(format!("{stem}.csv"));
        std::fs::write(&curve_path, render_curves(&result, cfg.stride)).map_err(|e| {
            AppError::Config(format!("cannot write {}: {e}", curve_path.display()))
        })?;

        if cfg.episodes {
            for (run, trace) in result.traces.iter().enumerate() {
                let episode_path = cfg.output_dir.join(format!("{stem}_run{run}.csv"));
                std::fs::write(&episode_path, render_episode(trace)).map_err(|e| {
                    AppError::Config(format!("cannot write {}: {e}", episode_path.display()))
                })?;
            }
        }

        print_summary(&result, &cfg, &curve_path);
    }
    Ok(())
}

fn render_curves(result: &ExperimentResult, stride: usize) -> String {
    let mut out = String::from("t,metric,policy,mean,ci_low,ci_high\n");
    for curve in &result.curves {
        let horizon = curve.points.len();
        for point in &curve.points {
            if (point.t - 1) % stride != 0 && point.t != horizon {
                continue;
            }
            writeln!(
                out,
                "{},{},{},{},{},{}",
                point.t,
                curve.metric.as_str(),
                result.policy,
                point.mean,
                point.ci_low,
                point.ci_high
            )
            .expect("string write");
        }
    }
    out
}

fn render_episode(trace: &dosebandit::EpisodeTrace) -> String {
    let mut out = String::from(
        "t,chosen,true_bucket,reward,expected_regret,cumulative_regret,incorrect_fraction\n",
    );
    for s in &trace.steps {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.t,
            s.chosen.as_str(),
            s.true_bucket.as_str(),
            s.reward,
            s.expected_regret,
            s.cumulative_regret,
            s.incorrect_fraction
        )
        .expect("string write");
    }
    out
}

fn print_summary(result: &ExperimentResult, cfg: &ExperimentConfig, curve_path: &Path) {
    let incorrect = result.curve(Metric::IncorrectFraction).final_point();
    let regret = result.curve(Metric::CumulativeRegret).final_point();
    let correct = result.curve(Metric::FractionCorrect).final_point();
    let (Some(incorrect), Some(regret), Some(correct)) = (incorrect, regret, correct) else {
        println!(
            "summary policy={} reward={} runs={} patients=0 curve_csv={}",
            result.policy,
            cfg.reward.label().as_str(),
            cfg.n_runs,
            curve_path.display()
        );
        return;
    };
    println!(
        "summary policy={} reward={} runs={} patients={} \
         final_incorrect_mean={} final_incorrect_ci_low={} final_incorrect_ci_high={} \
         final_fraction_correct_mean={} final_cumulative_regret_mean={} \
         final_cumulative_regret_ci_low={} final_cumulative_regret_ci_high={} curve_csv={}",
        result.policy,
        cfg.reward.label().as_str(),
        cfg.n_runs,
        incorrect.t,
        incorrect.mean,
        incorrect.ci_low,
        incorrect.ci_high,
        correct.mean,
        regret.mean,
        regret.ci_low,
        regret.ci_high,
        curve_path.display()
    );
}
