//! Deterministic synthetic data for tests and the `synth` command.
//!
//! Two generators live here: [`generate_synthetic`] emits raw context
//! vectors with linear-model doses (the test oracle when no real dataset is
//! at hand), and [`generate_synthetic_records`] emits whole patient records
//! that round-trip through the table parser.

use super::{
    bucket_dose, DatasetError, DoseBucket, DrugStatus, FeatureVector, Gender, Genotype,
    PatientRecord, Race, TableSchema, FEATURE_DIM,
};
use crate::rng::SplitMix64;

/// Parameters for [`generate_synthetic`].
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub n: usize,
    pub seed: u64,
    /// Dose model: true weekly dose is `x · theta_dose` plus noise.
    pub theta_dose: Vec<f64>,
    pub noise_sd: f64,
}

impl SyntheticSpec {
    /// Dose model spreading doses over all three buckets for uniform
    /// contexts: `20·x₀ + 50·x₁` has mean 35 and range (0, 70).
    pub fn default_theta() -> Vec<f64> {
        let mut theta = vec![0.0; FEATURE_DIM];
        theta[0] = 20.0;
        theta[1] = 50.0;
        theta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub contexts: Vec<FeatureVector>,
    pub buckets: Vec<DoseBucket>,
    pub doses: Vec<f64>,
}

/// Draws `n` contexts uniformly from `[0, 1)^26` and doses from the linear
/// model; a pure function of its arguments.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData, DatasetError> {
    if spec.theta_dose.len() != FEATURE_DIM {
        return Err(DatasetError::ThetaLength {
            expected: FEATURE_DIM,
            actual: spec.theta_dose.len(),
        });
    }
    if spec.noise_sd < 0.0 || !spec.noise_sd.is_finite() {
        return Err(DatasetError::InvalidNoise(spec.noise_sd));
    }
    let mut rng = SplitMix64::new(spec.seed);
    let mut contexts = Vec::with_capacity(spec.n);
    let mut buckets = Vec::with_capacity(spec.n);
    let mut doses = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let values: Vec<f64> = (0..FEATURE_DIM).map(|_| rng.next_f64()).collect();
        let mut dose: f64 = values
            .iter()
            .zip(spec.theta_dose.iter())
            .map(|(x, t)| x * t)
            .sum();
        if spec.noise_sd > 0.0 {
            dose += spec.noise_sd * rng.next_gaussian();
        }
        let dose = dose.max(f64::MIN_POSITIVE);
        buckets.push(bucket_dose(dose)?);
        doses.push(dose);
        contexts.push(FeatureVector::new(values)?);
    }
    Ok(SyntheticData {
        contexts,
        buckets,
        doses,
    })
}

/// Generates whole patient records with realistic covariate ranges and a
/// sqrt-scale linear dose model. `noise_sd` perturbs the sqrt of the dose.
pub fn generate_synthetic_records(
    n: usize,
    seed: u64,
    noise_sd: f64,
) -> Result<Vec<PatientRecord>, DatasetError> {
    if noise_sd < 0.0 || !noise_sd.is_finite() {
        return Err(DatasetError::InvalidNoise(noise_sd));
    }
    let mut rng = SplitMix64::new(seed);
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let age = 1 + (rng.next_u64() % 9) as u8; // decades 1..=9
        let height = 145.0 + rng.next_f64() * 50.0;
        let weight = 45.0 + rng.next_f64() * 75.0;
        let race = match rng.next_u64() % 10 {
            0..=2 => Race::Asian,
            3..=4 => Race::BlackOrAfricanAmerican,
            5..=8 => Race::White,
            _ => Race::MixedOrMissing,
        };
        let gender = if rng.next_u64() % 2 == 0 {
            Gender::Male
        } else {
            Gender::Female
        };
        let amiodarone = match rng.next_u64() % 10 {
            0 => DrugStatus::Yes,
            9 => DrugStatus::Missing,
            _ => DrugStatus::No,
        };
        let enzyme_inducer = rng.next_u64() % 20 == 0;
        let vkorc1_genotype = random_genotype(&mut rng);
        let vkorc1_qc_genotype = random_genotype(&mut rng);

        // sqrt-dose linear model over the clinical covariates
        let mut sqrt_dose = 4.0 - 0.25 * f64::from(age) + 0.011 * height + 0.013 * weight;
        sqrt_dose += match race {
            Race::Asian => -0.7,
            Race::BlackOrAfricanAmerican => 0.4,
            Race::MixedOrMissing => 0.05,
            Race::White => 0.0,
        };
        sqrt_dose += match vkorc1_genotype {
            Genotype::AA => -1.0,
            Genotype::AG => -0.4,
            _ => 0.0,
        };
        if enzyme_inducer {
            sqrt_dose += 1.3;
        }
        if amiodarone == DrugStatus::Yes {
            sqrt_dose -= 0.6;
        }
        if noise_sd > 0.0 {
            sqrt_dose += noise_sd * rng.next_gaussian();
        }
        let sqrt_dose = sqrt_dose.max(0.1);

        records.push(PatientRecord {
            age_decades: Some(age),
            height_cm: Some(height),
            weight_kg: Some(weight),
            race,
            gender,
            amiodarone,
            enzyme_inducer,
            vkorc1_genotype,
            vkorc1_qc_genotype,
            therapeutic_dose_mg_week: sqrt_dose * sqrt_dose,
        });
    }
    Ok(records)
}

fn random_genotype(rng: &mut SplitMix64) -> Genotype {
    match rng.next_u64() % 10 {
        0..=2 => Genotype::AA,
        3..=5 => Genotype::AG,
        6..=8 => Genotype::GG,
        _ => Genotype::Missing,
    }
}

/// Writes records as a comma-delimited table using the given schema's column
/// names, so the output feeds straight back into [`super::parse_patient_table`].
/// A trailing `Dose Bucket` column carries the bucket for cross-checks; the
/// parser ignores it.
pub fn write_records_table(
    records: &[PatientRecord],
    schema: &TableSchema,
) -> Result<String, DatasetError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            schema.dose.as_str(),
            schema.age.as_str(),
            schema.height.as_str(),
            schema.weight.as_str(),
            schema.race.as_str(),
            schema.gender.as_str(),
            schema.amiodarone.as_str(),
            schema.carbamazepine.as_str(),
            schema.phenytoin.as_str(),
            schema.rifampin.as_str(),
            schema.vkorc1.as_str(),
            schema.vkorc1_qc.as_str(),
            "Dose Bucket",
        ])
        .expect("in-memory write");
    for r in records {
        let age = match r.age_decades {
            Some(9) => "90+".to_string(),
            Some(d) => format!("{}0 - {}9", d, d),
            None => String::new(),
        };
        let bucket = bucket_dose(r.therapeutic_dose_mg_week)?;
        writer
            .write_record([
                format!("{}", r.therapeutic_dose_mg_week),
                age,
                r.height_cm.map(|v| format!("{v}")).unwrap_or_default(),
                r.weight_kg.map(|v| format!("{v}")).unwrap_or_default(),
                match r.race {
                    Race::Asian => "Asian",
                    Race::BlackOrAfricanAmerican => "Black or African American",
                    Race::White => "White",
                    Race::MixedOrMissing => "Unknown",
                }
                .to_string(),
                match r.gender {
                    Gender::Male => "male",
                    Gender::Female => "female",
                    Gender::Missing => "",
                }
                .to_string(),
                drug_cell(r.amiodarone).to_string(),
                if r.enzyme_inducer { "1" } else { "0" }.to_string(),
                "0".to_string(),
                "0".to_string(),
                genotype_cell(r.vkorc1_genotype).to_string(),
                genotype_cell(r.vkorc1_qc_genotype).to_string(),
                bucket.as_str().to_string(),
            ])
            .expect("in-memory write");
    }
    let bytes = writer.into_inner().expect("in-memory flush");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn drug_cell(status: DrugStatus) -> &'static str {
    match status {
        DrugStatus::Yes => "1",
        DrugStatus::No => "0",
        DrugStatus::Missing => "",
    }
}

fn genotype_cell(g: Genotype) -> &'static str {
    match g {
        Genotype::AA => "A/A",
        Genotype::AG => "A/G",
        Genotype::GG => "G/G",
        Genotype::Missing => "",
    }
}
