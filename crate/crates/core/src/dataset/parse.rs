//! Delimited patient-table ingestion.
//!
//! Accepts comma- or tab-separated text (auto-detected from the header line)
//! with a named header row. A [`TableSchema`] maps logical fields to column
//! names so any PharmGKB export dialect can be adapted from config. Rows
//! without a parseable positive therapeutic dose are dropped and counted;
//! every other row is retained with missing covariates flagged.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DatasetError, DrugStatus, Gender, Genotype, PatientRecord, Race};

/// Height/weight values outside these bounds are treated as missing.
const HEIGHT_RANGE_CM: (f64, f64) = (50.0, 300.0);
const WEIGHT_RANGE_KG: (f64, f64) = (20.0, 400.0);

/// Logical-field → column-name map. Defaults follow the PharmGKB export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TableSchema {
    pub dose: String,
    pub age: String,
    pub height: String,
    pub weight: String,
    pub race: String,
    pub gender: String,
    pub amiodarone: String,
    pub carbamazepine: String,
    pub phenytoin: String,
    pub rifampin: String,
    pub vkorc1: String,
    pub vkorc1_qc: String,
}

impl Default for TableSchema {
    fn default() -> Self {
        Self {
            dose: "Therapeutic Dose of Warfarin".into(),
            age: "Age".into(),
            height: "Height (cm)".into(),
            weight: "Weight (kg)".into(),
            race: "Race".into(),
            gender: "Gender".into(),
            amiodarone: "Amiodarone (Cordarone)".into(),
            carbamazepine: "Carbamazepine (Tegretol)".into(),
            phenytoin: "Phenytoin (Dilantin)".into(),
            rifampin: "Rifampin or Rifampicin".into(),
            vkorc1: "VKORC1 genotype: -1639 G>A (3673); chr16:31015190; rs9923231; C/T".into(),
            vkorc1_qc: "VKORC1 QC genotype: -1639 G>A (3673); chr16:31015190; rs9923231; C/T"
                .into(),
        }
    }
}

/// Ingestion counters: rows read, retained, dropped, and per-column
/// missingness over retained rows.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub retained: usize,
    pub dropped_missing_dose: usize,
    pub missing_by_column: BTreeMap<String, usize>,
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows_read={}", self.rows_read)?;
        writeln!(f, "retained={}", self.retained)?;
        writeln!(f, "dropped_missing_dose={}", self.dropped_missing_dose)?;
        for (column, count) in &self.missing_by_column {
            writeln!(f, "missing.{column}={count}")?;
        }
        Ok(())
    }
}

struct ColumnIndex {
    dose: usize,
    age: usize,
    height: usize,
    weight: usize,
    race: usize,
    gender: usize,
    amiodarone: usize,
    carbamazepine: usize,
    phenytoin: usize,
    rifampin: usize,
    vkorc1: usize,
    vkorc1_qc: usize,
}

fn find_column(
    header: &[String],
    field: &'static str,
    name: &str,
) -> Result<usize, DatasetError> {
    header
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name.trim()))
        .ok_or_else(|| DatasetError::MissingColumn {
            field,
            column: name.to_string(),
        })
}

impl ColumnIndex {
    fn resolve(header: &[String], schema: &TableSchema) -> Result<Self, DatasetError> {
        Ok(Self {
            dose: find_column(header, "dose", &schema.dose)?,
            age: find_column(header, "age", &schema.age)?,
            height: find_column(header, "height", &schema.height)?,
            weight: find_column(header, "weight", &schema.weight)?,
            race: find_column(header, "race", &schema.race)?,
            gender: find_column(header, "gender", &schema.gender)?,
            amiodarone: find_column(header, "amiodarone", &schema.amiodarone)?,
            carbamazepine: find_column(header, "carbamazepine", &schema.carbamazepine)?,
            phenytoin: find_column(header, "phenytoin", &schema.phenytoin)?,
            rifampin: find_column(header, "rifampin", &schema.rifampin)?,
            vkorc1: find_column(header, "vkorc1", &schema.vkorc1)?,
            vkorc1_qc: find_column(header, "vkorc1_qc", &schema.vkorc1_qc)?,
        })
    }
}

/// Parses a delimited patient table into records plus an ingest report.
pub fn parse_patient_table(
    text: &str,
    schema: &TableSchema,
) -> Result<(Vec<PatientRecord>, IngestReport), DatasetError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let delimiter = detect_delimiter(text);

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(text.as_bytes());

    let header: Vec<String> = reader
        .headers()
        .map_err(|_| DatasetError::MissingColumn {
            field: "header",
            column: "<unreadable header>".into(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let columns = ColumnIndex::resolve(&header, schema)?;

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for column in [
        "age", "height", "weight", "race", "gender", "amiodarone", "enzyme_inducer", "vkorc1",
        "vkorc1_qc",
    ] {
        report.missing_by_column.insert(column.to_string(), 0);
    }

    for row in reader.records() {
        let Ok(row) = row else {
            // malformed line: counts as read but yields no dose
            report.rows_read += 1;
            report.dropped_missing_dose += 1;
            continue;
        };
        report.rows_read += 1;

        let cell = |idx: usize| row.get(idx).map(str::trim).unwrap_or("");

        let dose = match cell(columns.dose).parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => v,
            _ => {
                report.dropped_missing_dose += 1;
                continue;
            }
        };

        let age_decades = parse_age_decades(cell(columns.age));
        let height_cm = parse_bounded(cell(columns.height), HEIGHT_RANGE_CM);
        let weight_kg = parse_bounded(cell(columns.weight), WEIGHT_RANGE_KG);
        let race = parse_race(cell(columns.race));
        let gender = parse_gender(cell(columns.gender));
        let amiodarone = parse_drug(cell(columns.amiodarone));
        // blank inducer cells count as not taking
        let enzyme_inducer = [columns.carbamazepine, columns.phenytoin, columns.rifampin]
            .iter()
            .any(|&idx| parse_drug(cell(idx)) == DrugStatus::Yes);
        let inducer_missing = [columns.carbamazepine, columns.phenytoin, columns.rifampin]
            .iter()
            .all(|&idx| parse_drug(cell(idx)) == DrugStatus::Missing);
        let vkorc1_genotype = parse_genotype(cell(columns.vkorc1));
        let vkorc1_qc_genotype = parse_genotype(cell(columns.vkorc1_qc));

        let mut bump = |column: &str| {
            *report.missing_by_column.get_mut(column).unwrap() += 1;
        };
        if age_decades.is_none() {
            bump("age");
        }
        if height_cm.is_none() {
            bump("height");
        }
        if weight_kg.is_none() {
            bump("weight");
        }
        if is_missing_race(cell(columns.race)) {
            bump("race");
        }
        if gender == Gender::Missing {
            bump("gender");
        }
        if amiodarone == DrugStatus::Missing {
            bump("amiodarone");
        }
        if inducer_missing {
            bump("enzyme_inducer");
        }
        if vkorc1_genotype == Genotype::Missing {
            bump("vkorc1");
        }
        if vkorc1_qc_genotype == Genotype::Missing {
            bump("vkorc1_qc");
        }

        records.push(PatientRecord {
            age_decades,
            height_cm,
            weight_kg,
            race,
            gender,
            amiodarone,
            enzyme_inducer,
            vkorc1_genotype,
            vkorc1_qc_genotype,
            therapeutic_dose_mg_week: dose,
        });
    }

    report.retained = records.len();
    Ok((records, report))
}

fn detect_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

/// Ages arrive either as decade ranges ("50 - 59", "90+") or plain years.
fn parse_age_decades(cell: &str) -> Option<u8> {
    if cell.is_empty() {
        return None;
    }
    let lead: String = cell
        .chars()
        .take_while(|c| c.is_ascii_digit())
        .collect();
    let years: u32 = lead.parse().ok()?;
    let decade = years / 10;
    (decade <= 15).then_some(decade as u8)
}

fn parse_bounded(cell: &str, (lo, hi): (f64, f64)) -> Option<f64> {
    let v: f64 = cell.parse().ok()?;
    (v > lo && v < hi).then_some(v)
}

fn is_missing_race(cell: &str) -> bool {
    let c = cell.trim().to_ascii_lowercase();
    c.is_empty() || c.contains("unknown") || c == "na"
}

fn parse_race(cell: &str) -> Race {
    let c = cell.to_ascii_lowercase();
    if c.contains("asian") {
        Race::Asian
    } else if c.contains("black") || c.contains("african") {
        Race::BlackOrAfricanAmerican
    } else if c.contains("white") || c.contains("caucasian") {
        Race::White
    } else {
        Race::MixedOrMissing
    }
}

fn parse_gender(cell: &str) -> Gender {
    match cell.to_ascii_lowercase().as_str() {
        "male" | "m" => Gender::Male,
        "female" | "f" => Gender::Female,
        _ => Gender::Missing,
    }
}

fn parse_drug(cell: &str) -> DrugStatus {
    match cell {
        "1" | "1.0" => DrugStatus::Yes,
        "0" | "0.0" => DrugStatus::No,
        _ => DrugStatus::Missing,
    }
}

fn parse_genotype(cell: &str) -> Genotype {
    match cell.to_ascii_uppercase().replace('/', "").as_str() {
        "AA" => Genotype::AA,
        "AG" | "GA" => Genotype::AG,
        "GG" => Genotype::GG,
        _ => Genotype::Missing,
    }
}
