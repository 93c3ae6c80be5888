//! Request and response types shared by the CLI and the HTTP service, and the
//! single scoring path both go through.

use serde::{Deserialize, Serialize};

use crate::clinical::Sex;
use crate::cohort::{parse_cohort_csv, PatientRecord};
use crate::error::Error;
use crate::model::{predict, ModelWeights};
use crate::month::YearMonth;
use crate::preprocess::{Lab, LabVisit, NUM_LABS};

/// Shown when a visit has no lab values at all.
pub const EMPTY_VISIT_MESSAGE: &str = "You must fill in at least one of the six indicators";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisitInput {
    /// `YYYYMM`
    pub date: String,
    pub egfr: Option<f64>,
    pub albumin: Option<f64>,
    pub ca: Option<f64>,
    pub ph: Option<f64>,
    pub uacr: Option<f64>,
    pub hco3: Option<f64>,
}

impl VisitInput {
    fn labs(&self) -> [Option<f64>; NUM_LABS] {
        let mut v = [None; NUM_LABS];
        v[Lab::Egfr.index()] = self.egfr;
        v[Lab::Albumin.index()] = self.albumin;
        v[Lab::Calcium.index()] = self.ca;
        v[Lab::Phosphate.index()] = self.ph;
        v[Lab::Uacr.index()] = self.uacr;
        v[Lab::Bicarbonate.index()] = self.hco3;
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub age: f64,
    /// 1 = male, 2 = female
    pub gender: u8,
    pub visits: Vec<VisitInput>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    /// Path into the request, e.g. `visits[2].egfr`.
    pub field: String,
    pub message: String,
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> FieldError {
    FieldError {
        field: field.into(),
        message: message.into(),
    }
}

impl PredictRequest {
    /// Checks every field and collects all problems, or builds the record.
    pub fn validate(&self) -> Result<PatientRecord, Vec<FieldError>> {
        let mut errors = Vec::new();
        if !(self.age.is_finite() && self.age > 0.0 && self.age <= 130.0) {
            errors.push(field_error("age", "must be a number of years in (0, 130]"));
        }
        let sex = Sex::from_code(self.gender).ok();
        if sex.is_none() {
            errors.push(field_error("gender", "must be 1 (male) or 2 (female)"));
        }
        if self.visits.is_empty() {
            errors.push(field_error("visits", "at least one visit is required"));
        }
        let mut visits = Vec::with_capacity(self.visits.len());
        for (i, v) in self.visits.iter().enumerate() {
            let month = parse_date(&v.date);
            if month.is_none() {
                errors.push(field_error(format!("visits[{i}].date"), "must be a month in YYYYMM form"));
            }
            let labs = v.labs();
            for lab in Lab::ALL {
                if let Some(x) = labs[lab.index()] {
                    if !(x.is_finite() && x >= 0.0) {
                        errors.push(field_error(
                            format!("visits[{i}].{}", lab.key()),
                            "must be a non-negative number",
                        ));
                    }
                }
            }
            if labs.iter().all(Option::is_none) {
                errors.push(field_error(format!("visits[{i}]"), EMPTY_VISIT_MESSAGE));
            }
            if let Some(m) = month {
                visits.push(LabVisit::new(m, labs));
            }
        }
        match sex {
            Some(sex) if errors.is_empty() => Ok(PatientRecord::new("request", self.age, sex, visits)),
            _ => Err(errors),
        }
    }

    pub fn from_record(record: &PatientRecord) -> Self {
        let visits = record
            .visits
            .iter()
            .map(|v| VisitInput {
                date: v.month.compact(),
                egfr: v.get(Lab::Egfr),
                albumin: v.get(Lab::Albumin),
                ca: v.get(Lab::Calcium),
                ph: v.get(Lab::Phosphate),
                uacr: v.get(Lab::Uacr),
                hco3: v.get(Lab::Bicarbonate),
            })
            .collect();
        Self {
            age: record.age,
            gender: record.sex.code(),
            visits,
        }
    }
}

fn parse_date(s: &str) -> Option<YearMonth> {
    if s.len() != 6 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub date: YearMonth,
    pub raw: f64,
    pub calibrated: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub raw: f64,
    pub calibrated: f64,
    pub interpretation: String,
    pub trajectory: Vec<TrajectoryEntry>,
}

pub fn interpretation(calibrated: f64) -> String {
    format!(
        "The patient has a higher risk of kidney failure than {:.1}% of the population",
        calibrated * 100.0
    )
}

/// Errors a scoring request can end in.
#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("request failed validation")]
    Validation(Vec<FieldError>),
    #[error(transparent)]
    Engine(#[from] Error),
}

impl ServiceError {
    pub fn field_errors(&self) -> Vec<FieldError> {
        match self {
            ServiceError::Validation(errs) => errs.clone(),
            ServiceError::Engine(Error::Parse { line, column, message }) => {
                vec![field_error(format!("line {line}, column {column}"), message.clone())]
            }
            ServiceError::Engine(e) => vec![field_error("", e.to_string())],
        }
    }
}

/// The scoring path used by every surface.
pub fn score_record(record: &PatientRecord, weights: &ModelWeights) -> Result<PredictResponse, ServiceError> {
    let p = predict(record, weights)?;
    Ok(PredictResponse {
        raw: p.raw,
        calibrated: p.calibrated,
        interpretation: interpretation(p.calibrated),
        trajectory: p
            .trajectory
            .into_iter()
            .map(|t| TrajectoryEntry {
                date: t.month,
                raw: t.raw,
                calibrated: t.calibrated,
            })
            .collect(),
    })
}

pub fn score_request(req: &PredictRequest, weights: &ModelWeights) -> Result<PredictResponse, ServiceError> {
    let record = req.validate().map_err(ServiceError::Validation)?;
    score_record(&record, weights)
}

/// Scores a one-patient template CSV.
pub fn score_csv(bytes: &[u8], weights: &ModelWeights) -> Result<PredictResponse, ServiceError> {
    let records = parse_cohort_csv(bytes)?;
    match records.as_slice() {
        [record] => score_record(record, weights),
        _ => Err(ServiceError::Validation(vec![field_error(
            "file",
            format!("expected exactly one patient, found {}", records.len()),
        )])),
    }
}
