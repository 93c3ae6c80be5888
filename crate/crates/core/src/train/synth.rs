//! Seeded synthetic cohorts for desk-scale training and evaluation runs.
//!
//! Positives start slightly worse and deteriorate towards a dialysis claim a
//! few months after their last visit. Negatives hover around their baseline.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clinical::Sex;
use crate::cohort::{ClaimEvent, CodeSystem, PatientRecord};
use crate::error::{Error, Result};
use crate::month::YearMonth;
use crate::preprocess::{LabValues, LabVisit, NUM_LABS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortSpec {
    pub n: usize,
    pub prevalence: f64,
    pub min_visits: usize,
    pub max_visits: usize,
    pub max_gap_months: i64,
    /// Per-lab probability that a value is missing at a visit, in the order
    /// egfr, albumin, ca, ph, uacr, hco3.
    pub missingness: [f64; NUM_LABS],
    /// Mean eGFR loss per month among positives.
    pub decline_per_month: f64,
    /// How much lower the positives' baseline eGFR is.
    pub baseline_gap: f64,
    /// Share of positives that fail without a preceding decline, drawn like
    /// negatives.
    pub sudden_fraction: f64,
    pub start: YearMonth,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            prevalence: 0.06,
            min_visits: 2,
            max_visits: 18,
            max_gap_months: 4,
            missingness: [0.05, 0.3, 0.3, 0.3, 0.35, 0.4],
            decline_per_month: 0.9,
            baseline_gap: 10.0,
            sudden_fraction: 0.02,
            start: YearMonth::new(2010, 1).expect("valid month"),
        }
    }
}

impl CohortSpec {
    fn validate(&self) -> Result<()> {
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(Error::Config(format!("prevalence must be in (0, 1), got {}", self.prevalence)));
        }
        if self.min_visits == 0 || self.min_visits > self.max_visits {
            return Err(Error::Config("visit range must satisfy 1 <= min <= max".into()));
        }
        if !(0.0..=1.0).contains(&self.sudden_fraction) {
            return Err(Error::Config("sudden_fraction must lie in [0, 1]".into()));
        }
        if self.max_gap_months < 1 {
            return Err(Error::Config("max_gap_months must be at least 1".into()));
        }
        if self.missingness.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::Config("missingness rates must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCohort {
    pub records: Vec<PatientRecord>,
    /// Kidney-failure month for positives.
    pub event_months: Vec<Option<YearMonth>>,
}

impl SyntheticCohort {
    pub fn labels(&self) -> Vec<f64> {
        self.event_months
            .iter()
            .map(|e| if e.is_some() { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn num_events(&self) -> usize {
        self.event_months.iter().filter(|e| e.is_some()).count()
    }
}

/// Dialysis claim attached to positives.
const EVENT_CODE: &str = "Z49.201";

pub fn generate_synthetic_cohort(spec: &CohortSpec, seed: u64) -> Result<SyntheticCohort> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positives = (spec.n as f64 * spec.prevalence).round() as usize;
    let mut is_event: Vec<bool> = (0..spec.n).map(|i| i < positives).collect();
    is_event.shuffle(&mut rng);

    let mut records = Vec::with_capacity(spec.n);
    let mut event_months = Vec::with_capacity(spec.n);
    for (i, &event) in is_event.iter().enumerate() {
        let (record, month) = patient(spec, event, format!("S{:05}", i + 1), &mut rng);
        records.push(record);
        event_months.push(month);
    }
    Ok(SyntheticCohort {
        records,
        event_months,
    })
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("finite parameters").sample(rng)
}

fn patient(
    spec: &CohortSpec,
    event: bool,
    id: String,
    rng: &mut ChaCha8Rng,
) -> (PatientRecord, Option<YearMonth>) {
    let age = normal(rng, 63.0, 13.0).clamp(18.0, 95.0).round();
    let sex = if rng.random_bool(0.5) { Sex::Male } else { Sex::Female };
    let visits = rng.random_range(spec.min_visits..=spec.max_visits);
    let first = spec.start.add_months(rng.random_range(0..24));

    let progressive = event && rng.random::<f64>() >= spec.sudden_fraction;
    let egfr0 = normal(rng, 47.0 - if progressive { spec.baseline_gap } else { 0.0 }, 9.0).max(8.0);
    let log_uacr0 = if progressive { normal(rng, 5.0, 1.0) } else { normal(rng, 4.2, 1.1) };
    // progressors decline at individual speeds; everyone else drifts a little
    let speed = if progressive { rng.random_range(0.6..1.4) } else { 0.0 };
    let drift = if progressive { 0.0 } else { normal(rng, 0.0, 0.03) };

    let mut month = first;
    let mut rows = Vec::with_capacity(visits);
    for v in 0..visits {
        if v > 0 {
            month = month.add_months(rng.random_range(1..=spec.max_gap_months));
        }
        let t = month.months_since(first) as f64;
        let progress = speed * t;
        let means = [
            (egfr0 - spec.decline_per_month * progress + drift * t, 3.0),
            (40.0 - 0.05 * progress, 2.5),
            (2.3 - 0.002 * progress, 0.1),
            (1.2 + 0.01 * progress, 0.15),
            (log_uacr0 + 0.05 * progress, 0.4),
            (24.5 - 0.04 * progress, 2.0),
        ];
        let mut values: LabValues = [None; NUM_LABS];
        for (k, &(mean, sd)) in means.iter().enumerate() {
            if rng.random::<f64>() >= spec.missingness[k] {
                values[k] = Some(normal(rng, mean, sd));
            }
        }
        values[0] = values[0].map(|e| e.max(4.0));
        values[4] = values[4].map(f64::exp);
        values[5] = values[5].map(|h| h.max(8.0));
        values[1] = values[1].map(|a| a.max(15.0));
        values[2] = values[2].map(|c| c.max(1.2));
        values[3] = values[3].map(|p| p.max(0.3));
        if values.iter().all(Option::is_none) {
            values[0] = Some(normal(rng, means[0].0, 3.0).max(4.0));
        }
        rows.push(LabVisit::new(month, values));
    }

    let mut record = PatientRecord::new(id, age, sex, rows);
    let event_month = if event {
        let m = month.add_months(rng.random_range(4..=9));
        record.claims.push(ClaimEvent {
            month: m,
            code: EVENT_CODE.into(),
            system: CodeSystem::National,
        });
        record.followup_end = Some(m);
        Some(m)
    } else {
        record.followup_end = Some(month.add_months(rng.random_range(6..=72)));
        None
    };
    (record, event_month)
}
