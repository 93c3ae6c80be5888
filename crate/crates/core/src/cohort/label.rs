use serde::{Deserialize, Serialize};

use super::codes::CodeTables;
use super::record::PatientRecord;
use crate::error::{Error, Result};
use crate::month::YearMonth;

/// Visits this many months (or fewer) before an event are dropped.
pub const LEAKAGE_WINDOW_MONTHS: i64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Horizon {
    TwoYears,
    FiveYears,
}

impl Horizon {
    pub fn years(self) -> u8 {
        match self {
            Horizon::TwoYears => 2,
            Horizon::FiveYears => 5,
        }
    }

    pub fn months(self) -> i64 {
        self.years() as i64 * 12
    }
}

impl TryFrom<u8> for Horizon {
    type Error = Error;
    fn try_from(years: u8) -> Result<Self> {
        match years {
            2 => Ok(Horizon::TwoYears),
            5 => Ok(Horizon::FiveYears),
            other => Err(Error::domain(format!("horizon must be 2 or 5 years, got {other}"))),
        }
    }
}

impl From<Horizon> for u8 {
    fn from(h: Horizon) -> u8 {
        h.years()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensorReason {
    Emigration,
    Death,
    HorizonReached,
    AdminEnd,
    LostFollowup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Outcome {
    KidneyFailure { date: YearMonth },
    Censored { date: YearMonth, reason: CensorReason },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeLabel {
    pub outcome: Outcome,
    pub horizon: Horizon,
}

impl OutcomeLabel {
    pub fn is_event(&self) -> bool {
        matches!(self.outcome, Outcome::KidneyFailure { .. })
    }

    pub fn event_date(&self) -> Option<YearMonth> {
        match self.outcome {
            Outcome::KidneyFailure { date } => Some(date),
            Outcome::Censored { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelConfig {
    pub horizon: Horizon,
    /// A dialysis claim is disregarded when an AKI claim falls within this
    /// many months of it (0 = same calendar month).
    pub aki_window_months: u32,
}

impl LabelConfig {
    pub fn new(horizon: Horizon) -> Self {
        Self {
            horizon,
            aki_window_months: 0,
        }
    }
}

/// Earliest kidney-replacement event, ignoring dialysis concurrent with AKI.
fn first_event(rec: &PatientRecord, tables: &CodeTables, window: u32) -> Option<YearMonth> {
    rec.claims
        .iter()
        .filter(|claim| {
            let t = tables.for_system(claim.system);
            if t.is_transplant(&claim.code) {
                return true;
            }
            if !t.is_dialysis(&claim.code) {
                return false;
            }
            let concurrent_aki = rec.claims.iter().any(|other| {
                other.system == claim.system
                    && t.is_aki(&other.code)
                    && other.month.months_since(claim.month).unsigned_abs() <= window as u64
            });
            !concurrent_aki
        })
        .map(|c| c.month)
        .min()
}

/// Ascertains the fixed-horizon outcome, measured from the first visit.
pub fn label_outcome(
    rec: &PatientRecord,
    tables: &CodeTables,
    config: &LabelConfig,
) -> Result<OutcomeLabel> {
    let index = rec
        .first_month()
        .or_else(|| rec.claims.iter().map(|c| c.month).min())
        .ok_or_else(|| Error::Empty(format!("record {} has no dated entries", rec.id)))?;
    let horizon_end = index.add_months(config.horizon.months());
    let outcome = match first_event(rec, tables, config.aki_window_months) {
        Some(date) if date <= horizon_end => Outcome::KidneyFailure { date },
        Some(_) => Outcome::Censored {
            date: horizon_end,
            reason: CensorReason::HorizonReached,
        },
        None => {
            let (end, default_reason) = match rec.followup_end {
                Some(end) => (end, CensorReason::AdminEnd),
                None => (rec.last_month().unwrap_or(index), CensorReason::LostFollowup),
            };
            if end >= horizon_end {
                Outcome::Censored {
                    date: horizon_end,
                    reason: CensorReason::HorizonReached,
                }
            } else {
                Outcome::Censored {
                    date: end,
                    reason: rec.censor_reason.unwrap_or(default_reason),
                }
            }
        }
    };
    Ok(OutcomeLabel {
        outcome,
        horizon: config.horizon,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlankedRecord {
    pub record: PatientRecord,
    /// No visits survived blanking; the patient cannot be scored.
    pub excluded: bool,
}

/// Drops every visit dated within the leakage window before the event (and
/// anything after it). Censored records pass through unchanged.
pub fn blank_pre_outcome(rec: &PatientRecord, label: &OutcomeLabel) -> BlankedRecord {
    let mut record = rec.clone();
    if let Some(event) = label.event_date() {
        record
            .visits
            .retain(|v| event.months_since(v.month) > LEAKAGE_WINDOW_MONTHS);
    }
    let excluded = record.visits.is_empty();
    BlankedRecord { record, excluded }
}
