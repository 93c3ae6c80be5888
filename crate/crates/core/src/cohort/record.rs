use serde::{Deserialize, Serialize};

use super::label::CensorReason;
use crate::clinical::Sex;
use crate::month::YearMonth;
use crate::preprocess::LabVisit;

/// Which regional edition of the ICD-10 code tables a claim was coded in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeSystem {
    National,
    Beijing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimEvent {
    pub month: YearMonth,
    pub code: String,
    pub system: CodeSystem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: String,
    /// Age in years at the first visit.
    pub age: f64,
    pub sex: Sex,
    pub visits: Vec<LabVisit>,
    #[serde(default)]
    pub claims: Vec<ClaimEvent>,
    /// Last month of follow-up, when known.
    #[serde(default)]
    pub followup_end: Option<YearMonth>,
    /// Explicit reason follow-up ended (emigration, death, ...), when known.
    #[serde(default)]
    pub censor_reason: Option<CensorReason>,
}

impl PatientRecord {
    pub fn new(id: impl Into<String>, age: f64, sex: Sex, mut visits: Vec<LabVisit>) -> Self {
        visits.sort_by_key(|v| v.month);
        Self {
            id: id.into(),
            age,
            sex,
            visits,
            claims: Vec::new(),
            followup_end: None,
            censor_reason: None,
        }
    }

    pub fn first_month(&self) -> Option<YearMonth> {
        self.visits.iter().map(|v| v.month).min()
    }

    /// Latest month seen in visits, claims or the explicit follow-up end.
    pub fn last_month(&self) -> Option<YearMonth> {
        self.visits
            .iter()
            .map(|v| v.month)
            .chain(self.claims.iter().map(|c| c.month))
            .chain(self.followup_end)
            .max()
    }

    /// Record restricted to visits in its first `k` distinct months.
    pub fn first_visit_months(&self, k: usize) -> PatientRecord {
        let mut months: Vec<YearMonth> = self.visits.iter().map(|v| v.month).collect();
        months.sort();
        months.dedup();
        let mut out = self.clone();
        if let Some(&cutoff) = months.get(k.saturating_sub(1)) {
            out.visits.retain(|v| v.month <= cutoff);
        }
        out
    }

    /// Number of distinct visit months.
    pub fn visit_months(&self) -> usize {
        let mut months: Vec<YearMonth> = self.visits.iter().map(|v| v.month).collect();
        months.sort();
        months.dedup();
        months.len()
    }
}
