use crate::cohort::PatientRecord;
use crate::error::{Error, Result};
use crate::kfre::{dynamic_kfre, KfreVariant};
use crate::model::{forward_and_head, ModelWeights};
use crate::preprocess::preprocess_visits;

/// Anything that maps a (possibly truncated) patient history to a risk.
pub trait RiskScorer: Sync {
    fn score(&self, record: &PatientRecord) -> Result<f64>;
}

/// Raw model probability on the full imputed history.
impl RiskScorer for ModelWeights {
    fn score(&self, record: &PatientRecord) -> Result<f64> {
        let seq = preprocess_visits(&record.visits, record.age, record.sex)?;
        forward_and_head(&seq, record.age, record.sex, self)
    }
}

/// Dynamic KFRE at the record's last visit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KfreScorer(pub KfreVariant);

impl RiskScorer for KfreScorer {
    fn score(&self, record: &PatientRecord) -> Result<f64> {
        let last = record
            .visits
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::Empty(format!("record {} has no visits", record.id)))?;
        dynamic_kfre(record, last, self.0).map(|d| d.risk)
    }
}
