//! Label, split, train and score a cohort in one call.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::trainer::{label_cohort, prepare_example, train, TrainConfig, TrainOutcome, TrainingExample};
use crate::cohort::{split_patients, CodeTables, Horizon, LabelConfig, PatientRecord, Split, SplitSubject};
use crate::error::Result;
use crate::eval::ScoredSet;
use crate::model::forward_and_head;
use crate::par;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub horizon: Horizon,
    /// Train/validation/test ratios.
    pub split: [f64; 3],
    pub split_seed: u64,
    pub train: TrainConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            horizon: Horizon::FiveYears,
            split: [0.6, 0.2, 0.2],
            split_seed: 0,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitReport {
    pub outcome: TrainOutcome,
    pub split: Split,
    /// Records left without visits after blanking.
    pub dropped: Vec<String>,
    /// Raw model scores on the test split.
    pub test: ScoredSet,
}

pub fn fit_cohort(records: &[PatientRecord], tables: &CodeTables, config: &FitConfig) -> Result<FitReport> {
    let (labelled, dropped) = label_cohort(records, tables, &LabelConfig::new(config.horizon))?;
    let subjects: Vec<SplitSubject> = labelled
        .iter()
        .map(|l| SplitSubject {
            id: l.record.id.clone(),
            event: l.label.is_event(),
            sex: l.record.sex,
            age: l.record.age,
        })
        .collect();
    let split = split_patients(&subjects, config.split, config.split_seed)?;
    let by_id: HashMap<&str, TrainingExample> = labelled
        .iter()
        .map(|l| {
            let y = if l.label.is_event() { 1.0 } else { 0.0 };
            prepare_example(&l.record, y).map(|e| (l.record.id.as_str(), e))
        })
        .collect::<Result<_>>()?;
    let pick = |ids: &[String]| -> Vec<TrainingExample> { ids.iter().map(|id| by_id[id.as_str()].clone()).collect() };
    let (train_set, validation, test_set) = (pick(&split.train), pick(&split.validation), pick(&split.test));

    let outcome = train(&train_set, &validation, &config.train)?;
    let w = &outcome.weights;
    let scores = par::map(config.train.execution, &test_set, |e| forward_and_head(&e.seq, e.age, e.sex, w))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let test = ScoredSet::new(scores, test_set.iter().map(|e| e.label == 1.0).collect())?;
    Ok(FitReport {
        outcome,
        split,
        dropped,
        test,
    })
}
