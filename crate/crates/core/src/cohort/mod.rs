//! Cohort ingestion: template CSV parsing, outcome ascertainment from claims,
//! leakage blanking and patient-level splits.

mod codes;
mod label;
mod record;
mod split;
mod template;

pub use codes::{CodeSet, CodeSystemTables, CodeTables};
pub use label::{
    blank_pre_outcome, label_outcome, BlankedRecord, CensorReason, Horizon, LabelConfig, Outcome,
    OutcomeLabel, LEAKAGE_WINDOW_MONTHS,
};
pub use record::{ClaimEvent, CodeSystem, PatientRecord};
pub use split::{age_band, kfold, split_patients, AgeBand, Split, SplitSubject};
pub use template::{parse_cohort_csv, write_template_csv, TEMPLATE_HEADER};
