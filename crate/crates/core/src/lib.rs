//! Dynamic kidney-failure risk engine.
//!
//! The crate covers the whole scoring and modelling pipeline for longitudinal
//! CKD lab data:
//!
//! - [`clinical`]: CKD-EPI eGFR and uACR conversions.
//! - [`preprocess`]: monthly bucketing, three-step imputation and feature
//!   sequences with per-step intervals.
//! - [`model`]: the time-aware LSTM forward pass, head, quantile calibration
//!   and the weight file format.
//! - [`kfre`]: static and dynamic Kidney Failure Risk Equations.
//! - [`train`]: BCE loss, reverse-mode gradients, Adam, reduce-on-plateau and
//!   a synthetic cohort generator.
//! - [`eval`]: AUROC with DeLong intervals and tests, PR, threshold metrics,
//!   calibration, decision curves, visit-wise and subgroup harnesses.
//! - [`cohort`]: template CSV parsing, outcome labelling, leakage blanking
//!   and patient-level splits.
//! - [`service`]: request/response types shared by the CLI and HTTP surfaces.
//!
//! Batch workloads take an [`Execution`] switch. With the `parallel` feature
//! (on by default) `Execution::Parallel` runs on rayon; without it every job
//! runs sequentially. Results are identical either way because reductions
//! happen in input order.

pub mod clinical;
pub mod cohort;
pub mod error;
pub mod eval;
pub mod kfre;
pub mod model;
pub mod month;
pub mod par;
pub mod preprocess;
pub mod service;
pub mod train;

pub use clinical::Sex;
pub use cohort::PatientRecord;
pub use error::{Error, Result};
pub use model::{ModelWeights, RiskPrediction};
pub use month::YearMonth;
pub use par::Execution;
pub use preprocess::FeatureSequence;
