//! Discrimination, calibration and decision-analytic metrics, plus the
//! visit-wise and subgroup harnesses.

mod calibration;
mod dca;
mod pr;
mod report;
mod roc;
mod scored;
mod scorer;
mod subgroup;
mod temporal;
mod threshold;

pub use calibration::{calibration_metrics, Calibration, CalibrationBin};
pub use dca::{decision_curve, default_thresholds, NetBenefitPoint};
pub use pr::{precision_recall, PrCurve, PrPoint};
pub use report::{
    calibration_table, decision_curve_table, metric_report, metric_table, pr_table, roc_table,
    MetricReport,
};
pub use roc::{
    auroc, bootstrap_auroc_variance, bootstrap_difference, delong_test, midranks, roc_curve,
    Auroc, BootstrapDifference, DelongTest, RocPoint, Z_95,
};
pub use scored::ScoredSet;
pub use scorer::{KfreScorer, RiskScorer};
pub use subgroup::{subgroup_eval, GroupResult, PairwiseDelong, SubgroupReport};
pub use temporal::{spearman, visitwise_eval, Spearman, VisitAuroc, VisitwiseReport};
pub use threshold::{threshold_metrics, youden_threshold, ThresholdMetrics};
