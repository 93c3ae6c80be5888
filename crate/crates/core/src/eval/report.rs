use std::fmt::Write;

use serde::Serialize;

use super::calibration::{calibration_metrics, CalibrationBin};
use super::dca::{decision_curve, default_thresholds, NetBenefitPoint};
use super::pr::{precision_recall, PrPoint};
use super::roc::{auroc, Auroc, RocPoint};
use super::scored::ScoredSet;
use super::threshold::{youden_threshold, ThresholdMetrics};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub n: usize,
    pub positives: usize,
    pub prevalence: f64,
    pub auroc: Auroc,
    pub average_precision: f64,
    /// Operating point chosen by the Youden index.
    pub youden: ThresholdMetrics,
    pub brier: f64,
    pub ece_5: f64,
    pub ece_10: f64,
    pub calibration_bins: Vec<CalibrationBin>,
    pub net_benefit: Vec<NetBenefitPoint>,
}

pub fn metric_report(s: &ScoredSet) -> Result<MetricReport> {
    let c10 = calibration_metrics(s, 10)?;
    Ok(MetricReport {
        n: s.len(),
        positives: s.positives(),
        prevalence: s.prevalence(),
        auroc: auroc(s)?,
        average_precision: precision_recall(s)?.average_precision,
        youden: youden_threshold(s)?,
        brier: c10.brier,
        ece_5: calibration_metrics(s, 5)?.ece,
        ece_10: c10.ece,
        calibration_bins: c10.bins,
        net_benefit: decision_curve(s, &default_thresholds())?,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.4}"))
}

/// Tab-separated table, one metric per row and one model per column.
pub fn metric_table(models: &[(&str, &MetricReport)]) -> String {
    type Getter = fn(&MetricReport) -> Option<f64>;
    let rows: [(&str, Getter); 13] = [
        ("AUROC", |r| Some(r.auroc.value)),
        ("AUROC 95% CI lower", |r| Some(r.auroc.ci_lower)),
        ("AUROC 95% CI upper", |r| Some(r.auroc.ci_upper)),
        ("AP", |r| Some(r.average_precision)),
        ("Sensitivity", |r| Some(r.youden.sensitivity)),
        ("Specificity", |r| Some(r.youden.specificity)),
        ("PPV", |r| r.youden.ppv),
        ("NPV", |r| r.youden.npv),
        ("F1-Score", |r| r.youden.f1),
        ("Balanced ACC", |r| Some(r.youden.balanced_accuracy)),
        ("Brier Score", |r| Some(r.brier)),
        ("ECE (10 bins)", |r| Some(r.ece_10)),
        ("ECE (5 bins)", |r| Some(r.ece_5)),
    ];
    let mut out = String::from("Metric");
    for (name, _) in models {
        write!(out, "\t{name}").unwrap();
    }
    out.push('\n');
    for (label, get) in rows {
        out.push_str(label);
        for (_, r) in models {
            write!(out, "\t{}", cell(get(r))).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn roc_table(points: &[RocPoint]) -> String {
    let mut out = String::from("threshold\tfpr\ttpr\n");
    for p in points {
        writeln!(out, "{}\t{}\t{}", p.threshold, p.fpr, p.tpr).unwrap();
    }
    out
}

pub fn pr_table(points: &[PrPoint]) -> String {
    let mut out = String::from("threshold\tprecision\trecall\n");
    for p in points {
        writeln!(out, "{}\t{}\t{}", p.threshold, p.precision, p.recall).unwrap();
    }
    out
}

pub fn calibration_table(bins: &[CalibrationBin]) -> String {
    let mut out = String::from("lower\tupper\tcount\tmean_score\tevent_rate\n");
    for b in bins {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", b.lower, b.upper, b.count, b.mean_score, b.event_rate).unwrap();
    }
    out
}

pub fn decision_curve_table(points: &[NetBenefitPoint]) -> String {
    let mut out = String::from("threshold\tmodel\ttreat_all\ttreat_none\n");
    for p in points {
        writeln!(out, "{}\t{}\t{}\t{}", p.threshold, p.model, p.treat_all, p.treat_none).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_appendix_rows() {
        let s = ScoredSet::from_numeric(vec![0.9, 0.2, 0.6, 0.1, 0.4], &[1.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let r = metric_report(&s).unwrap();
        let t = metric_table(&[("A", &r), ("B", &r)]);
        let first: Vec<&str> = t.lines().map(|l| l.split('\t').next().unwrap()).collect();
        for name in ["AP", "Sensitivity", "Specificity", "PPV", "NPV", "F1-Score", "Balanced ACC", "Brier Score", "ECE (10 bins)", "ECE (5 bins)"] {
            assert!(first.contains(&name), "{name}");
        }
        assert!(t.starts_with("Metric\tA\tB\n"));
        assert!(t.contains("AUROC\t1.0000\t1.0000"));
    }
}
