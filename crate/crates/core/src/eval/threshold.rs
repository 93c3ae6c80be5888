use serde::Serialize;

use super::scored::ScoredSet;
use crate::error::Result;

/// Confusion-matrix metrics with scores `>= threshold` called positive.
/// Ratios with an empty denominator are `None`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdMetrics {
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub sensitivity: f64,
    pub specificity: f64,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub f1: Option<f64>,
    pub balanced_accuracy: f64,
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

fn from_counts(threshold: f64, tp: usize, fp: usize, tn: usize, fn_: usize) -> ThresholdMetrics {
    let sensitivity = tp as f64 / (tp + fn_) as f64;
    let specificity = tn as f64 / (tn + fp) as f64;
    ThresholdMetrics {
        threshold,
        tp,
        fp,
        tn,
        fn_,
        sensitivity,
        specificity,
        ppv: ratio(tp, tp + fp),
        npv: ratio(tn, tn + fn_),
        f1: ratio(2 * tp, 2 * tp + fp + fn_),
        balanced_accuracy: (sensitivity + specificity) / 2.0,
    }
}

pub fn threshold_metrics(s: &ScoredSet, threshold: f64) -> Result<ThresholdMetrics> {
    s.require_both_classes("threshold metrics")?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&score, &y) in s.scores().iter().zip(s.labels()) {
        match (score >= threshold, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(from_counts(threshold, tp, fp, tn, fn_))
}

/// Threshold among the observed scores maximising sensitivity + specificity − 1.
/// Ties go to the lower threshold. The comparison is done on integer counts
/// (`tp·n + tn·m`), so ties are exact.
pub fn youden_threshold(s: &ScoredSet) -> Result<ThresholdMetrics> {
    s.require_both_classes("Youden threshold")?;
    let (m, n) = (s.positives(), s.negatives());
    let sorted = s.descending();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut best: Option<(usize, f64, usize, usize)> = None;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let score = tp * n + (n - fp) * m;
        // descending scan: `>=` moves ties to the lower threshold
        if best.is_none_or(|b| score >= b.0) {
            best = Some((score, t, tp, fp));
        }
    }
    let (_, t, tp, fp) = best.expect("non-empty set");
    Ok(from_counts(t, tp, fp, n - fp, m - tp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_scores() {
        let s = ScoredSet::from_numeric(vec![0.1, 0.2, 0.7, 0.8], &[0.0, 0.0, 1.0, 1.0]).unwrap();
        let y = youden_threshold(&s).unwrap();
        assert_eq!((y.sensitivity, y.specificity), (1.0, 1.0));
        assert_eq!(y.threshold, 0.7);
        assert_eq!(y.ppv, Some(1.0));
    }

    #[test]
    fn tie_goes_low() {
        // thresholds 0.8 and 0.4 both give J = 0.5
        let s = ScoredSet::from_numeric(vec![0.8, 0.6, 0.4, 0.2], &[1.0, 0.0, 1.0, 0.0]).unwrap();
        let y = youden_threshold(&s).unwrap();
        assert_eq!(y.threshold, 0.4);
        assert_eq!(y.sensitivity, 1.0);
    }

    #[test]
    fn empty_prediction_has_no_ppv() {
        let s = ScoredSet::from_numeric(vec![0.1, 0.2], &[0.0, 1.0]).unwrap();
        let m = threshold_metrics(&s, 0.5).unwrap();
        assert_eq!(m.ppv, None);
        assert_eq!(m.f1, Some(0.0));
        assert_eq!(m.npv, Some(0.5));
    }
}
