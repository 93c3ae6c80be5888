use serde::Serialize;

use super::scored::ScoredSet;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrCurve {
    /// Σ (R_k − R_{k−1})·P_k over descending distinct thresholds.
    pub average_precision: f64,
    pub points: Vec<PrPoint>,
}

pub fn precision_recall(s: &ScoredSet) -> Result<PrCurve> {
    s.require_both_classes("average precision")?;
    let m = s.positives() as f64;
    let sorted = s.descending();
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut points = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            tp += usize::from(sorted[i].1);
            seen += 1;
            i += 1;
        }
        let precision = tp as f64 / seen as f64;
        let recall = tp as f64 / m;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push(PrPoint {
            threshold: t,
            precision,
            recall,
        });
    }
    Ok(PrCurve {
        average_precision: ap,
        points,
    })
}
