use serde::Serialize;

use super::scored::ScoredSet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NetBenefitPoint {
    pub threshold: f64,
    pub model: f64,
    pub treat_all: f64,
    pub treat_none: f64,
}

/// 0.01, 0.02, …, 0.99
pub fn default_thresholds() -> Vec<f64> {
    (1..100).map(|k| k as f64 / 100.0).collect()
}

/// Net benefit `TP/n − FP/n · t/(1−t)` per threshold, calling scores `>= t`
/// positive, alongside the treat-all and treat-none references.
pub fn decision_curve(s: &ScoredSet, thresholds: &[f64]) -> Result<Vec<NetBenefitPoint>> {
    if s.is_empty() {
        return Err(Error::Empty("no scores".into()));
    }
    let n = s.len() as f64;
    let pi = s.prevalence();
    thresholds
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::domain(format!("threshold {t} outside (0, 1)")));
            }
            let odds = t / (1.0 - t);
            let (mut tp, mut fp) = (0usize, 0usize);
            for (&p, &y) in s.scores().iter().zip(s.labels()) {
                if p >= t {
                    if y {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
            }
            Ok(NetBenefitPoint {
                threshold: t,
                model: tp as f64 / n - fp as f64 / n * odds,
                treat_all: pi - (1.0 - pi) * odds,
                treat_none: 0.0,
            })
        })
        .collect()
}
