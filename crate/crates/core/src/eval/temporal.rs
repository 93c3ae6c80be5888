//! Visit-wise evaluation: score every patient on their first k visits and
//! track how discrimination changes with k.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::roc::{auroc, midranks};
use super::scored::ScoredSet;
use super::scorer::RiskScorer;
use crate::cohort::{Horizon, PatientRecord, LEAKAGE_WINDOW_MONTHS};
use crate::error::{Error, Result};
use crate::month::YearMonth;
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Spearman {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Spearman rank correlation with a two-sided t-approximation p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Spearman> {
    if x.len() != y.len() {
        return Err(Error::domain("spearman needs equal-length inputs"));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::UndefinedMetric(format!("spearman needs at least 3 points, got {n}")));
    }
    let (rx, ry) = (midranks(x), midranks(y));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric("spearman of a constant series".into()));
    }
    let rho = sxy / (sxx * syy).sqrt();
    let df = (n - 2) as f64;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok(Spearman { rho, p_value, n })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VisitAuroc {
    pub k: usize,
    pub patients: usize,
    pub events: usize,
    /// `None` when only one class is present at this k.
    pub auroc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisitwiseReport {
    pub horizon: Horizon,
    pub points: Vec<VisitAuroc>,
    /// Spearman trend of AUROC against k over the defined points.
    pub trend: Option<Spearman>,
}

/// Visits dated more than the leakage window before the event.
fn eligible(record: &PatientRecord, event: Option<YearMonth>) -> PatientRecord {
    let mut r = record.clone();
    if let Some(e) = event {
        r.visits.retain(|v| e.months_since(v.month) > LEAKAGE_WINDOW_MONTHS);
    }
    r
}

/// For k = 1..=max_visits, scores each patient with at least k eligible visit
/// months on those first k months. A patient counts as positive at k when the
/// event falls within the horizon of their k-th visit.
pub fn visitwise_eval<S: RiskScorer>(
    scorer: &S,
    records: &[PatientRecord],
    events: &[Option<YearMonth>],
    horizon: Horizon,
    max_visits: usize,
    exec: Execution,
) -> Result<VisitwiseReport> {
    if records.len() != events.len() {
        return Err(Error::domain("one event entry per record is required"));
    }
    let pool: Vec<(PatientRecord, Option<YearMonth>)> = records
        .iter()
        .zip(events)
        .map(|(r, &e)| (eligible(r, e), e))
        .collect();
    let mut points = Vec::with_capacity(max_visits);
    for k in 1..=max_visits {
        let cohort: Vec<(PatientRecord, bool)> = pool
            .iter()
            .filter(|(r, _)| r.visit_months() >= k)
            .map(|(r, e)| {
                let truncated = r.first_visit_months(k);
                let kth = truncated.visits.iter().map(|v| v.month).max().expect("k >= 1 visits");
                let label = e.is_some_and(|e| e.months_since(kth) <= horizon.months());
                (truncated, label)
            })
            .collect();
        let scores = par::map(exec, &cohort, |(r, _)| scorer.score(r))
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
        let labels: Vec<bool> = cohort.iter().map(|c| c.1).collect();
        let events = labels.iter().filter(|&&y| y).count();
        let set = ScoredSet::new(scores, labels)?;
        let value = match auroc(&set) {
            Ok(a) => Some(a.value),
            Err(Error::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        };
        points.push(VisitAuroc {
            k,
            patients: set.len(),
            events,
            auroc: value,
        });
    }
    let (ks, aucs): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter_map(|p| p.auroc.map(|a| (p.k as f64, a)))
        .unzip();
    Ok(VisitwiseReport {
        horizon,
        points,
        trend: spearman(&ks, &aucs).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_reference_values() {
        let s = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((s.rho - 0.8).abs() < 1e-15);
        // two-sided p for t = 0.8·√(3/0.36) with 3 df
        assert!((s.p_value - 0.10408803866182788).abs() < 1e-9, "{}", s.p_value);
        let s = spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!((s.rho, s.p_value), (-1.0, 0.0));
        assert!(spearman(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }
}
