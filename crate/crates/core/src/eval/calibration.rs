use serde::Serialize;

use super::scored::ScoredSet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_score: f64,
    pub event_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub brier: f64,
    pub ece: f64,
    /// Occupied bins only.
    pub bins: Vec<CalibrationBin>,
}

/// Brier score and expected calibration error over `bins` equal-width bins on
/// [0, 1]. A score of exactly 1 falls in the last bin.
pub fn calibration_metrics(s: &ScoredSet, bins: usize) -> Result<Calibration> {
    if bins == 0 {
        return Err(Error::domain("bin count must be positive"));
    }
    if s.is_empty() {
        return Err(Error::Empty("no scores to calibrate".into()));
    }
    s.require_probabilities()?;
    let n = s.len() as f64;
    let mut count = vec![0usize; bins];
    let mut score_sum = vec![0.0; bins];
    let mut events = vec![0usize; bins];
    let mut brier = 0.0;
    for (&p, &y) in s.scores().iter().zip(s.labels()) {
        let yv = if y { 1.0 } else { 0.0 };
        brier += (p - yv) * (p - yv);
        let b = ((p * bins as f64) as usize).min(bins - 1);
        count[b] += 1;
        score_sum[b] += p;
        events[b] += usize::from(y);
    }
    let mut ece = 0.0;
    let mut table = Vec::new();
    for b in 0..bins {
        if count[b] == 0 {
            continue;
        }
        let mean_score = score_sum[b] / count[b] as f64;
        let event_rate = events[b] as f64 / count[b] as f64;
        ece += count[b] as f64 / n * (mean_score - event_rate).abs();
        table.push(CalibrationBin {
            lower: b as f64 / bins as f64,
            upper: (b + 1) as f64 / bins as f64,
            count: count[b],
            mean_score,
            event_rate,
        });
    }
    Ok(Calibration {
        brier: brier / n,
        ece,
        bins: table,
    })
}
