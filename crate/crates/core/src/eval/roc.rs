//! AUROC with the DeLong variance, paired DeLong tests and a bootstrap oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::scored::ScoredSet;
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// 1-based ranks with ties given their average rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// DeLong structural components: one placement value per positive and per
/// negative.
struct Placements {
    v10: Vec<f64>,
    v01: Vec<f64>,
}

impl Placements {
    fn new(s: &ScoredSet) -> Self {
        let pos: Vec<f64> = s.scores().iter().zip(s.labels()).filter(|p| *p.1).map(|p| *p.0).collect();
        let neg: Vec<f64> = s.scores().iter().zip(s.labels()).filter(|p| !*p.1).map(|p| *p.0).collect();
        let (m, n) = (pos.len() as f64, neg.len() as f64);
        let all: Vec<f64> = pos.iter().chain(&neg).copied().collect();
        let r_all = midranks(&all);
        let r_pos = midranks(&pos);
        let r_neg = midranks(&neg);
        let v10 = r_pos.iter().zip(&r_all).map(|(rp, ra)| (ra - rp) / n).collect();
        let v01 = r_neg
            .iter()
            .zip(&r_all[pos.len()..])
            .map(|(rn, ra)| 1.0 - (ra - rn) / m)
            .collect();
        Self { v10, v01 }
    }

    fn auc(&self) -> f64 {
        self.v10.iter().sum::<f64>() / self.v10.len() as f64
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample covariance; zero for fewer than two observations.
fn cov(a: &[f64], b: &[f64]) -> f64 {
    if a.len() < 2 {
        return 0.0;
    }
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Auroc {
    pub value: f64,
    /// DeLong variance of the estimate.
    pub variance: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl Auroc {
    pub fn ci_half_width(&self) -> f64 {
        Z_95 * self.variance.sqrt()
    }
}

/// P(score⁺ > score⁻) + ½·P(tie), with a DeLong 95% interval clipped to [0, 1].
pub fn auroc(s: &ScoredSet) -> Result<Auroc> {
    s.require_both_classes("AUROC")?;
    let p = Placements::new(s);
    let value = p.auc();
    let variance = cov(&p.v10, &p.v10) / p.v10.len() as f64 + cov(&p.v01, &p.v01) / p.v01.len() as f64;
    let half = Z_95 * variance.sqrt();
    Ok(Auroc {
        value,
        variance,
        ci_lower: (value - half).max(0.0),
        ci_upper: (value + half).min(1.0),
    })
}

fn auc_value(s: &ScoredSet) -> f64 {
    Placements::new(s).auc()
}

fn two_sided_p(z: f64) -> f64 {
    let n = Normal::standard();
    (2.0 * (1.0 - n.cdf(z.abs()))).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DelongTest {
    pub auroc_a: f64,
    pub auroc_b: f64,
    /// Variance of `auroc_a − auroc_b`.
    pub variance: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Paired DeLong test of two scorings of the same patients. A non-positive
/// variance of the difference (identical models) yields `p = 1`.
pub fn delong_test(a: &ScoredSet, b: &ScoredSet) -> Result<DelongTest> {
    if a.labels() != b.labels() {
        return Err(Error::domain("paired DeLong test needs identical label vectors"));
    }
    a.require_both_classes("DeLong test")?;
    let (pa, pb) = (Placements::new(a), Placements::new(b));
    let (m, n) = (pa.v10.len() as f64, pa.v01.len() as f64);
    let var_a = cov(&pa.v10, &pa.v10) / m + cov(&pa.v01, &pa.v01) / n;
    let var_b = cov(&pb.v10, &pb.v10) / m + cov(&pb.v01, &pb.v01) / n;
    let covar = cov(&pa.v10, &pb.v10) / m + cov(&pa.v01, &pb.v01) / n;
    let variance = var_a + var_b - 2.0 * covar;
    let (auroc_a, auroc_b) = (pa.auc(), pb.auc());
    let (z, p_value) = if variance > 0.0 {
        let z = (auroc_a - auroc_b) / variance.sqrt();
        (z, two_sided_p(z))
    } else {
        (0.0, 1.0)
    };
    Ok(DelongTest {
        auroc_a,
        auroc_b,
        variance,
        z,
        p_value,
    })
}

/// Class-stratified resample indices: positives and negatives are drawn with
/// replacement from their own class, so every replicate keeps both.
fn resample(pos: &[usize], neg: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx = Vec::with_capacity(pos.len() + neg.len());
    for group in [pos, neg] {
        for _ in 0..group.len() {
            idx.push(group[rng.random_range(0..group.len())]);
        }
    }
    idx
}

fn class_indices(s: &ScoredSet) -> (Vec<usize>, Vec<usize>) {
    (0..s.len()).partition(|&i| s.labels()[i])
}

fn replicate_rng(seed: u64, b: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64);
    rng
}

fn sample_variance(v: &[f64]) -> f64 {
    cov(v, v)
}

/// Bootstrap variance of the AUROC over `resamples` stratified replicates.
/// Replicate `b` draws from its own stream of the seeded generator, so the
/// result does not depend on `exec`.
pub fn bootstrap_auroc_variance(s: &ScoredSet, resamples: usize, seed: u64, exec: Execution) -> Result<f64> {
    s.require_both_classes("bootstrap AUROC")?;
    if resamples < 2 {
        return Err(Error::domain("need at least two bootstrap resamples"));
    }
    let (pos, neg) = class_indices(s);
    let aucs = par::map_range(exec, resamples, |b| {
        auc_value(&s.select(&resample(&pos, &neg, &mut replicate_rng(seed, b))))
    });
    Ok(sample_variance(&aucs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BootstrapDifference {
    pub difference: f64,
    pub variance: f64,
    /// Normal-approximation p-value using the bootstrap standard error.
    pub p_value: f64,
}

/// Paired bootstrap of `AUROC(a) − AUROC(b)`.
pub fn bootstrap_difference(
    a: &ScoredSet,
    b: &ScoredSet,
    resamples: usize,
    seed: u64,
    exec: Execution,
) -> Result<BootstrapDifference> {
    if a.labels() != b.labels() {
        return Err(Error::domain("paired bootstrap needs identical label vectors"));
    }
    a.require_both_classes("bootstrap AUROC")?;
    if resamples < 2 {
        return Err(Error::domain("need at least two bootstrap resamples"));
    }
    let (pos, neg) = class_indices(a);
    let diffs = par::map_range(exec, resamples, |r| {
        let idx = resample(&pos, &neg, &mut replicate_rng(seed, r));
        auc_value(&a.select(&idx)) - auc_value(&b.select(&idx))
    });
    let difference = auc_value(a) - auc_value(b);
    let variance = sample_variance(&diffs);
    let p_value = if variance > 0.0 {
        two_sided_p(difference / variance.sqrt())
    } else {
        1.0
    };
    Ok(BootstrapDifference {
        difference,
        variance,
        p_value,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RocPoint {
    /// Scores at or above this value are called positive.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC vertices from `(0, 0)` at threshold +∞ down through every distinct score.
pub fn roc_curve(s: &ScoredSet) -> Result<Vec<RocPoint>> {
    s.require_both_classes("ROC curve")?;
    let (m, n) = (s.positives() as f64, s.negatives() as f64);
    let sorted = s.descending();
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
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
        points.push(RocPoint {
            threshold: t,
            fpr: fp as f64 / n,
            tpr: tp as f64 / m,
        });
    }
    Ok(points)
}
