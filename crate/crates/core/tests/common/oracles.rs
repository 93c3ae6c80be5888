//! Brute-force metric definitions used as oracles.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Scores rounded to two decimals so ties occur.
pub fn fixture(rng: &mut ChaCha8Rng, n: usize, prevalence: f64, signal: f64) -> (Vec<f64>, Vec<bool>) {
    let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(prevalence)).collect();
    labels[0] = true;
    labels[1] = false;
    let scores = labels
        .iter()
        .map(|&y| {
            let base: f64 = rng.random_range(0.0..1.0);
            let s = if y { base * (1.0 - signal) + signal * rng.random_range(0.5..1.0) } else { base };
            (s.clamp(0.0, 1.0) * 100.0).round() / 100.0
        })
        .collect();
    (scores, labels)
}

/// Pairwise concordance with ties counted half.
pub fn auroc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut num, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / pairs
}

fn distinct_desc(scores: &[f64]) -> Vec<f64> {
    let mut t = scores.to_vec();
    t.sort_by(|a, b| b.total_cmp(a));
    t.dedup();
    t
}

fn counts(scores: &[f64], labels: &[bool], t: f64) -> (f64, f64, f64, f64) {
    let (mut tp, mut fp, mut tn, mut fn_) = (0.0, 0.0, 0.0, 0.0);
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= t, y) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, false) => tn += 1.0,
            (false, true) => fn_ += 1.0,
        }
    }
    (tp, fp, tn, fn_)
}

/// Σ ΔR·P by recounting the confusion matrix at every distinct threshold.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> f64 {
    let mut prev_r = 0.0;
    let mut ap = 0.0;
    for t in distinct_desc(scores) {
        let (tp, fp, _, fn_) = counts(scores, labels, t);
        let r = tp / (tp + fn_);
        ap += (r - prev_r) * tp / (tp + fp);
        prev_r = r;
    }
    ap
}

/// (threshold, sensitivity, specificity) maximising Youden's J, lowest
/// threshold among ties.
pub fn youden(scores: &[f64], labels: &[bool]) -> (f64, f64, f64) {
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for t in distinct_desc(scores) {
        let (tp, fp, tn, fn_) = counts(scores, labels, t);
        let (sens, spec) = (tp / (tp + fn_), tn / (tn + fp));
        let j = sens + spec - 1.0;
        if best.is_none_or(|b| j >= b.0 - 1e-12) {
            best = Some((j.max(best.map_or(j, |b| b.0)), t, sens, spec));
        }
    }
    let (_, t, sens, spec) = best.unwrap();
    (t, sens, spec)
}

pub fn brier(scores: &[f64], labels: &[bool]) -> f64 {
    scores
        .iter()
        .zip(labels)
        .map(|(&p, &y)| (p - if y { 1.0 } else { 0.0 }).powi(2))
        .sum::<f64>()
        / scores.len() as f64
}

/// Bins `[b/B, (b+1)/B)`, the last one closed.
pub fn ece(scores: &[f64], labels: &[bool], bins: usize) -> f64 {
    let n = scores.len() as f64;
    let mut total = 0.0;
    for b in 0..bins {
        let (lo, hi) = (b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
        let members: Vec<usize> = (0..scores.len())
            .filter(|&i| scores[i] >= lo && (scores[i] < hi || (b == bins - 1 && scores[i] <= 1.0)))
            .collect();
        if members.is_empty() {
            continue;
        }
        let k = members.len() as f64;
        let mean: f64 = members.iter().map(|&i| scores[i]).sum::<f64>() / k;
        let rate = members.iter().filter(|&&i| labels[i]).count() as f64 / k;
        total += k / n * (mean - rate).abs();
    }
    total
}
