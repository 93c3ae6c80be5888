//! Shared fixtures for the integration tests.
#![allow(dead_code)]

pub mod golden;
pub mod oracles;
pub mod reference;

use kfrisk_core::model::{forward_and_head, ModelWeights, Parameters};
use kfrisk_core::month::YearMonth;
use kfrisk_core::par::Execution;
use kfrisk_core::preprocess::{LabVisit, NUM_LABS};
use kfrisk_core::train::{backward, bce_loss, finite_difference_oracle};
use kfrisk_core::{FeatureSequence, PatientRecord, Sex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_params(rng: &mut ChaCha8Rng, hidden: usize, scale: f64) -> Parameters {
    let mut p = Parameters::zeros(hidden);
    for a in p.arrays_mut() {
        for v in a.data_mut() {
            *v = rng.random_range(-scale..scale);
        }
    }
    p
}

pub fn random_weights(rng: &mut ChaCha8Rng, hidden: usize, scale: f64) -> ModelWeights {
    ModelWeights {
        params: random_params(rng, hidden, scale),
        ..ModelWeights::zeros(hidden)
    }
}

/// Standardised-looking features with integer month gaps.
pub fn random_sequence(rng: &mut ChaCha8Rng, steps: usize) -> FeatureSequence {
    let rows = (0..steps)
        .map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
        .collect();
    let intervals = (0..steps)
        .map(|i| if i == 0 { 0.0 } else { rng.random_range(1..=12) as f64 })
        .collect();
    FeatureSequence::new(rows, intervals).unwrap()
}

/// Plausible raw lab values with random gaps, duplicates and missingness.
pub fn random_record(rng: &mut ChaCha8Rng, id: usize) -> PatientRecord {
    let age = rng.random_range(20.0..90.0_f64).round();
    let sex = if rng.random_bool(0.5) { Sex::Male } else { Sex::Female };
    let n = rng.random_range(1..=12);
    let mut month = YearMonth::new(rng.random_range(2005..2015), rng.random_range(1..=12)).unwrap();
    let ranges = [(5.0, 120.0), (25.0, 50.0), (1.8, 2.7), (0.6, 2.5), (1.0, 3000.0), (15.0, 32.0)];
    let never: [bool; NUM_LABS] = std::array::from_fn(|_| rng.random_bool(0.1));
    let mut visits = Vec::with_capacity(n);
    for i in 0..n {
        // occasional second test in the same month
        if i > 0 && !rng.random_bool(0.15) {
            month = month.add_months(rng.random_range(1..=9));
        }
        let mut values = [None; NUM_LABS];
        for (k, &(lo, hi)) in ranges.iter().enumerate() {
            if !never[k] && rng.random_bool(0.6) {
                values[k] = Some(rng.random_range(lo..hi));
            }
        }
        if values.iter().all(Option::is_none) {
            values[0] = Some(rng.random_range(5.0..120.0));
        }
        visits.push(LabVisit::new(month, values));
    }
    PatientRecord::new(format!("P{id}"), age, sex, visits)
}

pub fn loss(seq: &FeatureSequence, age: f64, sex: Sex, y: f64, w: &ModelWeights) -> f64 {
    bce_loss(forward_and_head(seq, age, sex, w).unwrap(), y).loss
}

/// Worst gradient mismatch, reported as `(array name, index, analytic, numeric)`
/// for the first entry outside `|a − n| ≤ max(abs, rel·max(|a|, |n|))`.
pub fn gradient_mismatch(
    seq: &FeatureSequence,
    age: f64,
    sex: Sex,
    y: f64,
    w: &ModelWeights,
    rel: f64,
    abs: f64,
) -> Option<(String, usize, f64, f64)> {
    let analytic = backward(seq, age, sex, y, w).unwrap().grads;
    let numeric = finite_difference_oracle(
        |p| {
            let probe = ModelWeights {
                params: p.clone(),
                ..w.clone()
            };
            Ok(loss(seq, age, sex, y, &probe))
        },
        &w.params,
        1e-5,
        Execution::Parallel,
    )
    .unwrap();
    for ((name, a), (_, n)) in analytic.named().zip(numeric.named()) {
        for (i, (&x, &z)) in a.data().iter().zip(n.data()).enumerate() {
            if (x - z).abs() > abs.max(rel * x.abs().max(z.abs())) {
                return Some((name.to_string(), i, x, z));
            }
        }
    }
    None
}
