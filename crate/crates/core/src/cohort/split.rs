//! Patient-level stratified splitting.
//!
//! Subjects are shuffled under the seed, then ordered by stratum (event first,
//! then sex, then age band) so each stratum is a contiguous random run. Splits
//! are filled greedily along that order, always topping up the split furthest
//! below its target share, which keeps both the overall sizes and every
//! stratum's shares within one of proportional. Folds are dealt round-robin
//! along the same order, so event counts per fold differ by at most one.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clinical::Sex;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeBand {
    /// 18–59 (younger ages fall here too)
    Under60,
    /// 60–74
    From60To74,
    /// ≥ 75
    From75,
}

pub fn age_band(age: f64) -> AgeBand {
    if age < 60.0 {
        AgeBand::Under60
    } else if age < 75.0 {
        AgeBand::From60To74
    } else {
        AgeBand::From75
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSubject {
    pub id: String,
    pub event: bool,
    pub sex: Sex,
    pub age: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

type Stratum = (bool, Option<Sex>, Option<AgeBand>);

/// Seeded, stratum-contiguous order of subject indices.
fn stratified_order(subjects: &[SplitSubject], groups: usize, seed: u64) -> Result<(Vec<usize>, Vec<String>)> {
    let mut seen = HashSet::new();
    for s in subjects {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::domain(format!("duplicate patient id {}", s.id)));
        }
    }
    let joint = |s: &SplitSubject| -> Stratum { (s.event, Some(s.sex), Some(age_band(s.age))) };
    let mut counts: BTreeMap<Stratum, usize> = BTreeMap::new();
    for s in subjects {
        *counts.entry(joint(s)).or_default() += 1;
    }
    let mut warnings = Vec::new();
    let use_joint = counts.values().all(|&n| n >= groups);
    if !use_joint {
        warnings.push(format!(
            "a sex/age/event stratum has fewer than {groups} patients; stratifying on event only"
        ));
    }
    let key = |s: &SplitSubject| -> Stratum {
        if use_joint {
            joint(s)
        } else {
            (s.event, None, None)
        }
    };
    let mut order: Vec<usize> = (0..subjects.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // Events first so they form one contiguous run.
    order.sort_by_key(|&i| {
        let (event, sex, band) = key(&subjects[i]);
        (!event, sex, band)
    });
    Ok((order, warnings))
}

/// Train/validation/test split with the given ratios (must sum to 1).
pub fn split_patients(subjects: &[SplitSubject], ratios: [f64; 3], seed: u64) -> Result<Split> {
    if ratios.iter().any(|&r| !(r.is_finite() && r >= 0.0)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("split ratios {ratios:?} must be non-negative and sum to 1")));
    }
    if subjects.is_empty() {
        return Err(Error::Empty("no patients to split".into()));
    }
    let (order, warnings) = stratified_order(subjects, 3, seed)?;
    let mut buckets: [Vec<String>; 3] = Default::default();
    for (pos, &i) in order.iter().enumerate() {
        let filled = (pos + 1) as f64;
        let target = (0..3)
            .max_by(|&a, &b| {
                let da = ratios[a] * filled - buckets[a].len() as f64;
                let db = ratios[b] * filled - buckets[b].len() as f64;
                // ties go to the earlier split
                da.partial_cmp(&db).unwrap().then(b.cmp(&a))
            })
            .expect("three splits");
        buckets[target].push(subjects[i].id.clone());
    }
    let [train, validation, test] = buckets;
    Ok(Split {
        train,
        validation,
        test,
        warnings,
    })
}

/// `k` disjoint folds with near-equal sizes and event counts.
pub fn kfold(subjects: &[SplitSubject], k: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    if k < 2 {
        return Err(Error::domain(format!("k-fold needs k >= 2, got {k}")));
    }
    if subjects.len() < k {
        return Err(Error::domain(format!("{} patients cannot fill {k} folds", subjects.len())));
    }
    let (order, _) = stratified_order(subjects, k, seed)?;
    let mut folds = vec![Vec::new(); k];
    for (pos, &i) in order.iter().enumerate() {
        folds[pos % k].push(subjects[i].id.clone());
    }
    Ok(folds)
}
