//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs under `cargo test`; exits non-zero when any criterion fails.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::reference::reference_predict;
use common::{gradient_mismatch, golden, oracles, random_record, random_sequence, random_weights, rng};
use kfrisk_core::cohort::{split_patients, CodeTables, Horizon, LabelConfig, SplitSubject};
use kfrisk_core::eval::*;
use kfrisk_core::kfre::{kfre_risk, KfreInputs, KfreVariant};
use kfrisk_core::model::{calibrate, predict, DEFAULT_PERCENTILES};
use kfrisk_core::train::{fit_cohort, generate_synthetic_cohort, label_cohort, CohortSpec, FitConfig};
use kfrisk_core::{Execution, Sex};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn imputation_golden() -> Verdict {
    let edge = golden::mismatches(&golden::edge_filled(), &golden::EDGE_FILLED);
    let full = golden::mismatches(&golden::imputed(), &golden::IMPUTED);
    let ca = golden::imputed().rows()[1].values[2].unwrap();
    let ca_err = (ca - 2.2875).abs();
    verdict(
        edge.is_empty() && full.is_empty() && ca_err <= 1e-12,
        format!(
            "edge-fill mismatches {}, interpolation mismatches {}, Ca 2010/04 = {ca} (|err| {ca_err:.1e})",
            edge.len(),
            full.len()
        ),
    )
}

fn kfre_centring() -> Verdict {
    let centre = KfreInputs {
        age: 70.36,
        male: 0.5642,
        egfr: 36.11,
        acr: 5.137_f64.exp(),
        albumin: Some(3.997),
        phosphate: Some(3.916),
        hco3: Some(25.57),
        calcium: Some(9.355),
    };
    let expected = [0.0168, 0.0173, 0.0635, 0.0755];
    let variants = [KfreVariant::FOUR_TWO, KfreVariant::EIGHT_TWO, KfreVariant::FOUR_FIVE, KfreVariant::EIGHT_FIVE];
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for (v, want) in variants.iter().zip(expected) {
        let risk = kfre_risk(*v, &centre).unwrap();
        worst = worst.max((risk - want).abs());
        parts.push(format!("{} {risk:.6}", v.label()));
    }
    verdict(worst <= 1e-12, format!("{}; max |err| {worst:.1e}", parts.join(", ")))
}

fn reference_parity() -> Verdict {
    let mut r = rng(2024);
    let n = 120;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let w = random_weights(&mut r, 16, 0.5);
        let rec = random_record(&mut r, i);
        let engine = predict(&rec, &w).unwrap();
        let (raw, calibrated) = reference_predict(&rec, &w);
        worst = worst.max((engine.raw - raw).abs()).max((engine.calibrated - calibrated).abs());
    }
    verdict(worst <= 1e-9, format!("{n} patients, max |Δ| {worst:.2e}"))
}

fn gradient_check() -> Verdict {
    let mut r = rng(20);
    let n = 24;
    let mut failures = Vec::new();
    for case in 0..n {
        let w = random_weights(&mut r, 16, 0.6);
        let steps = r.random_range(1..=5);
        let seq = random_sequence(&mut r, steps);
        let age = r.random_range(-2.0..2.0);
        let sex = if r.random_bool(0.5) { Sex::Male } else { Sex::Female };
        let y = if r.random_bool(0.5) { 1.0 } else { 0.0 };
        if let Some((name, idx, a, num)) = gradient_mismatch(&seq, age, sex, y, &w, 1e-4, 1e-8) {
            failures.push(format!("case {case}: {name}[{idx}] {a:e} vs {num:e}"));
        }
    }
    verdict(
        failures.is_empty(),
        format!("{n} instances, 18 arrays each, {} mismatches{}", failures.len(), if failures.is_empty() { String::new() } else { format!(": {}", failures.join("; ")) }),
    )
}

fn metric_fixtures() -> Vec<ScoredSet> {
    let mut r = rng(7);
    [(200, 0.2, 0.5), (100, 0.5, 0.2), (50, 0.1, 0.7), (137, 0.06, 0.6)]
        .iter()
        .map(|&(n, p, s)| {
            let (scores, labels) = oracles::fixture(&mut r, n, p, s);
            ScoredSet::new(scores, labels).unwrap()
        })
        .collect()
}

fn metric_oracles() -> Verdict {
    let mut worst = 0.0_f64;
    let mut worst_var = 0.0_f64;
    let mut youden_same = true;
    for s in metric_fixtures() {
        let (sc, lb) = (s.scores(), s.labels());
        let y = youden_threshold(&s).unwrap();
        let (t, sens, spec) = oracles::youden(sc, lb);
        youden_same &= y.threshold == t;
        let cal5 = calibration_metrics(&s, 5).unwrap();
        let cal10 = calibration_metrics(&s, 10).unwrap();
        for (a, b) in [
            (auroc(&s).unwrap().value, oracles::auroc(sc, lb)),
            (precision_recall(&s).unwrap().average_precision, oracles::average_precision(sc, lb)),
            (y.sensitivity, sens),
            (y.specificity, spec),
            (cal10.brier, oracles::brier(sc, lb)),
            (cal5.ece, oracles::ece(sc, lb, 5)),
            (cal10.ece, oracles::ece(sc, lb, 10)),
        ] {
            worst = worst.max((a - b).abs());
        }
        let delong = auroc(&s).unwrap().variance;
        let boot = bootstrap_auroc_variance(&s, 10_000, 42, Execution::Parallel).unwrap();
        worst_var = worst_var.max((delong - boot).abs() / boot);
    }
    verdict(
        worst <= 1e-12 && youden_same && worst_var <= 0.15,
        format!("max |Δ| vs brute force {worst:.1e}, Youden thresholds equal {youden_same}, DeLong vs bootstrap variance max rel dev {:.1}%", worst_var * 100.0),
    )
}

fn decision_curve_identities() -> Verdict {
    let mut worst = 0.0_f64;
    let mut crossing = 0.0_f64;
    for s in metric_fixtures() {
        let pi = s.prevalence();
        for p in decision_curve(&s, &default_thresholds()).unwrap() {
            let t = p.threshold;
            worst = worst.max((p.treat_all - (pi - (1.0 - pi) * t / (1.0 - t))).abs());
        }
        crossing = crossing.max(decision_curve(&s, &[pi]).unwrap()[0].treat_all.abs());
    }
    verdict(
        worst <= 1e-12 && crossing <= 1e-12,
        format!("treat-all max |Δ| {worst:.1e}, |NB(π)| {crossing:.1e}"),
    )
}

fn desk_training() -> Verdict {
    let seed = 1;
    let tables = CodeTables::bundled();
    let cohort = generate_synthetic_cohort(&CohortSpec::default(), seed).unwrap();
    let mut config = FitConfig {
        split_seed: seed,
        ..FitConfig::default()
    };
    config.train.seed = seed;
    config.train.execution = Execution::Sequential;

    let started = Instant::now();
    let fit = fit_cohort(&cohort.records, &tables, &config).unwrap();
    let elapsed = started.elapsed();
    let weights = &fit.outcome.weights;
    let history = &fit.outcome.history;
    let split_auroc = auroc(&fit.test).unwrap().value;

    // an independent cohort from the same generator
    let fresh = generate_synthetic_cohort(&CohortSpec::default(), seed + 1000).unwrap();
    let (labelled, _) = label_cohort(&fresh.records, &tables, &LabelConfig::new(Horizon::FiveYears)).unwrap();
    let scores: Vec<f64> = labelled.iter().map(|l| weights.score(&l.record).unwrap()).collect();
    let labels: Vec<bool> = labelled.iter().map(|l| l.label.is_event()).collect();
    let held_out = auroc(&ScoredSet::new(scores, labels).unwrap()).unwrap().value;

    let visitwise = visitwise_eval(
        weights,
        &fresh.records,
        &fresh.event_months,
        Horizon::FiveYears,
        15,
        Execution::Sequential,
    )
    .unwrap();
    let trend = visitwise.trend.unwrap();

    let loss_1 = history[0].train_loss;
    let loss_10 = history[9].train_loss;
    let pass = held_out >= 0.90
        && history.len() <= 20
        && elapsed < Duration::from_secs(120)
        && fit.outcome.clamp_events == 0
        && loss_10 < loss_1
        && trend.rho > 0.0
        && trend.p_value < 0.05;
    verdict(
        pass,
        format!(
            "held-out AUROC {held_out:.4} (test split {split_auroc:.4}, {} positives), {} epochs in {:.1}s single-threaded, clamp events {}, loss epoch 1 {loss_1:.4} -> epoch 10 {loss_10:.4}, visit-wise Spearman ρ {:.3} p {:.2e}",
            fit.test.positives(),
            history.len(),
            elapsed.as_secs_f64(),
            fit.outcome.clamp_events,
            trend.rho,
            trend.p_value
        ),
    )
}

fn calibration_map() -> Verdict {
    let n = 10_000;
    let values: Vec<f64> = (0..=n).map(|i| calibrate(i as f64 / n as f64, &DEFAULT_PERCENTILES).unwrap()).collect();
    let monotone = values.windows(2).all(|w| w[1] >= w[0]);
    let (lo, hi) = (values[0], values[n]);
    verdict(
        monotone && lo == 0.0 && (hi - 0.9965996).abs() <= 1e-12,
        format!("non-decreasing on {} points {monotone}, f(0) = {lo}, f(1) = {hi}", n + 1),
    )
}

fn split_integrity() -> Verdict {
    let mut r = rng(4587);
    let subjects: Vec<SplitSubject> = (0..4587)
        .map(|i| SplitSubject {
            id: format!("P{i}"),
            event: r.random_bool(0.06),
            sex: if r.random_bool(0.5) { Sex::Male } else { Sex::Female },
            age: r.random_range(18.0..95.0),
        })
        .collect();
    let split = split_patients(&subjects, [0.6, 0.2, 0.2], 3).unwrap();
    let sizes = [split.train.len(), split.validation.len(), split.test.len()];
    let sizes_ok = sizes.iter().zip([2752, 917, 918]).all(|(&a, b): (&usize, i64)| (a as i64 - b).abs() <= 1);
    let all: HashSet<&String> = split.train.iter().chain(&split.validation).chain(&split.test).collect();
    let disjoint = all.len() == 4587;
    verdict(sizes_ok && disjoint, format!("sizes {sizes:?}, distinct ids {}", all.len()))
}

type Check = (&'static str, Option<Duration>, fn() -> Verdict);

fn main() -> ExitCode {
    let checks: [Check; 9] = [
        ("imputation golden tables", Some(Duration::from_secs(1)), imputation_golden),
        ("KFRE centring identities", None, kfre_centring),
        ("reference-oracle parity", Some(Duration::from_secs(10)), reference_parity),
        ("gradient verification", Some(Duration::from_secs(60)), gradient_check),
        ("metric oracles", None, metric_oracles),
        ("decision-curve identities", None, decision_curve_identities),
        ("desk-scale training", Some(Duration::from_secs(120)), desk_training),
        ("calibration map", None, calibration_map),
        ("split integrity", None, split_integrity),
    ];
    let mut failed = 0;
    for (name, budget, check) in checks {
        let started = Instant::now();
        let v = check();
        let elapsed = started.elapsed();
        let in_time = budget.is_none_or(|b| elapsed < b);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = match budget {
            Some(b) => format!(" [{:.2}s of {}s]", elapsed.as_secs_f64(), b.as_secs()),
            None => format!(" [{:.2}s]", elapsed.as_secs_f64()),
        };
        println!("{} {name}: {}{timing}", if pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
