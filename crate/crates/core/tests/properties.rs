mod common;

use std::collections::HashSet;

use kfrisk_core::cohort::{
    blank_pre_outcome, label_outcome, split_patients, ClaimEvent, CodeSystem, CodeTables, Horizon, LabelConfig,
    SplitSubject, LEAKAGE_WINDOW_MONTHS,
};
use kfrisk_core::eval::{auroc, decision_curve, ScoredSet};
use kfrisk_core::kfre::{kfre_risk, KfreInputs, KfreVariant};
use kfrisk_core::model::{calibrate, load_weights, DEFAULT_PERCENTILES};
use kfrisk_core::preprocess::{impute_grid, FallbackMedians, LabVisit, MonthlyGrid, NUM_LABS};
use kfrisk_core::{PatientRecord, Sex, YearMonth};
use proptest::prelude::*;

fn month() -> impl Strategy<Value = YearMonth> {
    (1990..2030i32, 1..=12u32).prop_map(|(y, m)| YearMonth::new(y, m).unwrap())
}

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    prop::collection::vec((0.0..1.0f64, any::<bool>()), 2..80)
        .prop_map(|v| v.into_iter().unzip::<_, _, Vec<_>, Vec<_>>())
        .prop_filter("both classes", |(_, y)| y.contains(&true) && y.contains(&false))
}

fn grid() -> impl Strategy<Value = MonthlyGrid> {
    let row = (1..6i64, prop::array::uniform6(prop::option::weighted(0.5, 0.1..500.0f64)));
    (month(), prop::collection::vec(row, 1..12)).prop_map(|(start, rows)| {
        let mut m = start;
        let rows = rows
            .into_iter()
            .map(|(gap, values)| {
                m = m.add_months(gap);
                LabVisit::new(m, values)
            })
            .collect();
        MonthlyGrid::from_rows(rows).unwrap()
    })
}

fn sex() -> impl Strategy<Value = Sex> {
    prop_oneof![Just(Sex::Male), Just(Sex::Female)]
}

fn record_with_event(visit_offsets: Vec<i64>, event_offset: i64, start: YearMonth) -> PatientRecord {
    let visits = visit_offsets
        .iter()
        .map(|&o| LabVisit::new(start.add_months(o), [Some(20.0), None, None, None, None, None]))
        .collect();
    let mut rec = PatientRecord::new("P", 60.0, Sex::Male, visits);
    rec.claims.push(ClaimEvent {
        month: start.add_months(event_offset),
        code: "Z49.201".into(),
        system: CodeSystem::National,
    });
    rec
}

proptest! {
    #[test]
    fn calibration_is_monotone_and_bounded(a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (f_lo, f_hi) = (calibrate(lo, &DEFAULT_PERCENTILES).unwrap(), calibrate(hi, &DEFAULT_PERCENTILES).unwrap());
        prop_assert!(f_lo <= f_hi);
        prop_assert!((0.0..=1.0).contains(&f_lo) && (0.0..=1.0).contains(&f_hi));
    }

    #[test]
    fn auroc_ignores_monotone_transforms((s, y) in scored()) {
        let a = auroc(&ScoredSet::new(s.clone(), y.clone()).unwrap()).unwrap().value;
        let t: Vec<f64> = s.iter().map(|x| (3.0 * x).exp() - 1.0).collect();
        let b = auroc(&ScoredSet::new(t, y.clone()).unwrap()).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12);
        let flipped: Vec<bool> = y.iter().map(|v| !v).collect();
        let c = auroc(&ScoredSet::new(s.clone(), flipped).unwrap()).unwrap().value;
        prop_assert!((a + c - 1.0).abs() <= 1e-12);
        prop_assert!((a - common::oracles::auroc(&s, &y)).abs() <= 1e-12);
    }

    #[test]
    fn imputation_is_complete_and_idempotent(g in grid(), age in 20.0..90.0f64, sex in sex()) {
        let fallback = FallbackMedians::for_patient(age, sex).unwrap();
        let once = impute_grid(&g, &fallback);
        prop_assert!(once.is_complete());
        prop_assert_eq!(&impute_grid(&once, &fallback), &once);
        for (before, after) in g.rows().iter().zip(once.rows()) {
            for k in 0..NUM_LABS {
                if let Some(v) = before.values[k] {
                    prop_assert_eq!(after.values[k], Some(v));
                }
            }
        }
    }

    #[test]
    fn kfre_is_monotone_in_kidney_markers(
        age in 20.0..90.0f64,
        sex in sex(),
        egfr in 5.0..60.0f64,
        acr in 1.0..5000.0f64,
        d_egfr in 0.1..10.0f64,
        k_acr in 1.01..5.0f64,
    ) {
        let base = KfreInputs::from_si(age, sex, egfr, acr, None, None, None, None);
        for v in [KfreVariant::FOUR_TWO, KfreVariant::FOUR_FIVE] {
            let r = kfre_risk(v, &base).unwrap();
            prop_assert!(r > 0.0 && r < 1.0);
            let worse_egfr = KfreInputs { egfr: egfr - d_egfr.min(egfr - 1.0), ..base };
            prop_assert!(kfre_risk(v, &worse_egfr).unwrap() >= r);
            let worse_acr = KfreInputs { acr: acr * k_acr, ..base };
            prop_assert!(kfre_risk(v, &worse_acr).unwrap() >= r);
        }
        prop_assert!(kfre_risk(KfreVariant::FOUR_FIVE, &base).unwrap() >= kfre_risk(KfreVariant::FOUR_TWO, &base).unwrap());
    }

    #[test]
    fn longer_horizon_never_loses_events(
        start in month(),
        offsets in prop::collection::vec(0..100i64, 1..10),
        event in 0..120i64,
    ) {
        let rec = record_with_event(offsets, event, start);
        let tables = CodeTables::bundled();
        let two = label_outcome(&rec, &tables, &LabelConfig::new(Horizon::TwoYears)).unwrap();
        let five = label_outcome(&rec, &tables, &LabelConfig::new(Horizon::FiveYears)).unwrap();
        prop_assert!(!two.is_event() || five.is_event());
    }

    #[test]
    fn blanking_clears_the_leakage_window(
        start in month(),
        offsets in prop::collection::vec(0..60i64, 1..12),
        event in 0..60i64,
    ) {
        let rec = record_with_event(offsets, event, start);
        let label = label_outcome(&rec, &CodeTables::bundled(), &LabelConfig::new(Horizon::FiveYears)).unwrap();
        let blanked = blank_pre_outcome(&rec, &label);
        let event_month = label.event_date().unwrap();
        for v in &blanked.record.visits {
            prop_assert!(event_month.months_since(v.month) > LEAKAGE_WINDOW_MONTHS);
        }
        let kept = rec.visits.iter().filter(|v| event_month.months_since(v.month) > LEAKAGE_WINDOW_MONTHS).count();
        prop_assert_eq!(blanked.record.visits.len(), kept);
        prop_assert_eq!(blanked.excluded, kept == 0);
    }

    #[test]
    fn split_partitions_patients(
        people in prop::collection::vec((any::<bool>(), sex(), 18.0..95.0f64), 3..300),
        seed in any::<u64>(),
    ) {
        let subjects: Vec<SplitSubject> = people
            .iter()
            .enumerate()
            .map(|(i, &(event, sex, age))| SplitSubject { id: format!("P{i}"), event, sex, age })
            .collect();
        let split = split_patients(&subjects, [0.6, 0.2, 0.2], seed).unwrap();
        let all: Vec<&String> = split.train.iter().chain(&split.validation).chain(&split.test).collect();
        let unique: HashSet<&String> = all.iter().copied().collect();
        prop_assert_eq!(all.len(), subjects.len());
        prop_assert_eq!(unique.len(), subjects.len());
    }

    #[test]
    fn year_month_roundtrips(m in month(), k in -500..500i64) {
        prop_assert_eq!(m.to_string().parse::<YearMonth>().unwrap(), m);
        prop_assert_eq!(m.compact().parse::<YearMonth>().unwrap(), m);
        prop_assert_eq!(YearMonth::from_ordinal(m.ordinal()), m);
        prop_assert_eq!(m.add_months(k).months_since(m), k);
    }

    #[test]
    fn weight_files_roundtrip(seed in any::<u64>(), hidden in 1..20usize) {
        let w = common::random_weights(&mut common::rng(seed), hidden, 1.0);
        prop_assert_eq!(load_weights(w.to_json_string().as_bytes()).unwrap(), w);
    }

    #[test]
    fn treat_all_net_benefit_identity((s, y) in scored(), t in 0.01..0.99f64) {
        let set = ScoredSet::new(s, y).unwrap();
        let pi = set.prevalence();
        let p = decision_curve(&set, &[t]).unwrap()[0];
        prop_assert!((p.treat_all - (pi - (1.0 - pi) * t / (1.0 - t))).abs() <= 1e-12);
        prop_assert!(p.model <= pi + 1e-12);
    }
}
