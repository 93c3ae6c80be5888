mod common;

use common::reference::reference_predict;
use common::{random_record, random_weights, rng};
use kfrisk_core::model::{predict, predict_batch};
use kfrisk_core::Execution;

#[test]
fn engine_matches_reference_script() {
    let mut r = rng(100);
    let mut worst = 0.0_f64;
    for i in 0..150 {
        let w = random_weights(&mut r, 16, 0.5);
        let rec = random_record(&mut r, i);
        let engine = predict(&rec, &w).unwrap();
        let (raw, calibrated) = reference_predict(&rec, &w);
        worst = worst.max((engine.raw - raw).abs()).max((engine.calibrated - calibrated).abs());
        // every trajectory point is the score of a shorter history
        for (k, point) in engine.trajectory.iter().enumerate() {
            let (raw_k, _) = reference_predict(&rec.first_visit_months(k + 1), &w);
            assert!((point.raw - raw_k).abs() <= 1e-9, "patient {i}, prefix {}", k + 1);
        }
    }
    assert!(worst <= 1e-9, "worst deviation {worst:e}");
}

#[test]
fn batch_scoring_is_order_preserving() {
    let mut r = rng(101);
    let w = random_weights(&mut r, 16, 0.5);
    let records: Vec<_> = (0..64).map(|i| random_record(&mut r, i)).collect();
    let seq = predict_batch(&records, &w, Execution::Sequential);
    let par = predict_batch(&records, &w, Execution::Parallel);
    for ((a, b), rec) in seq.iter().zip(&par).zip(&records) {
        assert_eq!(a.as_ref().unwrap(), b.as_ref().unwrap());
        assert!((a.as_ref().unwrap().raw - reference_predict(rec, &w).0).abs() <= 1e-12);
    }
}
