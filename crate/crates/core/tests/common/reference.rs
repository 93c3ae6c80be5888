//! Straight transcription of the deployed scoring script: group tests by
//! month, fill gaps, apply fallbacks, log-transform uACR, run the recurrence
//! and calibrate. Matrices are read out of the weights by index only; no
//! engine routine is reused.
//!
//! Interpolation runs on the month index (pandas `interpolate(method="index")`)
//! rather than the row position.

use kfrisk_core::model::ModelWeights;
use kfrisk_core::PatientRecord;

const PERCENTILES: [f64; 11] = [
    0.0, 0.001581, 0.003890, 0.004821, 0.006119, 0.007713, 0.010107, 0.013142, 0.018956,
    0.034004, 1.0,
];

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn calibration_value(value: f64) -> f64 {
    for i in 0..PERCENTILES.len() - 1 {
        if value <= PERCENTILES[i + 1] {
            return (value - PERCENTILES[i]) / PERCENTILES[i + 1] * 0.1 + i as f64 * 0.1;
        }
    }
    unreachable!("value above the last knot")
}

/// Row-major `(rows, cols, data)` view of a weight array.
fn mat(w: &ModelWeights, name: &str) -> (usize, usize, Vec<f64>) {
    let (_, a) = w.params.named().find(|(n, _)| *n == name).unwrap();
    let shape = a.shape();
    let cols = if shape.len() == 2 { shape[1] } else { shape[0] };
    let rows = if shape.len() == 2 { shape[0] } else { 1 };
    (rows, cols, a.data().to_vec())
}

/// `v @ M` for `M` of shape (len(v), cols)
fn vec_at_mat(v: &[f64], m: &(usize, usize, Vec<f64>)) -> Vec<f64> {
    let (rows, cols, d) = m;
    assert_eq!(v.len(), *rows);
    (0..*cols)
        .map(|c| (0..*rows).map(|r| v[r] * d[r * cols + c]).sum())
        .collect()
}

/// `M @ v` for `M` of shape (rows, len(v))
fn mat_at_vec(m: &(usize, usize, Vec<f64>), v: &[f64]) -> Vec<f64> {
    let (rows, cols, d) = m;
    assert_eq!(v.len(), *cols);
    (0..*rows)
        .map(|r| (0..*cols).map(|c| d[r * cols + c] * v[c]).sum())
        .collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Month-level table: (yyyymm, six columns) after group-by-mean.
fn grouped(record: &PatientRecord) -> Vec<(i64, [Option<f64>; 6])> {
    let mut keys: Vec<i64> = record
        .visits
        .iter()
        .map(|v| v.month.year() as i64 * 100 + v.month.month() as i64)
        .collect();
    keys.sort();
    keys.dedup();
    keys.iter()
        .map(|&k| {
            let same: Vec<_> = record
                .visits
                .iter()
                .filter(|v| v.month.year() as i64 * 100 + v.month.month() as i64 == k)
                .collect();
            let cols = std::array::from_fn(|c| {
                let vals: Vec<f64> = same.iter().filter_map(|v| v.values[c]).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            });
            (k, cols)
        })
        .collect()
}

fn month_index(yyyymm: i64) -> i64 {
    // the script slices two-digit years: int(str(date)[2:4]) * 12 + month
    (yyyymm / 100 % 100) * 12 + yyyymm % 100
}

/// Raw and calibrated risk for a record.
pub fn reference_predict(record: &PatientRecord, w: &ModelWeights) -> (f64, f64) {
    let data = grouped(record);
    let age = record.age;
    let gender = record.sex.code() as f64;
    let n = data.len();

    let mut interval = vec![0.0];
    for i in 0..n - 1 {
        interval.push((month_index(data[i + 1].0) - month_index(data[i].0)) as f64);
    }

    let cr = 110.0 / 88.4;
    let egfr = if gender == 2.0 {
        144.0 * (cr / 0.7_f64).powf(-1.209) * 0.993_f64.powf(age)
    } else {
        141.0 * (cr / 0.9_f64).powf(-1.209) * 0.993_f64.powf(age)
    };
    let missing = [egfr, 39.0, 2.0, 1.0, 2.4738_f64.exp(), 24.7];

    let mut x = vec![[0.0; 6]; n];
    for c in 0..6 {
        let col: Vec<Option<f64>> = data.iter().map(|d| d.1[c]).collect();
        let known: Vec<usize> = (0..n).filter(|&i| col[i].is_some()).collect();
        for i in 0..n {
            x[i][c] = if known.is_empty() {
                missing[c]
            } else if let Some(v) = col[i] {
                v
            } else if i < known[0] {
                col[known[0]].unwrap()
            } else if i > *known.last().unwrap() {
                col[*known.last().unwrap()].unwrap()
            } else {
                let lo = *known.iter().rev().find(|&&k| k < i).unwrap();
                let hi = *known.iter().find(|&&k| k > i).unwrap();
                let (tl, th, ti) = (
                    month_index(data[lo].0) as f64,
                    month_index(data[hi].0) as f64,
                    month_index(data[i].0) as f64,
                );
                let (vl, vh) = (col[lo].unwrap(), col[hi].unwrap());
                vl + (vh - vl) * (ti - tl) / (th - tl)
            };
        }
    }
    let epsilon = 1e-6;
    for row in x.iter_mut() {
        row[4] = (row[4] + epsilon).ln();
    }

    let hidden = w.hidden_size();
    let get = |name: &str| mat(w, name);
    let (w_d, b_d) = (get("W_d"), get("b_d").2);
    let (w_i, u_i, b_i) = (get("W_i"), get("U_i"), get("b_i").2);
    let (w_f, u_f, b_f) = (get("W_f"), get("U_f"), get("b_f").2);
    let (w_g, u_g, b_g) = (get("W_g"), get("U_g"), get("b_g").2);
    let (w_o, u_o, b_o) = (get("W_o"), get("U_o"), get("b_o").2);
    let mut h_t = vec![0.0; hidden];
    let mut c_t = vec![0.0; hidden];
    for t in 0..n {
        let x_t = &x[t];
        let delta_t_current = interval[t] + 0.1;
        let cs1_tb: Vec<f64> = add(&vec_at_mat(&c_t, &w_d), &b_d).iter().map(|v| v.tanh()).collect();
        let time_function = 1.0 / delta_t_current;
        let cs2_tb: Vec<f64> = cs1_tb.iter().map(|v| v * time_function).collect();
        let c_t_b: Vec<f64> = c_t.iter().zip(&cs1_tb).map(|(a, b)| a - b).collect();
        let cx_tb = add(&c_t_b, &cs2_tb);
        let gate = |wm, um, b: &Vec<f64>| add(&add(&vec_at_mat(x_t, wm), &vec_at_mat(&h_t, um)), b);
        let i_t: Vec<f64> = gate(&w_i, &u_i, &b_i).into_iter().map(sigmoid).collect();
        let f_t: Vec<f64> = gate(&w_f, &u_f, &b_f).into_iter().map(sigmoid).collect();
        let g_t: Vec<f64> = gate(&w_g, &u_g, &b_g).into_iter().map(f64::tanh).collect();
        let o_t: Vec<f64> = gate(&w_o, &u_o, &b_o).into_iter().map(sigmoid).collect();
        c_t = (0..hidden).map(|k| f_t[k] * cx_tb[k] + i_t[k] * g_t[k]).collect();
        h_t = (0..hidden).map(|k| o_t[k] * c_t[k].tanh()).collect();
    }
    let time_output: Vec<f64> = add(&mat_at_vec(&get("weight1"), &h_t), &get("bias1").2)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    let mut mix_data = time_output;
    mix_data.push(age);
    mix_data.push(gender);
    let outputs = sigmoid(mat_at_vec(&get("weight2"), &mix_data)[0] + get("bias2").2[0]);
    (outputs, calibration_value(outputs))
}
