use serde::{Deserialize, Serialize};

use super::weights::{ModelWeights, Parameters};
use crate::clinical::Sex;
use crate::cohort::PatientRecord;
use crate::error::{Error, Result};
use crate::month::YearMonth;
use crate::par::{self, Execution};
use crate::preprocess::{
    bucket_monthly, build_feature_sequence, impute_grid, FallbackMedians, FeatureSequence,
    NUM_LABS,
};

pub const INPUT_SIZE: usize = NUM_LABS;
/// Width of the first head layer.
pub const HEAD_HIDDEN: usize = 6;
/// Age and sex code appended to the head embedding.
pub const STATIC_FEATURES: usize = 2;
/// Offset added to the month interval before inverting it.
pub const DECAY_OFFSET: f64 = 0.1;

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Short-memory discount factor `1 / (Δt + 0.1)` for an interval in months.
pub fn decay(dt: f64) -> Result<f64> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::domain(format!("interval must be non-negative, got {dt}")));
    }
    Ok(1.0 / (dt + DECAY_OFFSET))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellState {
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            c: vec![0.0; hidden],
            h: vec![0.0; hidden],
        }
    }
}

/// Intermediates of one recurrence step, kept for backpropagation.
#[derive(Clone, Debug)]
pub struct StepTrace {
    pub x: [f64; INPUT_SIZE],
    pub c_prev: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub decay: f64,
    /// Short-term memory `tanh(C·W_d + b_d)`.
    pub short: Vec<f64>,
    /// Adjusted memory `C − short + short·decay`.
    pub adjusted: Vec<f64>,
    pub input_gate: Vec<f64>,
    pub forget_gate: Vec<f64>,
    pub output_gate: Vec<f64>,
    pub candidate: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

fn gate(x: &[f64], h: &[f64], w: &super::Array, u: &super::Array, b: &super::Array) -> Vec<f64> {
    let mut z = w.vec_mul(x);
    for ((zi, hu), bi) in z.iter_mut().zip(u.vec_mul(h)).zip(b.data()) {
        *zi += hu + bi;
    }
    z
}

/// One recurrence step with all intermediates retained.
pub fn cell_step_traced(
    state: &CellState,
    x: &[f64; INPUT_SIZE],
    dt: f64,
    p: &Parameters,
) -> Result<(CellState, StepTrace)> {
    let g = decay(dt)?;
    let short: Vec<f64> = gate_bias(&p.w_d.vec_mul(&state.c), &p.b_d)
        .into_iter()
        .map(f64::tanh)
        .collect();
    let adjusted: Vec<f64> = state
        .c
        .iter()
        .zip(&short)
        .map(|(c, s)| (c - s) + s * g)
        .collect();
    let input_gate: Vec<f64> = gate(x, &state.h, &p.w_i, &p.u_i, &p.b_i)
        .into_iter()
        .map(sigmoid)
        .collect();
    let forget_gate: Vec<f64> = gate(x, &state.h, &p.w_f, &p.u_f, &p.b_f)
        .into_iter()
        .map(sigmoid)
        .collect();
    let candidate: Vec<f64> = gate(x, &state.h, &p.w_g, &p.u_g, &p.b_g)
        .into_iter()
        .map(f64::tanh)
        .collect();
    let output_gate: Vec<f64> = gate(x, &state.h, &p.w_o, &p.u_o, &p.b_o)
        .into_iter()
        .map(sigmoid)
        .collect();
    let c: Vec<f64> = (0..adjusted.len())
        .map(|k| forget_gate[k] * adjusted[k] + input_gate[k] * candidate[k])
        .collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h: Vec<f64> = output_gate.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();
    if c.iter().chain(&h).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("recurrent state".into()));
    }
    let trace = StepTrace {
        x: *x,
        c_prev: state.c.clone(),
        h_prev: state.h.clone(),
        decay: g,
        short,
        adjusted,
        input_gate,
        forget_gate,
        output_gate,
        candidate,
        c: c.clone(),
        tanh_c,
    };
    Ok((CellState { c, h }, trace))
}

fn gate_bias(z: &[f64], b: &super::Array) -> Vec<f64> {
    z.iter().zip(b.data()).map(|(a, b)| a + b).collect()
}

pub fn cell_step(
    state: &CellState,
    x: &[f64; INPUT_SIZE],
    dt: f64,
    p: &Parameters,
) -> Result<CellState> {
    cell_step_traced(state, x, dt, p).map(|(s, _)| s)
}

/// Intermediates of the two-layer head.
#[derive(Clone, Debug)]
pub struct HeadTrace {
    pub h_last: Vec<f64>,
    pub embedding_pre: Vec<f64>,
    /// `[ReLU(weight1·h + bias1); age; sex]`
    pub joined: Vec<f64>,
    pub logit: f64,
    pub prob: f64,
}

pub fn head(h_last: &[f64], age: f64, sex_code: f64, p: &Parameters) -> HeadTrace {
    let embedding_pre = gate_bias(&p.weight1.mul_vec(h_last), &p.bias1);
    let mut joined: Vec<f64> = embedding_pre.iter().map(|&v| v.max(0.0)).collect();
    joined.push(age);
    joined.push(sex_code);
    let logit = p.weight2.mul_vec(&joined)[0] + p.bias2.data()[0];
    HeadTrace {
        h_last: h_last.to_vec(),
        embedding_pre,
        joined,
        logit,
        prob: sigmoid(logit),
    }
}

/// Applies the stored standardisation (if any) to features and age.
pub fn normalize_inputs(
    seq: &FeatureSequence,
    age: f64,
    w: &ModelWeights,
) -> (Vec<[f64; INPUT_SIZE]>, f64) {
    match &w.normalization {
        None => (seq.rows.clone(), age),
        Some(n) => {
            let rows = seq
                .rows
                .iter()
                .map(|r| std::array::from_fn(|k| (r[k] - n.feature_mean[k]) / n.feature_std[k]))
                .collect();
            (rows, (age - n.age_mean) / n.age_std)
        }
    }
}

#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub steps: Vec<StepTrace>,
    pub head: HeadTrace,
}

pub fn forward_traced(
    seq: &FeatureSequence,
    age: f64,
    sex: Sex,
    w: &ModelWeights,
) -> Result<ForwardTrace> {
    if seq.is_empty() {
        return Err(Error::Empty("feature sequence has no steps".into()));
    }
    let (rows, age) = normalize_inputs(seq, age, w);
    let mut state = CellState::zeros(w.hidden_size());
    let mut steps = Vec::with_capacity(rows.len());
    for (x, &dt) in rows.iter().zip(&seq.intervals) {
        let (next, trace) = cell_step_traced(&state, x, dt, &w.params)?;
        steps.push(trace);
        state = next;
    }
    let head = head(&state.h, age, sex.code() as f64, &w.params);
    if !head.prob.is_finite() {
        return Err(Error::NonFinite("head output".into()));
    }
    Ok(ForwardTrace { steps, head })
}

/// Raw event probability for one patient sequence.
pub fn forward_and_head(seq: &FeatureSequence, age: f64, sex: Sex, w: &ModelWeights) -> Result<f64> {
    forward_traced(seq, age, sex, w).map(|t| t.head.prob)
}

/// Maps a raw probability onto the population-percentile scale.
///
/// Reproduces the deployed formula exactly, including the division by the
/// upper knot rather than the bin width.
pub fn calibrate(raw: f64, percentiles: &[f64]) -> Result<f64> {
    if !(0.0..=1.0).contains(&raw) {
        return Err(Error::domain(format!("raw probability {raw} outside [0, 1]")));
    }
    let step = 1.0 / (percentiles.len() - 1) as f64;
    for i in 0..percentiles.len() - 1 {
        if raw <= percentiles[i + 1] {
            return Ok((raw - percentiles[i]) / percentiles[i + 1] * step + i as f64 * step);
        }
    }
    Err(Error::domain("percentile knots do not cover [0, 1]"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub month: YearMonth,
    pub raw: f64,
    pub calibrated: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskPrediction {
    pub raw: f64,
    pub calibrated: f64,
    /// Score after each successive month of data; the last point equals the
    /// overall prediction.
    pub trajectory: Vec<TrajectoryPoint>,
}

/// Full pipeline: bucket, impute each month-prefix, run the model, calibrate.
pub fn predict(record: &PatientRecord, w: &ModelWeights) -> Result<RiskPrediction> {
    let grid = bucket_monthly(&record.visits)?;
    let fallback = FallbackMedians::for_patient(record.age, record.sex)?;
    let mut trajectory = Vec::with_capacity(grid.len());
    for k in 1..=grid.len() {
        let prefix = grid.prefix(k);
        let seq = build_feature_sequence(&impute_grid(&prefix, &fallback))?;
        let raw = forward_and_head(&seq, record.age, record.sex, w)?;
        trajectory.push(TrajectoryPoint {
            month: prefix.rows()[k - 1].month,
            raw,
            calibrated: calibrate(raw, &w.percentiles)?,
        });
    }
    let last = *trajectory.last().expect("grid is non-empty");
    Ok(RiskPrediction {
        raw: last.raw,
        calibrated: last.calibrated,
        trajectory,
    })
}

pub fn predict_batch(
    records: &[PatientRecord],
    w: &ModelWeights,
    exec: Execution,
) -> Vec<Result<RiskPrediction>> {
    par::map(exec, records, |r| predict(r, w))
}
