//! Time-aware LSTM scoring path.

mod array;
mod tlstm;
mod weights;

pub use array::Array;
pub use tlstm::{
    calibrate, cell_step, cell_step_traced, decay, forward_and_head, forward_traced, head,
    normalize_inputs, predict, predict_batch, CellState, ForwardTrace, HeadTrace, RiskPrediction,
    StepTrace, TrajectoryPoint, DECAY_OFFSET, HEAD_HIDDEN, INPUT_SIZE, STATIC_FEATURES,
};
pub use weights::{
    load_weights, ModelWeights, Normalization, Parameters, DEFAULT_HIDDEN_SIZE,
    DEFAULT_PERCENTILES, PARAMETER_NAMES,
};
