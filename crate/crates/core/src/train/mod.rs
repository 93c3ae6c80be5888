//! Desk-scale supervised training of the time-aware LSTM.

mod adam;
mod backward;
mod finite_diff;
mod loss;
mod pipeline;
mod scheduler;
mod synth;
mod trainer;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use backward::{backward, Backward};
pub use finite_diff::{central_difference, finite_difference_oracle};
pub use loss::{bce_loss, Bce, PROB_CLAMP};
pub use pipeline::{fit_cohort, FitConfig, FitReport};
pub use scheduler::{PlateauConfig, ReduceOnPlateau};
pub use synth::{generate_synthetic_cohort, CohortSpec, SyntheticCohort};
pub use trainer::{
    fit_normalization, init_parameters, label_cohort, prepare_example, LabelledRecord, train, EpochRecord, TrainConfig,
    TrainOutcome, TrainingExample,
};
