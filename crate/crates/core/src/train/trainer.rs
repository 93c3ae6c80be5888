use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::backward::backward;
use super::loss::bce_loss;
use super::scheduler::{PlateauConfig, ReduceOnPlateau};
use crate::clinical::Sex;
use crate::cohort::{blank_pre_outcome, label_outcome, CodeTables, LabelConfig, OutcomeLabel, PatientRecord};
use crate::error::{Error, Result};
use crate::model::{
    forward_and_head, ModelWeights, Normalization, Parameters, DEFAULT_HIDDEN_SIZE,
    DEFAULT_PERCENTILES, INPUT_SIZE,
};
use crate::par::{self, Execution};
use crate::preprocess::{preprocess_visits, FeatureSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub scheduler: PlateauConfig,
    pub adam: AdamConfig,
    pub hidden_size: usize,
    /// z-score features and age with training-set statistics.
    pub normalize: bool,
    pub seed: u64,
    pub execution: Execution,
    /// Return the weights from the epoch with the lowest validation loss
    /// instead of the last epoch.
    pub restore_best: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            batch_size: 16,
            epochs: 20,
            scheduler: PlateauConfig::default(),
            adam: AdamConfig::default(),
            hidden_size: DEFAULT_HIDDEN_SIZE,
            normalize: true,
            seed: 0,
            execution: Execution::Sequential,
            restore_best: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 || self.hidden_size == 0 {
            return Err(Error::Config(
                "batch_size, epochs and hidden_size must be positive".into(),
            ));
        }
        let f = self.scheduler.factor;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!("scheduler factor must be in (0, 1), got {f}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingExample {
    pub seq: FeatureSequence,
    pub age: f64,
    pub sex: Sex,
    pub label: f64,
}

/// Imputes a record's full history into a labelled training example.
pub fn prepare_example(record: &PatientRecord, label: f64) -> Result<TrainingExample> {
    if label != 0.0 && label != 1.0 {
        return Err(Error::domain(format!("label must be 0 or 1, got {label}")));
    }
    Ok(TrainingExample {
        seq: preprocess_visits(&record.visits, record.age, record.sex)?,
        age: record.age,
        sex: record.sex,
        label,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelledRecord {
    /// Record with pre-outcome visits blanked.
    pub record: PatientRecord,
    pub label: OutcomeLabel,
}

/// Labels every record, blanks the leakage window and drops records left
/// without visits. Returns the kept records and the ids of dropped ones.
pub fn label_cohort(
    records: &[PatientRecord],
    tables: &CodeTables,
    config: &LabelConfig,
) -> Result<(Vec<LabelledRecord>, Vec<String>)> {
    let mut kept = Vec::with_capacity(records.len());
    let mut dropped = Vec::new();
    for r in records {
        let label = label_outcome(r, tables, config)?;
        let blanked = blank_pre_outcome(r, &label);
        if blanked.excluded {
            dropped.push(r.id.clone());
        } else {
            kept.push(LabelledRecord {
                record: blanked.record,
                label,
            });
        }
    }
    Ok((kept, dropped))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: Option<f64>,
    /// Rate used during this epoch.
    pub learning_rate: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub weights: ModelWeights,
    pub history: Vec<EpochRecord>,
    /// Number of predictions whose probability hit the loss clamp.
    pub clamp_events: usize,
}

impl TrainOutcome {
    /// Config, seed and loss history as a JSON document.
    pub fn manifest(&self, config: &TrainConfig) -> Value {
        json!({
            "config": config,
            "seed": config.seed,
            "clamp_events": self.clamp_events,
            "history": self.history,
        })
    }
}

/// Per-feature mean and population standard deviation over every step of every
/// training sequence; a zero spread is replaced by 1.
pub fn fit_normalization(examples: &[TrainingExample]) -> Result<Normalization> {
    let rows: Vec<&[f64; INPUT_SIZE]> = examples.iter().flat_map(|e| &e.seq.rows).collect();
    if rows.is_empty() {
        return Err(Error::Empty("no training rows".into()));
    }
    let n = rows.len() as f64;
    let mut feature_mean = [0.0; INPUT_SIZE];
    let mut feature_std = [0.0; INPUT_SIZE];
    for k in 0..INPUT_SIZE {
        let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n;
        feature_mean[k] = mean;
        feature_std[k] = spread(var);
    }
    let m = examples.len() as f64;
    let age_mean = examples.iter().map(|e| e.age).sum::<f64>() / m;
    let age_var = examples.iter().map(|e| (e.age - age_mean).powi(2)).sum::<f64>() / m;
    Ok(Normalization {
        feature_mean,
        feature_std,
        age_mean,
        age_std: spread(age_var),
    })
}

fn spread(var: f64) -> f64 {
    let sd = var.sqrt();
    if sd > 1e-12 {
        sd
    } else {
        1.0
    }
}

/// Uniform in ±1/√fan_in, where fan_in is the length of the vector each
/// matrix is multiplied with; biases share their matrix's bound.
pub fn init_parameters(hidden: usize, seed: u64) -> Parameters {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Parameters::zeros(hidden);
    let h = hidden as f64;
    let x = INPUT_SIZE as f64;
    let head_in = p.weight2.cols() as f64;
    let fans = [
        h, h, x, h, h, x, h, h, x, h, h, x, h, h, h, h, head_in, head_in,
    ];
    for (a, fan) in p.arrays_mut().into_iter().zip(fans) {
        let bound = 1.0 / fan.sqrt();
        for v in a.data_mut() {
            *v = rng.random_range(-bound..bound);
        }
    }
    p
}

fn mean_loss(examples: &[TrainingExample], w: &ModelWeights, exec: Execution) -> Result<f64> {
    let losses = par::map(exec, examples, |e| {
        forward_and_head(&e.seq, e.age, e.sex, w).map(|p| bce_loss(p, e.label).loss)
    });
    let mut total = 0.0;
    for l in losses {
        total += l?;
    }
    Ok(total / examples.len() as f64)
}

/// Mini-batch Adam on BCE with reduce-on-plateau driven by validation loss
/// (training loss when `validation` is empty).
///
/// Per-sample gradients may be computed concurrently; they are always summed
/// in batch order, so results do not depend on `config.execution`.
pub fn train(
    train_set: &[TrainingExample],
    validation: &[TrainingExample],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training cohort is empty".into()));
    }
    let normalization = if config.normalize {
        Some(fit_normalization(train_set)?)
    } else {
        None
    };
    let mut weights = ModelWeights::new(
        init_parameters(config.hidden_size, config.seed),
        DEFAULT_PERCENTILES.to_vec(),
        normalization,
    )?;
    let mut adam = AdamState::new(config.hidden_size, config.adam);
    let mut scheduler = ReduceOnPlateau::new(config.learning_rate, config.scheduler);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut clamp_events = 0;
    let mut best: Option<(f64, Parameters)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let lr = scheduler.lr();
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let results = par::map(config.execution, batch, |&i| {
                let e = &train_set[i];
                backward(&e.seq, e.age, e.sex, e.label, &weights)
            });
            let mut grads = Parameters::zeros(config.hidden_size);
            for r in results {
                let b = r?;
                epoch_loss += b.loss;
                clamp_events += usize::from(b.clamped);
                grads.add_assign(&b.grads);
            }
            grads.scale(1.0 / batch.len() as f64);
            adam_step(&mut weights.params, &grads, &mut adam, lr)?;
        }
        if let Some(name) = weights.params.first_non_finite() {
            return Err(Error::NonFinite(format!("parameter {name} after epoch {epoch}")));
        }
        let train_loss = epoch_loss / train_set.len() as f64;
        let validation_loss = if validation.is_empty() {
            None
        } else {
            Some(mean_loss(validation, &weights, config.execution)?)
        };
        if let (true, Some(v)) = (config.restore_best, validation_loss) {
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, weights.params.clone()));
            }
        }
        scheduler.step(validation_loss.unwrap_or(train_loss));
        history.push(EpochRecord {
            epoch,
            train_loss,
            validation_loss,
            learning_rate: lr,
        });
    }
    if let Some((_, params)) = best {
        weights.params = params;
    }
    Ok(TrainOutcome {
        weights,
        history,
        clamp_events,
    })
}
