//! Subcommand bodies. Each returns the text to print on stdout.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use kfrisk_core::cohort::{parse_cohort_csv, CodeTables, Horizon, LabelConfig};
use kfrisk_core::eval::{
    delong_test, metric_report, metric_table, subgroup_eval, DelongTest, KfreScorer, MetricReport, RiskScorer,
    ScoredSet, SubgroupReport,
};
use kfrisk_core::kfre::{dynamic_kfre, DynamicKfre, KfreVariant};
use kfrisk_core::model::{load_weights, ModelWeights};
use kfrisk_core::service::{score_csv, ServiceError};
use kfrisk_core::train::{fit_cohort, generate_synthetic_cohort, label_cohort, CohortSpec, FitConfig};
use kfrisk_core::{PatientRecord, YearMonth};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{Format, GlobalArgs};

pub fn read_weights(global: &GlobalArgs) -> Result<ModelWeights> {
    let path = global
        .weights
        .as_ref()
        .ok_or_else(|| anyhow!("no weight file; pass --weights or set KFDEEP_WEIGHTS"))?;
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_weights(&bytes).with_context(|| format!("loading {}", path.display()))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn service_error(e: ServiceError) -> anyhow::Error {
    let lines: Vec<String> = e
        .field_errors()
        .into_iter()
        .map(|f| if f.field.is_empty() { f.message } else { format!("{}: {}", f.field, f.message) })
        .collect();
    anyhow!(lines.join("\n"))
}

pub fn predict(global: &GlobalArgs, input: &Path) -> Result<String> {
    let weights = read_weights(global)?;
    let response = score_csv(&read(input)?, &weights).map_err(service_error)?;
    match global.format {
        Format::Text => Ok(format!("The risk is {}\n", response.calibrated)),
        Format::Json => pretty(&response),
    }
}

fn single_patient(path: &Path) -> Result<PatientRecord> {
    let mut records = parse_cohort_csv(&read(path)?)?;
    match records.len() {
        1 => Ok(records.remove(0)),
        n => bail!("expected one patient in {}, found {n}", path.display()),
    }
}

#[derive(Serialize)]
struct KfreRow {
    date: YearMonth,
    variant: String,
    #[serde(flatten)]
    result: DynamicKfre,
}

pub fn kfre(global: &GlobalArgs, input: &Path, variant: &str) -> Result<String> {
    let variants: Vec<KfreVariant> = if variant.eq_ignore_ascii_case("all") {
        KfreVariant::ALL.to_vec()
    } else {
        vec![variant.parse()?]
    };
    let record = single_patient(input)?;
    let mut rows = Vec::new();
    for (i, visit) in record.visits.iter().enumerate() {
        for &v in &variants {
            rows.push(KfreRow {
                date: visit.month,
                variant: v.label(),
                result: dynamic_kfre(&record, i, v)?,
            });
        }
    }
    match global.format {
        Format::Json => pretty(&rows),
        Format::Text => {
            let mut out = String::from("date");
            for v in &variants {
                out += &format!("\t{}", v.label());
            }
            out += "\timputed\n";
            for chunk in rows.chunks(variants.len()) {
                out += &chunk[0].date.to_string();
                let mut imputed: Vec<&str> = Vec::new();
                for row in chunk {
                    out += &format!("\t{:.4}", row.result.risk);
                    imputed.extend(row.result.imputed.iter().map(String::as_str));
                }
                imputed.sort_unstable();
                imputed.dedup();
                out += &format!("\t{}\n", if imputed.is_empty() { "-".into() } else { imputed.join(",") });
            }
            Ok(out)
        }
    }
}

/// Everything `train` needs besides the records.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainJob {
    /// Seeds the synthetic cohort.
    pub seed: u64,
    pub cohort: CohortSpec,
    pub fit: FitConfig,
}

impl TrainJob {
    fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
            self.fit.split_seed = s;
            self.fit.train.seed = s;
        }
        self
    }
}

fn read_records(path: &Path) -> Result<Vec<PatientRecord>> {
    serde_json::from_slice(&read(path)?).with_context(|| format!("parsing patient records in {}", path.display()))
}

pub fn train(
    global: &GlobalArgs,
    config: Option<&Path>,
    input: Option<&Path>,
    output: &Path,
    manifest: Option<&Path>,
) -> Result<String> {
    let job: TrainJob = match config {
        Some(p) => serde_json::from_slice(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => TrainJob::default(),
    };
    let job = job.with_seed(global.seed);
    let records = match input {
        Some(p) => read_records(p)?,
        None => generate_synthetic_cohort(&job.cohort, job.seed)?.records,
    };
    let fit = fit_cohort(&records, &CodeTables::bundled(), &job.fit)?;
    fs::write(output, fit.outcome.weights.to_json_string()).with_context(|| format!("writing {}", output.display()))?;
    let mut doc = fit.outcome.manifest(&job.fit.train);
    doc["job"] = serde_json::to_value(&job)?;
    doc["split"] = json!({
        "train": fit.split.train.len(),
        "validation": fit.split.validation.len(),
        "test": fit.split.test.len(),
        "dropped": fit.dropped.len(),
    });
    let test_auroc = kfrisk_core::eval::auroc(&fit.test).ok().map(|a| a.value);
    doc["test_auroc"] = json!(test_auroc);
    if let Some(p) = manifest {
        fs::write(p, serde_json::to_string_pretty(&doc)?).with_context(|| format!("writing {}", p.display()))?;
    }
    match global.format {
        Format::Json => pretty(&doc),
        Format::Text => {
            let last = fit.outcome.history.last().expect("at least one epoch");
            Ok(format!(
                "patients {} / {} / {} (train / validation / test), {} dropped\n\
                 epochs {}, final train loss {:.4}, learning rate {:.2e}\n\
                 test AUROC {}\nweights written to {}\n",
                fit.split.train.len(),
                fit.split.validation.len(),
                fit.split.test.len(),
                fit.dropped.len(),
                fit.outcome.history.len(),
                last.train_loss,
                last.learning_rate,
                test_auroc.map_or("NA".into(), |a| format!("{a:.4}")),
                output.display()
            ))
        }
    }
}

/// Scores per model over a shared set of labels, with optional group tags.
pub struct ScoreTable {
    pub models: Vec<(String, ScoredSet)>,
    pub groups: Option<Vec<String>>,
}

pub fn parse_score_csv(bytes: &[u8]) -> Result<ScoreTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_col = header
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| anyhow!("score file needs a `label` column"))?;
    let group_col = header.iter().position(|h| h == "group");
    let model_cols: Vec<usize> = (0..header.len()).filter(|&i| i != label_col && Some(i) != group_col).collect();
    if model_cols.is_empty() {
        bail!("score file has no score columns");
    }
    let mut labels = Vec::new();
    let mut scores = vec![Vec::new(); model_cols.len()];
    let mut groups = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let number = |col: usize| -> Result<f64> {
            rec.get(col)
                .unwrap_or("")
                .parse::<f64>()
                .with_context(|| format!("line {line}, column {}: not a number", header[col]))
        };
        labels.push(number(label_col)?);
        for (k, &c) in model_cols.iter().enumerate() {
            scores[k].push(number(c)?);
        }
        if let Some(g) = group_col {
            groups.push(rec.get(g).unwrap_or("").to_string());
        }
    }
    let models = model_cols
        .iter()
        .zip(scores)
        .map(|(&c, s)| Ok((header[c].clone(), ScoredSet::from_numeric(s, &labels)?)))
        .collect::<Result<_>>()?;
    Ok(ScoreTable {
        models,
        groups: group_col.map(|_| groups),
    })
}

fn cohort_scores(global: &GlobalArgs, path: &Path, horizon: u8) -> Result<ScoreTable> {
    let horizon = Horizon::try_from(horizon)?;
    let weights = read_weights(global)?;
    let records = read_records(path)?;
    let (labelled, _) = label_cohort(&records, &CodeTables::bundled(), &LabelConfig::new(horizon))?;
    let labels: Vec<bool> = labelled.iter().map(|l| l.label.is_event()).collect();
    let score_with = |scorer: &dyn Fn(&PatientRecord) -> kfrisk_core::Result<f64>| -> Result<ScoredSet> {
        let s = labelled.iter().map(|l| scorer(&l.record)).collect::<kfrisk_core::Result<Vec<f64>>>()?;
        Ok(ScoredSet::new(s, labels.clone())?)
    };
    let mut models = vec![("model".to_string(), score_with(&|r| weights.score(r))?)];
    for variant in KfreVariant::ALL.into_iter().filter(|v| v.horizon_years == horizon.years()) {
        models.push((variant.label(), score_with(&|r| KfreScorer(variant).score(r))?));
    }
    Ok(ScoreTable { models, groups: None })
}

#[derive(Serialize)]
struct Evaluation {
    models: Vec<(String, MetricReport)>,
    /// First model against each of the others.
    comparisons: Vec<(String, String, DelongTest)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    subgroups: Option<SubgroupReport>,
}

pub fn evaluate(global: &GlobalArgs, scores: Option<&Path>, cohort: Option<&Path>, horizon: u8) -> Result<String> {
    let table = match (scores, cohort) {
        (Some(p), _) => parse_score_csv(&read(p)?)?,
        (None, Some(p)) => cohort_scores(global, p, horizon)?,
        (None, None) => bail!("pass --scores or --cohort"),
    };
    let models = table
        .models
        .iter()
        .map(|(name, s)| Ok((name.clone(), metric_report(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let (first, first_set) = &table.models[0];
    let comparisons = table.models[1..]
        .iter()
        .map(|(name, s)| Ok((first.clone(), name.clone(), delong_test(first_set, s)?)))
        .collect::<Result<Vec<_>>>()?;
    let subgroups = table.groups.as_ref().map(|g| subgroup_eval(first_set, g)).transpose()?;
    let eval = Evaluation {
        models,
        comparisons,
        subgroups,
    };
    match global.format {
        Format::Json => pretty(&eval),
        Format::Text => {
            let columns: Vec<(&str, &MetricReport)> = eval.models.iter().map(|(n, r)| (n.as_str(), r)).collect();
            let mut out = metric_table(&columns);
            for (a, b, t) in &eval.comparisons {
                out += &format!("\nDeLong {a} vs {b}: AUROC {:.4} vs {:.4}, z {:.3}, p {:.4}", t.auroc_a, t.auroc_b, t.z, t.p_value);
            }
            if let Some(sg) = &eval.subgroups {
                out += &format!("\n\nSubgroups ({first})\ngroup\tn\tpositives\tAUROC");
                for g in &sg.groups {
                    let a = g.report.as_ref().map_or("NA".into(), |r| format!("{:.4}", r.auroc.value));
                    out += &format!("\n{}\t{}\t{}\t{a}", g.name, g.n, g.positives);
                }
                for p in &sg.pairwise {
                    out += &format!("\n{} vs {}: z {:.3}, p {:.4}", p.a, p.b, p.z, p.p_value);
                }
            }
            if !out.ends_with('\n') {
                out.push('\n');
            }
            Ok(out)
        }
    }
}

pub fn simulate(global: &GlobalArgs, output: &Path, n: usize, prevalence: f64) -> Result<String> {
    let spec = CohortSpec {
        n,
        prevalence,
        ..CohortSpec::default()
    };
    let cohort = generate_synthetic_cohort(&spec, global.seed.unwrap_or(0))?;
    fs::write(output, serde_json::to_string(&cohort.records)?).with_context(|| format!("writing {}", output.display()))?;
    let summary = json!({"patients": cohort.records.len(), "events": cohort.num_events(), "output": output});
    match global.format {
        Format::Json => pretty(&summary),
        Format::Text => Ok(format!(
            "wrote {} patients ({} events) to {}\n",
            cohort.records.len(),
            cohort.num_events(),
            output.display()
        )),
    }
}
