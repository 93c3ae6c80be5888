use crate::error::{Error, Result};

/// Parallel arrays of scores and binary labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Shape {
                field: "labels".into(),
                expected: vec![scores.len()],
                found: vec![labels.len()],
            });
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite(format!("score at index {i}")));
        }
        Ok(Self { scores, labels })
    }

    /// Labels given as 0/1 numbers.
    pub fn from_numeric(scores: Vec<f64>, labels: &[f64]) -> Result<Self> {
        let labels = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| match y {
                1.0 => Ok(true),
                0.0 => Ok(false),
                _ => Err(Error::domain(format!("label at index {i} is {y}, expected 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(scores, labels)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn prevalence(&self) -> f64 {
        self.positives() as f64 / self.len() as f64
    }

    pub(crate) fn require_both_classes(&self, metric: &str) -> Result<()> {
        if self.positives() == 0 || self.negatives() == 0 {
            return Err(Error::UndefinedMetric(format!(
                "{metric} needs both classes ({} positives, {} negatives)",
                self.positives(),
                self.negatives()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_probabilities(&self) -> Result<()> {
        if let Some(i) = self.scores.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::domain(format!(
                "score {} at index {i} is not a probability",
                self.scores[i]
            )));
        }
        Ok(())
    }

    /// Subset by index.
    pub fn select(&self, idx: &[usize]) -> ScoredSet {
        ScoredSet {
            scores: idx.iter().map(|&i| self.scores[i]).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// `(score, label)` pairs sorted by descending score.
    pub(crate) fn descending(&self) -> Vec<(f64, bool)> {
        let mut v: Vec<(f64, bool)> = self.scores.iter().copied().zip(self.labels.iter().copied()).collect();
        v.sort_by(|a, b| b.0.total_cmp(&a.0));
        v
    }
}
