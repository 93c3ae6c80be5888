//! Raw dated visits to a complete monthly feature sequence.
//!
//! Pipeline: [`bucket_monthly`] averages same-month observations,
//! [`impute_grid`] fills edges then interpolates interior gaps (falling back to
//! population medians for variables never observed), and
//! [`build_feature_sequence`] applies the log-uACR transform and derives the
//! month intervals fed to the recurrence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clinical::{ckd_epi_egfr, Sex};
use crate::error::{Error, Result};
use crate::month::YearMonth;

pub const NUM_LABS: usize = 6;

/// Added to uACR before taking the log.
pub const LOG_UACR_EPSILON: f64 = 1e-6;

/// The six longitudinal labs in canonical column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lab {
    /// mL/min/1.73 m²
    Egfr,
    /// g/L
    Albumin,
    /// mmol/L
    Calcium,
    /// mmol/L
    Phosphate,
    /// mg/g
    Uacr,
    /// mmol/L
    Bicarbonate,
}

impl Lab {
    pub const ALL: [Lab; NUM_LABS] = [
        Lab::Egfr,
        Lab::Albumin,
        Lab::Calcium,
        Lab::Phosphate,
        Lab::Uacr,
        Lab::Bicarbonate,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column name in the CSV template and request bodies.
    pub fn key(self) -> &'static str {
        match self {
            Lab::Egfr => "egfr",
            Lab::Albumin => "albumin",
            Lab::Calcium => "ca",
            Lab::Phosphate => "ph",
            Lab::Uacr => "uacr",
            Lab::Bicarbonate => "hco3",
        }
    }
}

pub type LabValues = [Option<f64>; NUM_LABS];

/// One dated set of lab results; any subset may be missing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabVisit {
    pub month: YearMonth,
    pub values: LabValues,
}

impl LabVisit {
    pub fn new(month: YearMonth, values: LabValues) -> Self {
        Self { month, values }
    }

    pub fn get(&self, lab: Lab) -> Option<f64> {
        self.values[lab.index()]
    }

    pub fn has_any(&self) -> bool {
        self.values.iter().any(Option::is_some)
    }
}

/// One row per observed calendar month, strictly increasing; gaps between
/// months are kept as gaps.
#[derive(Clone, Debug, PartialEq)]
pub struct MonthlyGrid {
    rows: Vec<LabVisit>,
}

impl MonthlyGrid {
    /// Builds a grid from rows that are already monthly.
    pub fn from_rows(rows: Vec<LabVisit>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("monthly grid has no rows".into()));
        }
        if rows.windows(2).any(|w| w[0].month >= w[1].month) {
            return Err(Error::domain("grid months must be strictly increasing"));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[LabVisit] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.values.iter().all(Option::is_some))
    }

    /// Grid restricted to its first `n` months.
    pub fn prefix(&self, n: usize) -> MonthlyGrid {
        MonthlyGrid {
            rows: self.rows[..n.min(self.rows.len())].to_vec(),
        }
    }
}

/// Per-patient values used when a variable was never observed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FallbackMedians {
    pub values: [f64; NUM_LABS],
}

impl FallbackMedians {
    /// Deployed defaults; eGFR comes from CKD-EPI at creatinine 110 µmol/L.
    pub fn for_patient(age: f64, sex: Sex) -> Result<Self> {
        let egfr = ckd_epi_egfr(110.0, age, sex)?;
        Ok(Self {
            values: [egfr, 39.0, 2.0, 1.0, 2.4738_f64.exp(), 24.7],
        })
    }

    pub fn get(&self, lab: Lab) -> f64 {
        self.values[lab.index()]
    }
}

/// Model-ready sequence: complete feature rows in canonical order with
/// uACR log-transformed, plus month intervals (first interval is 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSequence {
    pub rows: Vec<[f64; NUM_LABS]>,
    pub intervals: Vec<f64>,
}

impl FeatureSequence {
    pub fn new(rows: Vec<[f64; NUM_LABS]>, intervals: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("feature sequence has no steps".into()));
        }
        if rows.len() != intervals.len() {
            return Err(Error::domain("rows and intervals differ in length"));
        }
        if intervals.iter().any(|&d| !(d.is_finite() && d >= 0.0)) {
            return Err(Error::domain("intervals must be finite and non-negative"));
        }
        Ok(Self { rows, intervals })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn prefix(&self, n: usize) -> FeatureSequence {
        let n = n.min(self.rows.len());
        FeatureSequence {
            rows: self.rows[..n].to_vec(),
            intervals: self.intervals[..n].to_vec(),
        }
    }
}

/// Averages each variable's non-missing observations within a calendar month.
pub fn bucket_monthly(visits: &[LabVisit]) -> Result<MonthlyGrid> {
    if visits.is_empty() {
        return Err(Error::Empty("no visits to bucket".into()));
    }
    let mut sums: BTreeMap<YearMonth, [(f64, u32); NUM_LABS]> = BTreeMap::new();
    for v in visits {
        let slot = sums.entry(v.month).or_insert([(0.0, 0); NUM_LABS]);
        for (acc, value) in slot.iter_mut().zip(v.values) {
            if let Some(x) = value {
                if !x.is_finite() {
                    return Err(Error::NonFinite(format!("lab value at {}", v.month)));
                }
                acc.0 += x;
                acc.1 += 1;
            }
        }
    }
    let rows = sums
        .into_iter()
        .map(|(month, acc)| {
            let values = acc.map(|(sum, n)| (n > 0).then(|| sum / n as f64));
            LabVisit { month, values }
        })
        .collect();
    Ok(MonthlyGrid { rows })
}

/// Step 1: copy the first observation backwards to the start and the last
/// observation forwards to the end. Variables never observed stay missing.
pub fn fill_edges(grid: &mut MonthlyGrid) {
    for lab in 0..NUM_LABS {
        let observed: Vec<usize> = (0..grid.rows.len())
            .filter(|&r| grid.rows[r].values[lab].is_some())
            .collect();
        let (Some(&first), Some(&last)) = (observed.first(), observed.last()) else {
            continue;
        };
        let head = grid.rows[first].values[lab];
        let tail = grid.rows[last].values[lab];
        for row in &mut grid.rows[..first] {
            row.values[lab] = head;
        }
        for row in &mut grid.rows[last + 1..] {
            row.values[lab] = tail;
        }
    }
}

/// Step 2: linear interpolation across interior gaps, with time measured in
/// months between the observations bracketing each gap.
pub fn interpolate_interior(grid: &mut MonthlyGrid) {
    for lab in 0..NUM_LABS {
        let mut last_seen: Option<usize> = None;
        for r in 0..grid.rows.len() {
            let Some(x2) = grid.rows[r].values[lab] else {
                continue;
            };
            if let Some(l) = last_seen {
                if r > l + 1 {
                    let x1 = grid.rows[l].values[lab].expect("observed");
                    let t1 = grid.rows[l].month;
                    let span = grid.rows[r].month.months_since(t1) as f64;
                    for k in l + 1..r {
                        let dt = grid.rows[k].month.months_since(t1) as f64;
                        grid.rows[k].values[lab] = Some(x1 + (x2 - x1) * dt / span);
                    }
                }
            }
            last_seen = Some(r);
        }
    }
}

/// Step 3: variables with no observation at all take the fallback median.
pub fn fill_unobserved(grid: &mut MonthlyGrid, fallback: &FallbackMedians) {
    for lab in 0..NUM_LABS {
        if grid.rows.iter().all(|r| r.values[lab].is_none()) {
            for row in &mut grid.rows {
                row.values[lab] = Some(fallback.values[lab]);
            }
        }
    }
}

/// Three-step imputation. The result is complete and observed cells are untouched.
pub fn impute_grid(grid: &MonthlyGrid, fallback: &FallbackMedians) -> MonthlyGrid {
    let mut out = grid.clone();
    fill_edges(&mut out);
    interpolate_interior(&mut out);
    fill_unobserved(&mut out, fallback);
    out
}

pub fn build_feature_sequence(grid: &MonthlyGrid) -> Result<FeatureSequence> {
    if grid.is_empty() {
        return Err(Error::Empty("grid has no rows".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    let mut intervals = Vec::with_capacity(grid.len());
    let mut prev: Option<YearMonth> = None;
    for row in &grid.rows {
        let mut x = [0.0; NUM_LABS];
        for (lab, slot) in Lab::ALL.iter().zip(x.iter_mut()) {
            *slot = row.values[lab.index()].ok_or_else(|| {
                Error::domain(format!("{} missing at {}; impute first", lab.key(), row.month))
            })?;
        }
        let shifted = x[Lab::Uacr.index()] + LOG_UACR_EPSILON;
        if shifted <= 0.0 {
            return Err(Error::domain(format!("uACR {} has no logarithm", x[Lab::Uacr.index()])));
        }
        x[Lab::Uacr.index()] = shifted.ln();
        rows.push(x);
        intervals.push(prev.map_or(0.0, |p| row.month.months_since(p) as f64));
        prev = Some(row.month);
    }
    Ok(FeatureSequence { rows, intervals })
}

/// Bucket, impute and transform in one call.
pub fn preprocess_visits(visits: &[LabVisit], age: f64, sex: Sex) -> Result<FeatureSequence> {
    let grid = bucket_monthly(visits)?;
    let fallback = FallbackMedians::for_patient(age, sex)?;
    build_feature_sequence(&impute_grid(&grid, &fallback))
}
