//! Worked imputation example: six labs for one patient over seven months.
//!
//! The input is the observed table at its printed precision. Each row is
//! `month, egfr, albumin, ca, ph, uacr, hco3` with blanks for missing cells.

use kfrisk_core::preprocess::{bucket_monthly, fill_edges, impute_grid, FallbackMedians, LabVisit, MonthlyGrid};
use kfrisk_core::{Sex, YearMonth};

pub const OBSERVED: [&str; 7] = [
    "2010/01,,44.1,2.40,1.29,337.41,",
    "2010/04,31.37,39.9,,1.31,229.07,28.0",
    "2010/05,29.88,39.6,2.25,1.22,201.99,",
    "2010/06,28.89,44.5,2.43,1.07,,29.5",
    "2011/01,30.08,44.3,2.27,1.29,66.56,31.0",
    "2011/02,32.06,45.6,2.29,1.27,337.41,29.6",
    "2011/07,27.96,43.9,2.31,1.38,,",
];

pub const EDGE_FILLED: [&str; 7] = [
    "2010/01,31.37,44.1,2.40,1.29,337.41,28.0",
    "2010/04,31.37,39.9,,1.31,229.07,28.0",
    "2010/05,29.88,39.6,2.25,1.22,201.99,",
    "2010/06,28.89,44.5,2.43,1.07,,29.5",
    "2011/01,30.08,44.3,2.27,1.29,66.56,31.0",
    "2011/02,32.06,45.6,2.29,1.27,337.41,29.6",
    "2011/07,27.96,43.9,2.31,1.38,337.41,29.6",
];

pub const IMPUTED: [&str; 7] = [
    "2010/01,31.37,44.1,2.40,1.29,337.41,28.0",
    "2010/04,31.37,39.9,2.29,1.31,229.07,28.0",
    "2010/05,29.88,39.6,2.25,1.22,201.99,28.8",
    "2010/06,28.89,44.5,2.43,1.07,185.06,29.5",
    "2011/01,30.08,44.3,2.27,1.29,66.56,31.0",
    "2011/02,32.06,45.6,2.29,1.27,337.41,29.6",
    "2011/07,27.96,43.9,2.31,1.38,337.41,29.6",
];

fn cells(line: &str) -> (YearMonth, Vec<&str>) {
    let mut parts = line.split(',');
    let month = parts.next().unwrap().parse().unwrap();
    (month, parts.collect())
}

pub fn observed_visits() -> Vec<LabVisit> {
    OBSERVED
        .iter()
        .map(|line| {
            let (month, cells) = cells(line);
            let values = std::array::from_fn(|k| (!cells[k].is_empty()).then(|| cells[k].parse().unwrap()));
            LabVisit::new(month, values)
        })
        .collect()
}

/// Cells that differ from `expected` when printed with the same number of
/// decimals, as `(row, column, printed, expected)`.
pub fn mismatches(grid: &MonthlyGrid, expected: &[&str]) -> Vec<(usize, usize, String, String)> {
    let mut out = Vec::new();
    assert_eq!(grid.len(), expected.len());
    for (r, (row, line)) in grid.rows().iter().zip(expected).enumerate() {
        let (month, want) = cells(line);
        assert_eq!(row.month, month);
        for (c, (value, want)) in row.values.iter().zip(want).enumerate() {
            let decimals = want.split('.').nth(1).map_or(0, str::len);
            let got = value.map_or(String::new(), |v| format!("{v:.decimals$}"));
            if got != want {
                out.push((r, c, got, want.to_string()));
            }
        }
    }
    out
}

pub fn edge_filled() -> MonthlyGrid {
    let mut grid = bucket_monthly(&observed_visits()).unwrap();
    fill_edges(&mut grid);
    grid
}

pub fn imputed() -> MonthlyGrid {
    let grid = bucket_monthly(&observed_visits()).unwrap();
    impute_grid(&grid, &FallbackMedians::for_patient(60.0, Sex::Male).unwrap())
}
