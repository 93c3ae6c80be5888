//! The calculator's CSV upload template.
//!
//! Header (exact): `date,age,gender,egfr,albumin,ca,ph,uacr,hco3`. `date` is
//! `yyyymm`; age and gender (1 male, 2 female) are read from the first data
//! row. Blank lab cells are missing values. One file holds one patient.

use crate::clinical::Sex;
use crate::error::{Error, Result};
use crate::month::YearMonth;
use crate::preprocess::{LabVisit, NUM_LABS};

use super::record::PatientRecord;

pub const TEMPLATE_HEADER: [&str; 9] = [
    "date", "age", "gender", "egfr", "albumin", "ca", "ph", "uacr", "hco3",
];

fn parse_err(line: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

fn parse_number(line: usize, column: &str, cell: &str) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| parse_err(line, column, format!("{cell:?} is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(parse_err(line, column, format!("{cell:?} must be a non-negative finite number")));
    }
    Ok(v)
}

/// Parses a filled template. Returns the single patient it describes.
///
/// Fully blank rows are skipped; rows are sorted by month and same-month rows
/// are kept (bucketing averages them later).
pub fn parse_cohort_csv(bytes: &[u8]) -> Result<Vec<PatientRecord>> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| parse_err(1, "<header>", "file is empty"))?
        .map_err(|e| parse_err(1, "<header>", e.to_string()))?;
    if header.iter().ne(TEMPLATE_HEADER.iter().copied()) {
        return Err(parse_err(
            1,
            "<header>",
            format!(
                "header must be exactly {:?}; please do not modify the headers",
                TEMPLATE_HEADER.join(",")
            ),
        ));
    }

    let mut demographics: Option<(f64, Sex)> = None;
    let mut visits = Vec::new();
    for (i, row) in records.enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| parse_err(line, "<row>", e.to_string()))?;
        if row.iter().all(str::is_empty) {
            continue;
        }
        if row.len() != TEMPLATE_HEADER.len() {
            return Err(parse_err(
                line,
                "<row>",
                format!("expected {} cells, found {}", TEMPLATE_HEADER.len(), row.len()),
            ));
        }
        if demographics.is_none() {
            let age = parse_number(line, "age", &row[1])?;
            if age <= 0.0 {
                return Err(parse_err(line, "age", "age must be positive"));
            }
            let sex = match &row[2] {
                "1" => Sex::Male,
                "2" => Sex::Female,
                other => {
                    return Err(parse_err(
                        line,
                        "gender",
                        format!("{other:?} is not 1 (male) or 2 (female)"),
                    ))
                }
            };
            demographics = Some((age, sex));
        }
        let month: YearMonth = if row[0].len() == 6 {
            row[0]
                .parse()
                .map_err(|e: Error| parse_err(line, "date", e.to_string()))?
        } else {
            return Err(parse_err(line, "date", format!("{:?} is not yyyymm", &row[0])));
        };
        let mut values = [None; NUM_LABS];
        for (k, slot) in values.iter_mut().enumerate() {
            let cell = &row[3 + k];
            if !cell.is_empty() {
                *slot = Some(parse_number(line, TEMPLATE_HEADER[3 + k], cell)?);
            }
        }
        if values.iter().all(Option::is_none) {
            return Err(parse_err(
                line,
                "<labs>",
                "at least one of the six indicators must be filled in",
            ));
        }
        visits.push(LabVisit::new(month, values));
    }
    let (age, sex) = demographics.ok_or_else(|| parse_err(2, "<row>", "no data rows"))?;
    Ok(vec![PatientRecord::new("patient-1", age, sex, visits)])
}

/// Writes a record in template form (age and gender on the first row only).
pub fn write_template_csv(record: &PatientRecord) -> String {
    let mut out = TEMPLATE_HEADER.join(",");
    out.push('\n');
    for (i, v) in record.visits.iter().enumerate() {
        let mut cells = vec![v.month.compact()];
        if i == 0 {
            cells.push(format!("{}", record.age));
            cells.push(record.sex.code().to_string());
        } else {
            cells.push(String::new());
            cells.push(String::new());
        }
        cells.extend(v.values.iter().map(|x| x.map(|x| x.to_string()).unwrap_or_default()));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
