//! Closed-form clinical conversions.
//!
//! Creatinine is always in µmol/L; callers holding mg/dL must multiply by 88.4
//! first. uACR and PCR are in mg/g.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// µmol/L per mg/dL of serum creatinine.
pub const CREATININE_UMOL_PER_MGDL: f64 = 88.4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Sex {
    Male = 1,
    Female = 2,
}

impl Sex {
    /// Transport code: 1 = male, 2 = female.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Sex::Male),
            2 => Ok(Sex::Female),
            other => Err(Error::domain(format!(
                "sex code {other} is not 1 (male) or 2 (female)"
            ))),
        }
    }

    pub fn is_male(self) -> bool {
        self == Sex::Male
    }
}

impl TryFrom<u8> for Sex {
    type Error = Error;
    fn try_from(code: u8) -> Result<Self> {
        Sex::from_code(code)
    }
}

impl From<Sex> for u8 {
    fn from(s: Sex) -> u8 {
        s.code()
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::Male => "male",
            Sex::Female => "female",
        })
    }
}

/// Semi-quantitative urine dipstick protein reading, in increasing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DipstickCategory {
    Negative,
    Trace,
    Plus,
    PlusPlus,
    MoreThanPlus,
}

impl DipstickCategory {
    pub const ALL: [DipstickCategory; 5] = [
        DipstickCategory::Negative,
        DipstickCategory::Trace,
        DipstickCategory::Plus,
        DipstickCategory::PlusPlus,
        DipstickCategory::MoreThanPlus,
    ];

    fn coefficient(self) -> f64 {
        match self {
            DipstickCategory::Negative => 0.0,
            DipstickCategory::Trace => 0.7539,
            DipstickCategory::Plus => 1.7243,
            DipstickCategory::PlusPlus => 3.3475,
            DipstickCategory::MoreThanPlus => 4.6399,
        }
    }
}

/// Case-insensitive: `-`, `trace`, `+`, `++`, `>+` (plus a few spelled-out aliases).
impl FromStr for DipstickCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "-" | "negative" | "neg" => Ok(DipstickCategory::Negative),
            "trace" | "+-" | "±" => Ok(DipstickCategory::Trace),
            "+" | "plus" => Ok(DipstickCategory::Plus),
            "++" | "plusplus" => Ok(DipstickCategory::PlusPlus),
            ">+" | ">++" | "+++" | "more_than_plus" => Ok(DipstickCategory::MoreThanPlus),
            other => Err(Error::domain(format!("unknown dipstick category {other:?}"))),
        }
    }
}

/// CKD-EPI creatinine equation (mL/min/1.73 m²).
pub fn ckd_epi_egfr(scr_umol: f64, age: f64, sex: Sex) -> Result<f64> {
    if !(scr_umol.is_finite() && scr_umol > 0.0) {
        return Err(Error::domain(format!("creatinine must be positive, got {scr_umol}")));
    }
    if !(age.is_finite() && age >= 0.0) {
        return Err(Error::domain(format!("age must be non-negative, got {age}")));
    }
    let scr = scr_umol / CREATININE_UMOL_PER_MGDL;
    let (kappa, low_exponent, scale) = match sex {
        Sex::Female => (0.7, -0.329, 144.0),
        Sex::Male => (0.9, -0.411, 141.0),
    };
    let exponent = if scr <= kappa { low_exponent } else { -1.209 };
    Ok(scale * (scr / kappa).powf(exponent) * 0.993_f64.powf(age))
}

pub fn uacr_from_dipstick(category: DipstickCategory) -> f64 {
    (2.4738 + category.coefficient()).exp()
}

/// uACR (mg/g) from a urine protein-to-creatinine ratio (mg/g).
pub fn uacr_from_pcr(pcr: f64) -> Result<f64> {
    if !(pcr.is_finite() && pcr > 0.0) {
        return Err(Error::domain(format!("PCR must be positive, got {pcr}")));
    }
    let lp = 5.3920
        + 0.3072 * (pcr / 50.0).min(1.0).ln()
        + 1.5793 * (pcr / 500.0).clamp(0.1, 1.0).ln()
        + 1.1266 * (pcr / 500.0).max(1.0).ln();
    Ok(lp.exp())
}
