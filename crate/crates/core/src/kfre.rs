//! Kidney Failure Risk Equations, non-North-America calibration.
//!
//! `risk = 1 − S₀^exp(LP)` with a centred linear predictor. The equations use
//! conventional units (albumin g/dL, phosphate and calcium mg/dL, HCO₃ mEq/L);
//! [`KfreInputs::from_si`] converts the SI units used everywhere else in the
//! crate.

use serde::{Deserialize, Serialize};

use crate::clinical::Sex;
use crate::cohort::PatientRecord;
use crate::error::{Error, Result};
use crate::preprocess::{FallbackMedians, Lab};

/// mg/dL per mmol/L.
pub const CALCIUM_MGDL_PER_MMOL: f64 = 4.008;
pub const PHOSPHATE_MGDL_PER_MMOL: f64 = 3.097;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KfreVariables {
    Four,
    Eight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KfreVariant {
    pub variables: KfreVariables,
    pub horizon_years: u8,
}

impl KfreVariant {
    pub const FOUR_TWO: KfreVariant = KfreVariant::new_unchecked(KfreVariables::Four, 2);
    pub const EIGHT_TWO: KfreVariant = KfreVariant::new_unchecked(KfreVariables::Eight, 2);
    pub const FOUR_FIVE: KfreVariant = KfreVariant::new_unchecked(KfreVariables::Four, 5);
    pub const EIGHT_FIVE: KfreVariant = KfreVariant::new_unchecked(KfreVariables::Eight, 5);
    pub const ALL: [KfreVariant; 4] = [
        Self::FOUR_TWO,
        Self::EIGHT_TWO,
        Self::FOUR_FIVE,
        Self::EIGHT_FIVE,
    ];

    const fn new_unchecked(variables: KfreVariables, horizon_years: u8) -> Self {
        Self {
            variables,
            horizon_years,
        }
    }

    pub fn new(variables: KfreVariables, horizon_years: u8) -> Result<Self> {
        if horizon_years != 2 && horizon_years != 5 {
            return Err(Error::domain(format!(
                "KFRE horizon must be 2 or 5 years, got {horizon_years}"
            )));
        }
        Ok(Self::new_unchecked(variables, horizon_years))
    }

    pub fn baseline_survival(self) -> f64 {
        match (self.variables, self.horizon_years) {
            (KfreVariables::Four, 2) => 0.9832,
            (KfreVariables::Eight, 2) => 0.9827,
            (KfreVariables::Four, _) => 0.9365,
            (KfreVariables::Eight, _) => 0.9245,
        }
    }

    /// Short label such as `KFRE-4v2y`.
    pub fn label(self) -> String {
        let v = match self.variables {
            KfreVariables::Four => 4,
            KfreVariables::Eight => 8,
        };
        format!("KFRE-{v}v{}y", self.horizon_years)
    }
}

impl std::str::FromStr for KfreVariant {
    type Err = Error;

    /// Accepts `4v2y`, `8v5y`, optionally prefixed with `KFRE-`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix("kfre-").unwrap_or(&t);
        let variables = match t.get(..2) {
            Some("4v") => KfreVariables::Four,
            Some("8v") => KfreVariables::Eight,
            _ => return Err(Error::domain(format!("unknown KFRE variant {s:?}"))),
        };
        let years = match t.get(2..) {
            Some("2y") => 2,
            Some("5y") => 5,
            _ => return Err(Error::domain(format!("unknown KFRE variant {s:?}"))),
        };
        KfreVariant::new(variables, years)
    }
}

/// Predictors in the equations' conventional units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KfreInputs {
    pub age: f64,
    /// 1 for male, 0 for female (fractional values allowed for centring checks).
    pub male: f64,
    pub egfr: f64,
    /// mg/g
    pub acr: f64,
    /// g/dL
    pub albumin: Option<f64>,
    /// mg/dL
    pub phosphate: Option<f64>,
    /// mEq/L
    pub hco3: Option<f64>,
    /// mg/dL
    pub calcium: Option<f64>,
}

impl KfreInputs {
    /// From SI lab units: albumin g/L, phosphate and calcium mmol/L, HCO₃ mmol/L.
    #[allow(clippy::too_many_arguments)]
    pub fn from_si(
        age: f64,
        sex: Sex,
        egfr: f64,
        acr: f64,
        albumin_g_l: Option<f64>,
        phosphate_mmol: Option<f64>,
        hco3_mmol: Option<f64>,
        calcium_mmol: Option<f64>,
    ) -> Self {
        Self {
            age,
            male: if sex.is_male() { 1.0 } else { 0.0 },
            egfr,
            acr,
            albumin: albumin_g_l.map(|a| a / 10.0),
            phosphate: phosphate_mmol.map(|p| p * PHOSPHATE_MGDL_PER_MMOL),
            hco3: hco3_mmol,
            calcium: calcium_mmol.map(|c| c * CALCIUM_MGDL_PER_MMOL),
        }
    }
}

fn linear_predictor(variant: KfreVariant, x: &KfreInputs) -> Result<f64> {
    if !(x.acr.is_finite() && x.acr > 0.0) {
        return Err(Error::domain(format!("ACR must be positive, got {}", x.acr)));
    }
    let base = [x.age, x.male, x.egfr];
    if base.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("KFRE inputs".into()));
    }
    let age = x.age / 10.0 - 7.036;
    let male = x.male - 0.5642;
    let egfr = x.egfr / 5.0 - 7.222;
    let acr = x.acr.ln() - 5.137;
    let lp = match variant.variables {
        KfreVariables::Four => -0.2201 * age + 0.2467 * male - 0.5567 * egfr + 0.4510 * acr,
        KfreVariables::Eight => {
            let need = |v: Option<f64>, name: &str| {
                v.filter(|v| v.is_finite())
                    .ok_or_else(|| Error::domain(format!("8-variable KFRE needs {name}")))
            };
            let albumin = need(x.albumin, "albumin")?;
            let phosphate = need(x.phosphate, "phosphate")?;
            let hco3 = need(x.hco3, "bicarbonate")?;
            let calcium = need(x.calcium, "calcium")?;
            -0.1992 * age + 0.1602 * male - 0.4919 * egfr + 0.3364 * acr
                - 0.3441 * (albumin - 3.997)
                + 0.2604 * (phosphate - 3.916)
                - 0.07354 * (hco3 - 25.57)
                - 0.2228 * (calcium - 9.355)
        }
    };
    Ok(lp)
}

pub fn kfre_risk(variant: KfreVariant, inputs: &KfreInputs) -> Result<f64> {
    let lp = linear_predictor(variant, inputs)?;
    Ok(1.0 - variant.baseline_survival().powf(lp.exp()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicKfre {
    pub risk: f64,
    /// Labs never observed up to the visit, filled from fallback medians.
    pub imputed: Vec<String>,
}

impl DynamicKfre {
    pub fn degraded(&self) -> bool {
        !self.imputed.is_empty()
    }
}

/// KFRE at visit `at_visit` (index into the month-sorted visits), using the
/// latest observed value of each predictor at or before that visit.
pub fn dynamic_kfre(record: &PatientRecord, at_visit: usize, variant: KfreVariant) -> Result<DynamicKfre> {
    let mut visits: Vec<_> = record.visits.iter().collect();
    visits.sort_by_key(|v| v.month);
    if at_visit >= visits.len() {
        return Err(Error::domain(format!(
            "visit index {at_visit} out of range for {} visits",
            visits.len()
        )));
    }
    let fallback = FallbackMedians::for_patient(record.age, record.sex)?;
    let mut imputed = Vec::new();
    let needed: &[Lab] = match variant.variables {
        KfreVariables::Four => &[Lab::Egfr, Lab::Uacr],
        KfreVariables::Eight => &Lab::ALL,
    };
    let mut latest = |lab: Lab| -> f64 {
        match visits[..=at_visit].iter().rev().find_map(|v| v.get(lab)) {
            Some(v) => v,
            None => {
                if needed.contains(&lab) {
                    imputed.push(lab.key().to_string());
                }
                fallback.get(lab)
            }
        }
    };
    let egfr = latest(Lab::Egfr);
    let acr = latest(Lab::Uacr);
    let (albumin, phosphate, hco3, calcium) = match variant.variables {
        KfreVariables::Four => (None, None, None, None),
        KfreVariables::Eight => (
            Some(latest(Lab::Albumin)),
            Some(latest(Lab::Phosphate)),
            Some(latest(Lab::Bicarbonate)),
            Some(latest(Lab::Calcium)),
        ),
    };
    let inputs = KfreInputs::from_si(
        record.age, record.sex, egfr, acr, albumin, phosphate, hco3, calcium,
    );
    Ok(DynamicKfre {
        risk: kfre_risk(variant, &inputs)?,
        imputed,
    })
}

/// Dynamic KFRE after every visit.
pub fn dynamic_kfre_series(record: &PatientRecord, variant: KfreVariant) -> Result<Vec<DynamicKfre>> {
    (0..record.visits.len())
        .map(|i| dynamic_kfre(record, i, variant))
        .collect()
}
