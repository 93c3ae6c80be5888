//! Parameter container and the weight file format.
//!
//! A weight file is one JSON object:
//!
//! ```json
//! {
//!   "hidden_size": 16,
//!   "percentiles": [0, 0.001581, ..., 1],
//!   "W_d": { "shape": [16, 16], "data": [ ...row-major... ] },
//!   "b_d": { "shape": [16], "data": [ ... ] },
//!   ...
//!   "normalization": { "feature_mean": [..6], "feature_std": [..6],
//!                      "age_mean": 0.0, "age_std": 1.0 }
//! }
//! ```
//!
//! All 18 parameter arrays are required; `normalization` is optional and,
//! when absent, inputs reach the recurrence untransformed. Unknown keys and
//! unexpected shapes are rejected.

use serde_json::{Map, Value};

use super::array::Array;
use super::tlstm::{HEAD_HIDDEN, INPUT_SIZE, STATIC_FEATURES};
use crate::error::{Error, Result};

pub const DEFAULT_HIDDEN_SIZE: usize = 16;

/// Population quantile knots of the raw score used by [`super::calibrate`].
pub const DEFAULT_PERCENTILES: [f64; 11] = [
    0.0, 0.001581, 0.003890, 0.004821, 0.006119, 0.007713, 0.010107, 0.013142, 0.018956,
    0.034004, 1.0,
];

/// File names of the parameter arrays, in [`Parameters::arrays`] order.
pub const PARAMETER_NAMES: [&str; 18] = [
    "W_d", "b_d", "W_i", "U_i", "b_i", "W_f", "U_f", "b_f", "W_g", "U_g", "b_g", "W_o", "U_o",
    "b_o", "weight1", "bias1", "weight2", "bias2",
];

/// The 18 trainable arrays. Recurrence matrices use the row-vector
/// convention (`x · W`); the head matrices are applied as `weight · h`.
/// The same struct doubles as a gradient set.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    pub w_d: Array,
    pub b_d: Array,
    pub w_i: Array,
    pub u_i: Array,
    pub b_i: Array,
    pub w_f: Array,
    pub u_f: Array,
    pub b_f: Array,
    pub w_g: Array,
    pub u_g: Array,
    pub b_g: Array,
    pub w_o: Array,
    pub u_o: Array,
    pub b_o: Array,
    pub weight1: Array,
    pub bias1: Array,
    pub weight2: Array,
    pub bias2: Array,
}

impl Parameters {
    pub fn expected_shapes(hidden: usize) -> [Vec<usize>; 18] {
        let hh = vec![hidden, hidden];
        let xh = vec![INPUT_SIZE, hidden];
        let h = vec![hidden];
        [
            hh.clone(),
            h.clone(),
            xh.clone(),
            hh.clone(),
            h.clone(),
            xh.clone(),
            hh.clone(),
            h.clone(),
            xh.clone(),
            hh.clone(),
            h.clone(),
            xh,
            hh,
            h,
            vec![HEAD_HIDDEN, hidden],
            vec![HEAD_HIDDEN],
            vec![1, HEAD_HIDDEN + STATIC_FEATURES],
            vec![1],
        ]
    }

    pub fn zeros(hidden: usize) -> Self {
        let arrays = Self::expected_shapes(hidden).map(|s| Array::zeros(&s));
        Self::from_arrays(arrays)
    }

    fn from_arrays(arrays: [Array; 18]) -> Self {
        let [w_d, b_d, w_i, u_i, b_i, w_f, u_f, b_f, w_g, u_g, b_g, w_o, u_o, b_o, weight1, bias1, weight2, bias2] =
            arrays;
        Self {
            w_d,
            b_d,
            w_i,
            u_i,
            b_i,
            w_f,
            u_f,
            b_f,
            w_g,
            u_g,
            b_g,
            w_o,
            u_o,
            b_o,
            weight1,
            bias1,
            weight2,
            bias2,
        }
    }

    pub fn arrays(&self) -> [&Array; 18] {
        [
            &self.w_d,
            &self.b_d,
            &self.w_i,
            &self.u_i,
            &self.b_i,
            &self.w_f,
            &self.u_f,
            &self.b_f,
            &self.w_g,
            &self.u_g,
            &self.b_g,
            &self.w_o,
            &self.u_o,
            &self.b_o,
            &self.weight1,
            &self.bias1,
            &self.weight2,
            &self.bias2,
        ]
    }

    pub fn arrays_mut(&mut self) -> [&mut Array; 18] {
        [
            &mut self.w_d,
            &mut self.b_d,
            &mut self.w_i,
            &mut self.u_i,
            &mut self.b_i,
            &mut self.w_f,
            &mut self.u_f,
            &mut self.b_f,
            &mut self.w_g,
            &mut self.u_g,
            &mut self.b_g,
            &mut self.w_o,
            &mut self.u_o,
            &mut self.b_o,
            &mut self.weight1,
            &mut self.bias1,
            &mut self.weight2,
            &mut self.bias2,
        ]
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, &Array)> {
        PARAMETER_NAMES.into_iter().zip(self.arrays())
    }

    pub fn hidden_size(&self) -> usize {
        self.b_d.len()
    }

    pub fn num_scalars(&self) -> usize {
        self.arrays().iter().map(|a| a.len()).sum()
    }

    pub fn add_assign(&mut self, other: &Parameters) {
        for (a, b) in self.arrays_mut().into_iter().zip(other.arrays()) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, k: f64) {
        for a in self.arrays_mut() {
            a.scale(k);
        }
    }

    /// Name of the first array holding a non-finite entry.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        self.named().find(|(_, a)| !a.all_finite()).map(|(n, _)| n)
    }

    pub fn validate(&self) -> Result<()> {
        let hidden = self.hidden_size();
        for ((name, array), expected) in self.named().zip(Self::expected_shapes(hidden)) {
            if array.shape() != expected.as_slice() {
                return Err(Error::Shape {
                    field: name.to_string(),
                    expected,
                    found: array.shape().to_vec(),
                });
            }
            if !array.all_finite() {
                return Err(Error::NonFinite(name.to_string()));
            }
        }
        Ok(())
    }
}

/// Input standardisation fitted on training data.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub feature_mean: [f64; INPUT_SIZE],
    pub feature_std: [f64; INPUT_SIZE],
    pub age_mean: f64,
    pub age_std: f64,
}

impl Normalization {
    fn validate(&self) -> Result<()> {
        let finite = self
            .feature_mean
            .iter()
            .chain(&self.feature_std)
            .chain([&self.age_mean, &self.age_std])
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite("normalization".into()));
        }
        if self.feature_std.iter().chain([&self.age_std]).any(|&s| s <= 0.0) {
            return Err(Error::WeightFile {
                field: "normalization".into(),
                message: "standard deviations must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelWeights {
    pub params: Parameters,
    pub percentiles: Vec<f64>,
    pub normalization: Option<Normalization>,
}

impl ModelWeights {
    pub fn new(
        params: Parameters,
        percentiles: Vec<f64>,
        normalization: Option<Normalization>,
    ) -> Result<Self> {
        let w = Self {
            params,
            percentiles,
            normalization,
        };
        w.validate()?;
        Ok(w)
    }

    /// All-zero parameters with the deployed percentiles.
    pub fn zeros(hidden: usize) -> Self {
        Self {
            params: Parameters::zeros(hidden),
            percentiles: DEFAULT_PERCENTILES.to_vec(),
            normalization: None,
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.params.hidden_size()
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_size() == 0 {
            return Err(Error::WeightFile {
                field: "hidden_size".into(),
                message: "must be positive".into(),
            });
        }
        self.params.validate()?;
        validate_percentiles(&self.percentiles)?;
        if let Some(n) = &self.normalization {
            n.validate()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("hidden_size".into(), Value::from(self.hidden_size()));
        obj.insert("percentiles".into(), Value::from(self.percentiles.clone()));
        for (name, a) in self.params.named() {
            let mut entry = Map::new();
            entry.insert("shape".into(), Value::from(a.shape().to_vec()));
            entry.insert("data".into(), Value::from(a.data().to_vec()));
            obj.insert(name.into(), Value::Object(entry));
        }
        if let Some(n) = &self.normalization {
            let mut entry = Map::new();
            entry.insert("feature_mean".into(), Value::from(n.feature_mean.to_vec()));
            entry.insert("feature_std".into(), Value::from(n.feature_std.to_vec()));
            entry.insert("age_mean".into(), Value::from(n.age_mean));
            entry.insert("age_std".into(), Value::from(n.age_std));
            obj.insert("normalization".into(), Value::Object(entry));
        }
        Value::Object(obj)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("weights serialise")
    }
}

fn validate_percentiles(p: &[f64]) -> Result<()> {
    let err = |message: &str| Error::WeightFile {
        field: "percentiles".into(),
        message: message.into(),
    };
    if p.len() < 2 {
        return Err(err("need at least two knots"));
    }
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("percentiles".into()));
    }
    if p[0] != 0.0 || p[p.len() - 1] != 1.0 {
        return Err(err("first knot must be 0 and last knot 1"));
    }
    if p.windows(2).any(|w| w[0] >= w[1]) {
        return Err(err("knots must be strictly increasing"));
    }
    Ok(())
}

fn field_err(field: &str, message: impl Into<String>) -> Error {
    Error::WeightFile {
        field: field.to_string(),
        message: message.into(),
    }
}

fn numbers(field: &str, v: &Value) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| field_err(field, "expected an array of numbers"))?;
    arr.iter()
        .map(|x| {
            let f = x
                .as_f64()
                .ok_or_else(|| field_err(field, "expected an array of numbers"))?;
            if f.is_finite() {
                Ok(f)
            } else {
                Err(Error::NonFinite(field.to_string()))
            }
        })
        .collect()
}

fn fixed<const N: usize>(field: &str, v: &Value) -> Result<[f64; N]> {
    let xs = numbers(field, v)?;
    xs.try_into()
        .map_err(|_| field_err(field, format!("expected {N} entries")))
}

fn number(field: &str, v: Option<&Value>) -> Result<f64> {
    let f = v
        .and_then(Value::as_f64)
        .ok_or_else(|| field_err(field, "expected a number"))?;
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::NonFinite(field.to_string()))
    }
}

fn parse_array(name: &str, v: &Value, expected: &[usize]) -> Result<Array> {
    let obj = v
        .as_object()
        .ok_or_else(|| field_err(name, "expected an object with shape and data"))?;
    if let Some(k) = obj.keys().find(|k| *k != "shape" && *k != "data") {
        return Err(field_err(name, format!("unknown key {k:?}")));
    }
    let shape: Vec<usize> = obj
        .get("shape")
        .and_then(Value::as_array)
        .ok_or_else(|| field_err(name, "missing shape"))?
        .iter()
        .map(|d| d.as_u64().map(|d| d as usize))
        .collect::<Option<_>>()
        .ok_or_else(|| field_err(name, "shape must be non-negative integers"))?;
    if shape != expected {
        return Err(Error::Shape {
            field: name.to_string(),
            expected: expected.to_vec(),
            found: shape,
        });
    }
    let data = numbers(name, obj.get("data").ok_or_else(|| field_err(name, "missing data"))?)?;
    Array::from_vec(&shape, data).map_err(|e| field_err(name, e.to_string()))
}

/// Parses and validates a weight file.
pub fn load_weights(bytes: &[u8]) -> Result<ModelWeights> {
    let root: Value = serde_json::from_slice(bytes)?;
    let obj = root
        .as_object()
        .ok_or_else(|| field_err("<root>", "expected a JSON object"))?;
    for key in obj.keys() {
        let known = key == "hidden_size"
            || key == "percentiles"
            || key == "normalization"
            || PARAMETER_NAMES.contains(&key.as_str());
        if !known {
            return Err(field_err(key, "unknown field"));
        }
    }
    let hidden = obj
        .get("hidden_size")
        .and_then(Value::as_u64)
        .filter(|&h| h > 0)
        .ok_or_else(|| field_err("hidden_size", "expected a positive integer"))?
        as usize;
    let percentiles = numbers(
        "percentiles",
        obj.get("percentiles")
            .ok_or_else(|| field_err("percentiles", "missing"))?,
    )?;
    let shapes = Parameters::expected_shapes(hidden);
    let mut arrays = Vec::with_capacity(18);
    for (name, shape) in PARAMETER_NAMES.iter().zip(&shapes) {
        let v = obj.get(*name).ok_or_else(|| field_err(name, "missing"))?;
        arrays.push(parse_array(name, v, shape)?);
    }
    let arrays: [Array; 18] = arrays.try_into().expect("18 arrays");
    let normalization = match obj.get("normalization") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let n = v
                .as_object()
                .ok_or_else(|| field_err("normalization", "expected an object"))?;
            if let Some(k) = n
                .keys()
                .find(|k| !["feature_mean", "feature_std", "age_mean", "age_std"].contains(&k.as_str()))
            {
                return Err(field_err("normalization", format!("unknown key {k:?}")));
            }
            let get = |k: &str| {
                n.get(k)
                    .ok_or_else(|| field_err(&format!("normalization.{k}"), "missing"))
            };
            Some(Normalization {
                feature_mean: fixed("normalization.feature_mean", get("feature_mean")?)?,
                feature_std: fixed("normalization.feature_std", get("feature_std")?)?,
                age_mean: number("normalization.age_mean", n.get("age_mean"))?,
                age_std: number("normalization.age_std", n.get("age_std"))?,
            })
        }
    };
    ModelWeights::new(Parameters::from_arrays(arrays), percentiles, normalization)
}
