//! ICD-10 code tables used for outcome ascertainment.
//!
//! Tables are configuration documents (see `data/code_tables.json`). Matching
//! rules: a bare three-character category such as `N17` matches itself and
//! every subcode (`N17.9`, `N179`); any other pattern must match the whole
//! code, where a lowercase `x` stands for any single character. Exclusions
//! are applied after inclusion with the same rules.

use serde::{Deserialize, Serialize};

use super::record::CodeSystem;
use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../data/code_tables.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSet {
    pub codes: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
}

fn normalize(code: &str) -> String {
    code.trim().to_ascii_uppercase()
}

fn pattern_matches(pattern: &str, code: &str) -> bool {
    let p = pattern.trim();
    let is_category = p.len() == 3 && !p.contains('.');
    if is_category {
        let p = p.to_ascii_uppercase();
        return code == p
            || (code.starts_with(&p)
                && code[p.len()..].starts_with(|c: char| c == '.' || c.is_ascii_alphanumeric()));
    }
    if p.chars().count() != code.chars().count() {
        return false;
    }
    p.chars()
        .zip(code.chars())
        .all(|(pc, cc)| pc == 'x' || pc.to_ascii_uppercase() == cc)
}

impl CodeSet {
    pub fn matches(&self, code: &str) -> bool {
        let code = normalize(code);
        self.codes.iter().any(|p| pattern_matches(p, &code))
            && !self.exclude.iter().any(|p| pattern_matches(p, &code))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSystemTables {
    pub transplant: CodeSet,
    pub dialysis_hd: CodeSet,
    pub dialysis_pd: CodeSet,
    pub aki: CodeSet,
}

impl CodeSystemTables {
    pub fn is_transplant(&self, code: &str) -> bool {
        self.transplant.matches(code)
    }

    pub fn is_dialysis(&self, code: &str) -> bool {
        self.dialysis_hd.matches(code) || self.dialysis_pd.matches(code)
    }

    pub fn is_aki(&self, code: &str) -> bool {
        self.aki.matches(code)
    }

    fn validate(&self, system: &str) -> Result<()> {
        for (name, set) in [
            ("transplant", &self.transplant),
            ("dialysis_hd", &self.dialysis_hd),
            ("dialysis_pd", &self.dialysis_pd),
            ("aki", &self.aki),
        ] {
            if set.codes.is_empty() {
                return Err(Error::Config(format!("{system}.{name} has no codes")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeTables {
    pub national: CodeSystemTables,
    pub beijing: CodeSystemTables,
}

impl CodeTables {
    pub fn from_json(text: &str) -> Result<Self> {
        let tables: CodeTables = serde_json::from_str(text)?;
        tables.national.validate("national")?;
        tables.beijing.validate("beijing")?;
        Ok(tables)
    }

    /// The tables shipped in `data/code_tables.json`.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED).expect("bundled code tables are valid")
    }

    pub fn for_system(&self, system: CodeSystem) -> &CodeSystemTables {
        match system {
            CodeSystem::National => &self.national,
            CodeSystem::Beijing => &self.beijing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_and_wildcard_matching() {
        let t = CodeTables::bundled();
        let n = &t.national;
        assert!(n.is_aki("N17"));
        assert!(n.is_aki("n17.9"));
        assert!(!n.is_aki("N170000X".get(..2).unwrap()));
        assert!(n.is_aki("N96.100"));
        assert!(!n.is_aki("N96.101"));
        assert!(n.is_aki("O08.001"));
        assert!(!n.is_aki("O08.006"));
        assert!(n.is_transplant("Z94.000"));
        assert!(!t.beijing.is_transplant("Z94.001"));
        assert!(n.is_dialysis("T82.401"));
        assert!(n.is_dialysis("Z49.201"));
        assert!(!n.is_dialysis("Z49.202"));
        assert!(t.beijing.is_dialysis("Z99.202"));
    }

    #[test]
    fn empty_set_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(include_str!("../../data/code_tables.json")).unwrap();
        v["beijing"]["aki"]["codes"] = serde_json::json!([]);
        let err = CodeTables::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("beijing.aki"));
    }
}
