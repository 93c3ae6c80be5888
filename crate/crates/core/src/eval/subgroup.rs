use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::report::{metric_report, MetricReport};
use super::scored::ScoredSet;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupResult {
    pub name: String,
    pub n: usize,
    pub positives: usize,
    pub report: Option<MetricReport>,
    /// Why the group has no report.
    pub skipped: Option<String>,
}

/// Unpaired DeLong comparison between two disjoint groups.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseDelong {
    pub a: String,
    pub b: String,
    pub auroc_a: f64,
    pub auroc_b: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgroupReport {
    pub groups: Vec<GroupResult>,
    pub pairwise: Vec<PairwiseDelong>,
}

/// Metrics per tag value (in sorted tag order) and DeLong comparisons between
/// every pair of evaluable groups. Groups lacking a class are reported as
/// skipped.
pub fn subgroup_eval(s: &ScoredSet, tags: &[String]) -> Result<SubgroupReport> {
    if tags.len() != s.len() {
        return Err(Error::domain("one group tag per score is required"));
    }
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, t) in tags.iter().enumerate() {
        members.entry(t.as_str()).or_default().push(i);
    }
    let mut groups = Vec::with_capacity(members.len());
    for (name, idx) in &members {
        let sub = s.select(idx);
        let (report, skipped) = match metric_report(&sub) {
            Ok(r) => (Some(r), None),
            Err(e @ Error::UndefinedMetric(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        groups.push(GroupResult {
            name: name.to_string(),
            n: sub.len(),
            positives: sub.positives(),
            report,
            skipped,
        });
    }
    let normal = Normal::standard();
    let mut pairwise = Vec::new();
    for (i, ga) in groups.iter().enumerate() {
        for gb in &groups[i + 1..] {
            let (Some(ra), Some(rb)) = (&ga.report, &gb.report) else {
                continue;
            };
            let var = ra.auroc.variance + rb.auroc.variance;
            let diff = ra.auroc.value - rb.auroc.value;
            let (z, p_value) = if var > 0.0 {
                let z = diff / var.sqrt();
                (z, (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0))
            } else {
                (0.0, 1.0)
            };
            pairwise.push(PairwiseDelong {
                a: ga.name.clone(),
                b: gb.name.clone(),
                auroc_a: ra.auroc.value,
                auroc_b: rb.auroc.value,
                z,
                p_value,
            });
        }
    }
    Ok(SubgroupReport { groups, pairwise })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> ScoredSet {
        ScoredSet::from_numeric(
            vec![0.9, 0.2, 0.6, 0.1, 0.4, 0.7],
            &[1.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn constant_tag_is_global() {
        let s = fixture();
        let r = subgroup_eval(&s, &vec!["all".to_string(); 6]).unwrap();
        assert_eq!(r.groups.len(), 1);
        assert_eq!(r.groups[0].report.as_ref(), Some(&metric_report(&s).unwrap()));
        assert!(r.pairwise.is_empty());
    }

    #[test]
    fn identical_groups_give_p_one() {
        let s = fixture();
        let doubled = ScoredSet::new(
            s.scores().iter().chain(s.scores()).copied().collect(),
            s.labels().iter().chain(s.labels()).copied().collect(),
        )
        .unwrap();
        let tags: Vec<String> = (0..12).map(|i| if i < 6 { "a" } else { "b" }.to_string()).collect();
        let r = subgroup_eval(&doubled, &tags).unwrap();
        assert_eq!(r.pairwise[0].p_value, 1.0);
    }

    #[test]
    fn single_class_group_is_skipped() {
        let s = fixture();
        let tags: Vec<String> = ["x", "y", "x", "y", "x", "y"].iter().map(|t| t.to_string()).collect();
        let r = subgroup_eval(&s, &tags).unwrap();
        assert!(r.groups[1].skipped.is_some());
        assert!(r.pairwise.is_empty());
    }
}
