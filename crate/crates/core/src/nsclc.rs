//! The 18-variable NSCLC scheme and the fixtures built on it: published
//! cohort marginals, default discretization, and the LLM-elicited graphs.

use std::collections::BTreeMap;
use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, LogNormal, Normal};

use crate::data::DiscretizationSpec;
use crate::graph::{Dag, VariableScheme};
use crate::synth::CohortSpec;

const SCHEME_JSON: &str = include_str!("../data/nsclc_scheme.json");

pub const GENES: [&str; 9] = ["KRAS", "EGFR", "FGFR1", "ALK", "MET", "PIK3CA", "BRAF", "ROS1", "RET"];
pub const SYMPTOMS: [&str; 3] = ["SHORTNESSOFBREATH", "CHESTPAIN", "WEIGHTLOSS"];

/// Genes reported in the treatment-effect grid (ROS1 has no column there).
pub const GRID_GENES: [&str; 8] = ["KRAS", "EGFR", "FGFR1", "ALK", "MET", "PIK3CA", "BRAF", "RET"];
pub const GRID_TREATMENTS: [&str; 3] = ["Chemotherapy", "Targeted Therapy", "Immunotherapy"];
pub const CONTROL_TREATMENT: &str = "Unknown";

pub fn nsclc_scheme() -> Arc<VariableScheme> {
    Arc::new(VariableScheme::from_json(SCHEME_JSON).expect("bundled scheme is valid"))
}

/// AGE cut at 65 and 75 years, SURVIVALMONTHS at 12 and 36 months.
pub fn default_discretization() -> DiscretizationSpec {
    let mut spec = DiscretizationSpec::default();
    spec.bins.insert("AGE".into(), vec![65.0, 75.0]);
    spec.bins.insert("SURVIVALMONTHS".into(), vec![12.0, 36.0]);
    spec
}

const DAYS_PER_MONTH: f64 = 365.25 / 12.0;

/// Bin probabilities for AGE from a normal with the cohort's mean and sd.
fn age_bins() -> Vec<f64> {
    let age = Normal::new(73.3, 10.6).unwrap();
    let lo = age.cdf(65.0);
    let mid = age.cdf(75.0) - lo;
    vec![lo, mid, 1.0 - lo - mid]
}

/// Bin probabilities for survival months from a log-normal matched to the
/// cohort's mean and sd of survival days.
fn survival_bins() -> Vec<f64> {
    let mean = 1179.7 / DAYS_PER_MONTH;
    let sd = 1581.1 / DAYS_PER_MONTH;
    let sigma2 = (1.0 + (sd / mean).powi(2)).ln();
    let mu = mean.ln() - sigma2 / 2.0;
    let dist = LogNormal::new(mu, sigma2.sqrt()).unwrap();
    let lo = dist.cdf(12.0);
    let mid = dist.cdf(36.0) - lo;
    vec![lo, mid, 1.0 - lo - mid]
}

fn normalized(p: &[f64]) -> Vec<f64> {
    let z: f64 = p.iter().sum();
    p.iter().map(|x| x / z).collect()
}

fn binary(p_yes: f64) -> Vec<f64> {
    vec![1.0 - p_yes, p_yes]
}

/// Per-variable marginal targets for the synthetic cohort, in each
/// variable's state order.
///
/// Symptom rates and ROS1 prevalence are not part of the published summary
/// and use fixed placeholder rates.
pub fn table1_marginals() -> BTreeMap<String, Vec<f64>> {
    let mut m = BTreeMap::new();
    m.insert("AGE".into(), age_bins());
    m.insert("SMOKING".into(), vec![0.810, 0.190]);
    m.insert("GENDER".into(), vec![0.577, 0.423]);
    m.insert("SHORTNESSOFBREATH".into(), binary(0.30));
    m.insert("CHESTPAIN".into(), binary(0.20));
    m.insert("WEIGHTLOSS".into(), binary(0.25));
    // published shares sum to 100.1%
    m.insert("TREATMENTPLAN".into(), normalized(&[0.693, 0.209, 0.071, 0.028]));
    m.insert("SURVIVALMONTHS".into(), survival_bins());
    m.insert("STAGEGROUP".into(), vec![0.304, 0.080, 0.141, 0.475]);
    for (gene, rate) in [
        ("KRAS", 0.279),
        ("EGFR", 0.390),
        ("FGFR1", 0.058),
        ("ALK", 0.206),
        ("MET", 0.110),
        ("PIK3CA", 0.264),
        ("BRAF", 0.052),
        ("ROS1", 0.050),
        ("RET", 0.429),
    ] {
        m.insert(gene.into(), binary(rate));
    }
    m
}

pub fn table1_cohort_spec(n: usize, seed: u64) -> CohortSpec {
    CohortSpec {
        n,
        marginals: table1_marginals(),
        seed,
    }
}

/// Edges of the first single-prompt draft.
pub fn v1_edges() -> Vec<(String, String)> {
    let mut e: Vec<(&str, &str)> = vec![
        ("AGE", "TREATMENTPLAN"),
        ("AGE", "SURVIVALMONTHS"),
        ("SMOKING", "CHESTPAIN"),
        ("SMOKING", "SHORTNESSOFBREATH"),
        ("SMOKING", "TREATMENTPLAN"),
        ("SMOKING", "SURVIVALMONTHS"),
        ("SMOKING", "STAGEGROUP"),
        ("GENDER", "TREATMENTPLAN"),
        ("GENDER", "SURVIVALMONTHS"),
        ("SHORTNESSOFBREATH", "STAGEGROUP"),
        ("CHESTPAIN", "STAGEGROUP"),
        ("WEIGHTLOSS", "STAGEGROUP"),
        ("WEIGHTLOSS", "TREATMENTPLAN"),
        ("WEIGHTLOSS", "SURVIVALMONTHS"),
    ];
    for g in GENES {
        e.extend([(g, "TREATMENTPLAN"), (g, "SURVIVALMONTHS"), (g, "STAGEGROUP")]);
    }
    e.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

/// Edges of the final refined draft: the first draft plus AGE -> SMOKING,
/// mutations caused by smoking and stage instead of causing stage, and
/// TREATMENTPLAN -> SURVIVALMONTHS.
pub fn v5_edges() -> Vec<(String, String)> {
    let mut e: Vec<(String, String)> = v1_edges()
        .into_iter()
        .filter(|(a, b)| !(GENES.contains(&a.as_str()) && b == "STAGEGROUP"))
        .collect();
    e.push(("AGE".into(), "SMOKING".into()));
    for g in GENES {
        e.push(("SMOKING".into(), g.into()));
        e.push(("STAGEGROUP".into(), g.into()));
    }
    e.push(("TREATMENTPLAN".into(), "SURVIVALMONTHS".into()));
    e
}

fn dag_from(edges: &[(String, String)]) -> Dag {
    let refs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    Dag::from_named_edges(nsclc_scheme(), &refs).expect("fixture graph is acyclic")
}

pub fn v1_dag() -> Dag {
    dag_from(&v1_edges())
}

pub fn v5_dag() -> Dag {
    dag_from(&v5_edges())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_shape() {
        let s = nsclc_scheme();
        assert_eq!(s.len(), 18);
        assert_eq!(s.name(0), "AGE");
        assert_eq!(s.name(17), "RET");
        assert_eq!(s.cardinality(s.index_of("TREATMENTPLAN").unwrap()), 4);
        for g in GENES {
            assert_eq!(s.cardinality(s.index_of(g).unwrap()), 2);
        }
    }

    #[test]
    fn marginals_are_distributions() {
        let s = nsclc_scheme();
        let m = table1_marginals();
        assert_eq!(m.len(), 18);
        for (name, p) in &m {
            assert_eq!(p.len(), s.cardinality(s.index_of(name).unwrap()), "{name}");
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9, "{name}");
            assert!(p.iter().all(|x| *x > 0.0));
        }
        let age = &m["AGE"];
        assert!((age[0] - 0.2167).abs() < 1e-3);
    }

    #[test]
    fn fixture_graphs() {
        assert_eq!(v1_dag().edge_count(), 41);
        let v5 = v5_dag();
        assert_eq!(v5.edge_count(), 52);
        let s = v5.scheme();
        let idx = |n: &str| s.index_of(n).unwrap();
        assert!(v5.has_edge(idx("TREATMENTPLAN"), idx("SURVIVALMONTHS")));
        assert!(v5.has_edge(idx("STAGEGROUP"), idx("KRAS")));
        assert!(!v5.has_edge(idx("KRAS"), idx("STAGEGROUP")));
    }
}
