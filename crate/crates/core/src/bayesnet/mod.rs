//! Discrete Bayesian networks: CPD fitting and exact inference.

mod factor;
mod inference;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::{config_strides, contingency_counts, CategoricalDataset};
use crate::error::{Error, Result};
use crate::graph::{same_scheme, Dag, VariableScheme};

pub use factor::Factor;
pub use inference::{brute_force_query, variable_elimination, variable_elimination_with, EliminationHeuristic, Evidence};

const ROW_TOLERANCE: f64 = 1e-9;

/// `P(child | parents)`, one row per parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpd {
    pub child: usize,
    /// Ascending scheme order.
    pub parents: Vec<usize>,
    pub child_card: usize,
    pub parent_cards: Vec<usize>,
    pub table: Vec<Vec<f64>>,
}

impl Cpd {
    pub fn new(
        scheme: &VariableScheme,
        child: usize,
        parents: Vec<usize>,
        table: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let child_card = scheme.cardinality(child);
        let parent_cards: Vec<usize> = parents.iter().map(|&p| scheme.cardinality(p)).collect();
        let n_configs: usize = parent_cards.iter().product();
        if table.len() != n_configs {
            return Err(Error::Shape(format!(
                "CPD of `{}` needs {n_configs} rows, got {}",
                scheme.name(child),
                table.len()
            )));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != child_card {
                return Err(Error::Shape(format!(
                    "CPD of `{}` row {i} has {} entries, expected {child_card}",
                    scheme.name(child),
                    row.len()
                )));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) || (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::UnparameterizedNetwork(format!(
                    "CPD of `{}` row {i} is not a probability distribution",
                    scheme.name(child)
                )));
            }
        }
        Ok(Cpd {
            child,
            parents,
            child_card,
            parent_cards,
            table,
        })
    }

    /// Point mass on `state` with no parents.
    pub fn point_mass(scheme: &VariableScheme, child: usize, state: usize) -> Self {
        let card = scheme.cardinality(child);
        let mut row = vec![0.0; card];
        row[state] = 1.0;
        Cpd {
            child,
            parents: Vec::new(),
            child_card: card,
            parent_cards: Vec::new(),
            table: vec![row],
        }
    }

    pub fn config_index(&self, parent_states: &[usize]) -> usize {
        config_strides(&self.parent_cards)
            .iter()
            .zip(parent_states)
            .map(|(s, x)| s * x)
            .sum()
    }

    /// Distribution of the child given a full assignment indexed by variable.
    pub fn row_for(&self, assignment: &[usize]) -> &[f64] {
        let strides = config_strides(&self.parent_cards);
        let i: usize = self.parents.iter().zip(&strides).map(|(&p, s)| assignment[p] * s).sum();
        &self.table[i]
    }

    pub fn to_factor(&self) -> Factor {
        let mut vars = self.parents.clone();
        vars.push(self.child);
        let mut cards = self.parent_cards.clone();
        cards.push(self.child_card);
        let values = self.table.iter().flatten().copied().collect();
        Factor::new(vars, cards, values).expect("validated CPD forms a factor")
    }
}

/// A DAG with one CPD per node.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianNetwork {
    dag: Dag,
    cpds: Vec<Cpd>,
}

#[derive(Serialize, Deserialize)]
struct CpdFile {
    parents: Vec<String>,
    table: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    dag: serde_json::Value,
    cpds: BTreeMap<String, CpdFile>,
}

impl BayesianNetwork {
    pub fn new(dag: Dag, cpds: Vec<Cpd>) -> Result<Self> {
        if cpds.len() != dag.len() {
            return Err(Error::UnparameterizedNetwork(format!(
                "{} CPDs for {} variables",
                cpds.len(),
                dag.len()
            )));
        }
        for (v, cpd) in cpds.iter().enumerate() {
            let expected: Vec<usize> = dag.parents(v).iter().copied().collect();
            if cpd.child != v || cpd.parents != expected {
                return Err(Error::UnparameterizedNetwork(format!(
                    "CPD for `{}` does not match the graph's parent set",
                    dag.scheme().name(v)
                )));
            }
        }
        Ok(BayesianNetwork { dag, cpds })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn scheme(&self) -> &Arc<VariableScheme> {
        self.dag.scheme()
    }

    pub fn cpd(&self, v: usize) -> &Cpd {
        &self.cpds[v]
    }

    pub fn cpds(&self) -> &[Cpd] {
        &self.cpds
    }

    pub fn len(&self) -> usize {
        self.cpds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cpds.is_empty()
    }

    /// Replaces one node's CPD together with its incoming edges.
    pub fn with_cpd(&self, cpd: Cpd) -> Result<Self> {
        let v = cpd.child;
        let mut dag = self.dag.clone();
        for &p in self.dag.parents(v) {
            dag = dag.without_edge(p, v);
        }
        for &p in &cpd.parents {
            dag = dag.with_edge(p, v)?;
        }
        let mut cpds = self.cpds.clone();
        cpds[v] = cpd;
        BayesianNetwork::new(dag, cpds)
    }

    /// Joint probability of a full assignment.
    pub fn joint_probability(&self, assignment: &[usize]) -> f64 {
        self.cpds
            .iter()
            .map(|c| c.row_for(assignment)[assignment[c.child]])
            .product()
    }

    /// Resolves `(variable, state label)` pairs into evidence.
    pub fn evidence_from_names(&self, pairs: &[(&str, &str)]) -> Result<Evidence> {
        let scheme = self.scheme();
        pairs
            .iter()
            .map(|(var, state)| {
                let v = scheme.index_of(var)?;
                Ok((v, scheme.state_index(v, state)?))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let scheme = self.scheme();
        let cpds = self
            .cpds
            .iter()
            .map(|c| {
                (
                    scheme.name(c.child).to_string(),
                    CpdFile {
                        parents: c.parents.iter().map(|&p| scheme.name(p).to_string()).collect(),
                        table: c.table.clone(),
                    },
                )
            })
            .collect();
        let file = NetworkFile {
            dag: serde_json::from_str(&self.dag.to_json()).expect("graph JSON is valid"),
            cpds,
        };
        serde_json::to_string_pretty(&file).expect("network serialization cannot fail")
    }

    pub fn from_json(text: &str, scheme: Arc<VariableScheme>) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        let dag = Dag::from_json(&file.dag.to_string(), scheme.clone())?;
        let mut cpds = Vec::with_capacity(scheme.len());
        for v in 0..scheme.len() {
            let name = scheme.name(v);
            let entry = file
                .cpds
                .get(name)
                .ok_or_else(|| Error::UnparameterizedNetwork(format!("no CPD for `{name}`")))?;
            let parents = entry
                .parents
                .iter()
                .map(|p| scheme.index_of(p))
                .collect::<Result<Vec<_>>>()?;
            cpds.push(Cpd::new(&scheme, v, parents, entry.table.clone())?);
        }
        if let Some(extra) = file.cpds.keys().find(|k| scheme.index_of(k).is_err()) {
            return Err(Error::UnknownVariable(extra.clone()));
        }
        BayesianNetwork::new(dag, cpds)
    }
}

/// Dirichlet posterior-mean CPDs with BDeu pseudocounts:
/// `P(j | i) = (n_ij + a/(r q)) / (n_i + a/r)` for `r` parent configurations
/// and `q` child states. Unseen configurations get the uniform distribution.
pub fn fit_cpds(dag: &Dag, data: &CategoricalDataset, prior_ess: f64) -> Result<BayesianNetwork> {
    if !same_scheme(dag.scheme(), data.scheme()) {
        return Err(Error::SchemeMismatch);
    }
    if !(prior_ess.is_finite() && prior_ess > 0.0) {
        return Err(Error::InvalidArgument(format!("prior ESS must be positive, got {prior_ess}")));
    }
    let scheme = dag.scheme();
    let mut cpds = Vec::with_capacity(dag.len());
    for v in 0..dag.len() {
        let parents: Vec<usize> = dag.parents(v).iter().copied().collect();
        let counts = contingency_counts(data, v, &parents)?;
        let r = counts.n_configs() as f64;
        let q = counts.child_card as f64;
        let a_ij = prior_ess / (r * q);
        let a_i = prior_ess / r;
        let table = counts
            .counts
            .iter()
            .zip(&counts.totals)
            .map(|(row, &n_i)| {
                let denom = n_i as f64 + a_i;
                row.iter().map(|&n| (n as f64 + a_ij) / denom).collect()
            })
            .collect();
        cpds.push(Cpd::new(scheme, v, parents, table)?);
    }
    BayesianNetwork::new(dag.clone(), cpds)
}
