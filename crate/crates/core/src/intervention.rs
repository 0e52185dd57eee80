//! do-operator surgery and average treatment effects.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bayesnet::{brute_force_query, variable_elimination, BayesianNetwork, Cpd, Evidence, Factor};
use crate::error::{Error, Result};
use crate::scoring::csv_field;

/// Mutilated network for `do(node = state)`: incoming edges of `node` are cut
/// and its CPD becomes a point mass. Other CPDs are shared unchanged.
pub fn apply_do(net: &BayesianNetwork, node: usize, state: usize) -> Result<BayesianNetwork> {
    let scheme = net.scheme();
    if node >= net.len() {
        return Err(Error::UnknownVariable(format!("index {node}")));
    }
    if state >= scheme.cardinality(node) {
        return Err(Error::UnknownState {
            variable: scheme.name(node).to_string(),
            state: state.to_string(),
        });
    }
    net.with_cpd(Cpd::point_mass(scheme, node, state))
}

pub fn apply_do_by_name(net: &BayesianNetwork, node: &str, state: &str) -> Result<BayesianNetwork> {
    let v = net.scheme().index_of(node)?;
    let s = net.scheme().state_index(v, state)?;
    apply_do(net, v, s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterventionQuery {
    pub treatment: usize,
    pub treated_state: usize,
    pub control_state: usize,
    pub outcome: usize,
    /// Numeric value of each outcome state.
    pub outcome_values: Vec<f64>,
    pub evidence: Evidence,
}

impl InterventionQuery {
    fn validate(&self, net: &BayesianNetwork) -> Result<()> {
        let scheme = net.scheme();
        let n = net.len();
        if self.treatment >= n || self.outcome >= n {
            return Err(Error::UnknownVariable(format!(
                "index {}",
                self.treatment.max(self.outcome)
            )));
        }
        if self.outcome == self.treatment {
            return Err(Error::InvalidArgument("outcome and treatment must differ".into()));
        }
        if self.evidence.contains_key(&self.treatment) {
            return Err(Error::InvalidArgument("treatment cannot also be evidence".into()));
        }
        let card = scheme.cardinality(self.treatment);
        if self.treated_state >= card || self.control_state >= card {
            return Err(Error::UnknownState {
                variable: scheme.name(self.treatment).to_string(),
                state: self.treated_state.max(self.control_state).to_string(),
            });
        }
        if self.outcome_values.len() != scheme.cardinality(self.outcome) {
            return Err(Error::InvalidArgument(format!(
                "outcome values must cover all {} states of `{}`",
                scheme.cardinality(self.outcome),
                scheme.name(self.outcome)
            )));
        }
        Ok(())
    }
}

/// Which exact-inference routine evaluates the interventional posteriors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferenceEngine {
    VariableElimination,
    BruteForce,
}

fn posterior(net: &BayesianNetwork, query: &[usize], evidence: &Evidence, engine: InferenceEngine) -> Result<Factor> {
    match engine {
        InferenceEngine::VariableElimination => variable_elimination(net, query, evidence),
        InferenceEngine::BruteForce => brute_force_query(net, query, evidence),
    }
}

/// `E[v(Y) | do(T = t), evidence]`.
pub fn interventional_expectation(
    net: &BayesianNetwork,
    q: &InterventionQuery,
    state: usize,
    engine: InferenceEngine,
) -> Result<f64> {
    let mutilated = apply_do(net, q.treatment, state)?;
    let post = posterior(&mutilated, &[q.outcome], &q.evidence, engine)?;
    Ok(post.values().iter().zip(&q.outcome_values).map(|(p, v)| p * v).sum())
}

pub fn ate(net: &BayesianNetwork, q: &InterventionQuery) -> Result<f64> {
    ate_with(net, q, InferenceEngine::VariableElimination)
}

/// Treated-arm minus control-arm expectation, both arms conditioned on the
/// same evidence after surgery.
pub fn ate_with(net: &BayesianNetwork, q: &InterventionQuery, engine: InferenceEngine) -> Result<f64> {
    q.validate(net)?;
    let treated = interventional_expectation(net, q, q.treated_state, engine)?;
    let control = interventional_expectation(net, q, q.control_state, engine)?;
    Ok(treated - control)
}

/// Settings shared by every cell of a treatment x mutation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub treatment: String,
    pub control_state: String,
    pub outcome: String,
    /// Numeric value per outcome state, in state order.
    pub outcome_values: Vec<f64>,
    /// State label meaning "mutation present".
    pub mutation_state: String,
}

impl GridConfig {
    /// Treatment plan against "Unknown", valuing survival beyond 36 months
    /// as 1 and anything shorter as 0.
    pub fn nsclc_default() -> Self {
        GridConfig {
            treatment: "TREATMENTPLAN".into(),
            control_state: crate::nsclc::CONTROL_TREATMENT.into(),
            outcome: "SURVIVALMONTHS".into(),
            outcome_values: vec![0.0, 0.0, 1.0],
            mutation_state: "1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AteGrid {
    pub treatments: Vec<String>,
    pub mutations: Vec<String>,
    /// `cells[t][m]`
    pub cells: Vec<Vec<f64>>,
}

pub fn ate_grid(
    net: &BayesianNetwork,
    treatments: &[&str],
    mutations: &[&str],
    config: &GridConfig,
) -> Result<AteGrid> {
    let scheme = net.scheme();
    let t = scheme.index_of(&config.treatment)?;
    let control_state = scheme.state_index(t, &config.control_state)?;
    let outcome = scheme.index_of(&config.outcome)?;
    let mut mutation_idx = Vec::with_capacity(mutations.len());
    for m in mutations {
        let v = scheme.index_of(m)?;
        if scheme.cardinality(v) != 2 {
            return Err(Error::InvalidArgument(format!("mutation `{m}` must be binary")));
        }
        mutation_idx.push((v, scheme.state_index(v, &config.mutation_state)?));
    }
    let mut cells = Vec::with_capacity(treatments.len());
    for tr in treatments {
        let treated_state = scheme.state_index(t, tr)?;
        let row = mutation_idx
            .iter()
            .map(|&(v, s)| {
                let q = InterventionQuery {
                    treatment: t,
                    treated_state,
                    control_state,
                    outcome,
                    outcome_values: config.outcome_values.clone(),
                    evidence: [(v, s)].into_iter().collect(),
                };
                ate(net, &q)
            })
            .collect::<Result<Vec<_>>>()?;
        cells.push(row);
    }
    Ok(AteGrid {
        treatments: treatments.iter().map(|s| s.to_string()).collect(),
        mutations: mutations.iter().map(|s| s.to_string()).collect(),
        cells,
    })
}

const GRID_CORNER: &str = "Treatment Category";

impl AteGrid {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(GRID_CORNER);
        for m in &self.mutations {
            out.push(',');
            out.push_str(&csv_field(m));
        }
        out.push('\n');
        for (t, row) in self.treatments.iter().zip(&self.cells) {
            out.push_str(&csv_field(t));
            for x in row {
                let _ = write!(out, ",{x:.6}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|r| r.iter().map(|x| format!("{x:.6}")).collect())
            .collect();
        let first = self
            .treatments
            .iter()
            .map(String::len)
            .chain([GRID_CORNER.len()])
            .max()
            .unwrap();
        let widths: Vec<usize> = self
            .mutations
            .iter()
            .enumerate()
            .map(|(m, name)| cells.iter().map(|r| r[m].len()).chain([name.len()]).max().unwrap())
            .collect();
        let mut out = String::new();
        let _ = write!(out, "{GRID_CORNER:<first$}");
        for (name, w) in self.mutations.iter().zip(&widths) {
            let _ = write!(out, "  {name:>w$}");
        }
        out.push('\n');
        for (t, row) in self.treatments.iter().zip(&cells) {
            let _ = write!(out, "{t:<first$}");
            for (c, w) in row.iter().zip(&widths) {
                let _ = write!(out, "  {c:>w$}");
            }
            out.push('\n');
        }
        out
    }
}
