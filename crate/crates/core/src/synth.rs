//! Synthetic data: ancestral sampling from a network and independent draws
//! from marginal targets.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64`, which is
//! specified bit-for-bit and therefore reproducible across platforms.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayesnet::{BayesianNetwork, Cpd};
use crate::data::CategoricalDataset;
use crate::error::{Error, Result};
use crate::graph::{Dag, VariableScheme};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Inverse-CDF draw from a discrete distribution.
pub(crate) fn draw<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // u landed in the rounding gap above the last cumulative sum
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

/// Draws `n` rows by ancestral sampling in topological order.
pub fn sample_from_network(net: &BayesianNetwork, n: usize, seed: u64) -> Result<CategoricalDataset> {
    let d = net.len();
    if d == 0 || net.cpds().len() != d {
        return Err(Error::UnparameterizedNetwork("no CPDs".into()));
    }
    let order = net.dag().topological_order();
    let mut rng = rng_from_seed(seed);
    let mut cells = Vec::with_capacity(n * d);
    let mut assignment = vec![0usize; d];
    for _ in 0..n {
        for &v in &order {
            let row = net.cpd(v).row_for(&assignment);
            assignment[v] = draw(&mut rng, row);
        }
        cells.extend(assignment.iter().map(|&x| x as u16));
    }
    CategoricalDataset::from_cells(net.scheme().clone(), cells)
}

/// Record count, per-variable marginal targets (keyed by variable name, in
/// state order) and seed for [`generate_cohort`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub n: usize,
    pub marginals: BTreeMap<String, Vec<f64>>,
    pub seed: u64,
}

/// Independent per-variable draws matching the marginal targets.
pub fn generate_cohort(scheme: Arc<VariableScheme>, spec: &CohortSpec) -> Result<CategoricalDataset> {
    if spec.n == 0 {
        return Err(Error::InvalidArgument("cohort size must be at least 1".into()));
    }
    let mut targets = Vec::with_capacity(scheme.len());
    for v in 0..scheme.len() {
        let name = scheme.name(v);
        let p = spec
            .marginals
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("no marginal target for `{name}`")))?;
        if p.len() != scheme.cardinality(v) {
            return Err(Error::MarginalMismatch {
                variable: name.to_string(),
                expected: scheme.cardinality(v),
                got: p.len(),
            });
        }
        let sum: f64 = p.iter().sum();
        if p.iter().any(|x| !(*x >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "marginal for `{name}` must be nonnegative and sum to 1, sums to {sum}"
            )));
        }
        targets.push(p.as_slice());
    }
    if let Some(extra) = spec.marginals.keys().find(|k| scheme.index_of(k).is_err()) {
        return Err(Error::UnknownVariable(extra.clone()));
    }
    let mut rng = rng_from_seed(spec.seed);
    let mut cells = Vec::with_capacity(spec.n * scheme.len());
    for _ in 0..spec.n {
        for p in &targets {
            cells.push(draw(&mut rng, p) as u16);
        }
    }
    CategoricalDataset::from_cells(scheme, cells)
}

/// Parameterizes `dag` with CPDs whose logits are the log of each node's
/// base marginal plus a fixed random effect for every non-reference parent
/// state. Effects are drawn uniformly from `[-strength, strength]`.
/// Root nodes reproduce their base marginal exactly.
pub fn logit_network(
    dag: &Dag,
    base: &BTreeMap<String, Vec<f64>>,
    strength: f64,
    seed: u64,
) -> Result<BayesianNetwork> {
    let scheme = dag.scheme();
    let mut rng = rng_from_seed(seed);
    let mut cpds = Vec::with_capacity(dag.len());
    for v in 0..dag.len() {
        let name = scheme.name(v);
        let card = scheme.cardinality(v);
        let base_p = match base.get(name) {
            Some(p) if p.len() == card => p.clone(),
            Some(p) => {
                return Err(Error::MarginalMismatch {
                    variable: name.to_string(),
                    expected: card,
                    got: p.len(),
                })
            }
            None => vec![1.0 / card as f64; card],
        };
        let parents: Vec<usize> = dag.parents(v).iter().copied().collect();
        let parent_cards: Vec<usize> = parents.iter().map(|&p| scheme.cardinality(p)).collect();
        // effects[k][s][j]: parent k in state s shifts the logit of child state j
        let effects: Vec<Vec<Vec<f64>>> = parent_cards
            .iter()
            .map(|&pc| {
                (0..pc)
                    .map(|s| {
                        (0..card)
                            .map(|_| {
                                let e = rng.random_range(-strength..=strength);
                                if s == 0 { 0.0 } else { e }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let n_configs: usize = parent_cards.iter().product();
        let strides = crate::data::config_strides(&parent_cards);
        let mut table = Vec::with_capacity(n_configs);
        for i in 0..n_configs {
            let mut logits: Vec<f64> = base_p.iter().map(|p| p.max(1e-12).ln()).collect();
            for (k, (&stride, &pc)) in strides.iter().zip(&parent_cards).enumerate() {
                let s = (i / stride) % pc;
                for (l, e) in logits.iter_mut().zip(&effects[k][s]) {
                    *l += e;
                }
            }
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
            let z: f64 = w.iter().sum();
            table.push(w.iter().map(|x| x / z).collect());
        }
        cpds.push(Cpd::new(scheme, v, parents, table)?);
    }
    BayesianNetwork::new(dag.clone(), cpds)
}

/// Reference network on the final elicited structure with marginals taken
/// from the cohort summary. Used as correlated ground truth.
pub fn reference_nsclc_network(seed: u64) -> BayesianNetwork {
    logit_network(&crate::nsclc::v5_dag(), &crate::nsclc::table1_marginals(), 1.5, seed)
        .expect("reference network parameterization is valid")
}
