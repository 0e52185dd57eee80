#![allow(dead_code)]

use std::sync::Arc;

use causalprior::bayesnet::{BayesianNetwork, Cpd};
use causalprior::data::CategoricalDataset;
use causalprior::graph::{Dag, Variable, VariableScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `d` variables named V0.. with 2 or 3 states each.
pub fn random_scheme(d: usize, r: &mut ChaCha8Rng) -> Arc<VariableScheme> {
    let states = ["s0", "s1", "s2"];
    let vars = (0..d)
        .map(|i| Variable::new(format!("V{i}"), &states[..r.random_range(2..=3)]))
        .collect();
    Arc::new(VariableScheme::new(vars).unwrap())
}

/// Random DAG over a shuffled order with edge probability `p`.
pub fn random_dag(scheme: Arc<VariableScheme>, p: f64, r: &mut ChaCha8Rng) -> Dag {
    let d = scheme.len();
    let mut order: Vec<usize> = (0..d).collect();
    rand::seq::SliceRandom::shuffle(&mut order[..], r);
    let mut edges = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if r.random_bool(p) {
                edges.push((order[a], order[b]));
            }
        }
    }
    Dag::from_edges(scheme, edges).unwrap()
}

pub fn random_network(dag: &Dag, r: &mut ChaCha8Rng) -> BayesianNetwork {
    let s = dag.scheme();
    let cpds = (0..dag.len())
        .map(|v| {
            let parents: Vec<usize> = dag.parents(v).iter().copied().collect();
            let q: usize = parents.iter().map(|&p| s.cardinality(p)).product();
            let table = (0..q)
                .map(|_| {
                    let w: Vec<f64> = (0..s.cardinality(v)).map(|_| r.random_range(0.05..1.0)).collect();
                    let z: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / z).collect()
                })
                .collect();
            Cpd::new(s, v, parents, table).unwrap()
        })
        .collect();
    BayesianNetwork::new(dag.clone(), cpds).unwrap()
}

pub fn random_dataset(scheme: Arc<VariableScheme>, n: usize, r: &mut ChaCha8Rng) -> CategoricalDataset {
    let rows: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..scheme.len()).map(|v| r.random_range(0..scheme.cardinality(v))).collect())
        .collect();
    CategoricalDataset::new(scheme, &rows).unwrap()
}
