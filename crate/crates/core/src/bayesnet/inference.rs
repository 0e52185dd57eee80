//! Exact posterior queries: sum-product variable elimination, plus a
//! full-joint enumeration used as a reference.

use std::collections::{BTreeMap, BTreeSet};

use super::{BayesianNetwork, Factor};
use crate::data::config_strides;
use crate::error::{Error, Result};

/// Observed states keyed by variable index.
pub type Evidence = BTreeMap<usize, usize>;

const MAX_JOINT_ENTRIES: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EliminationHeuristic {
    /// Eliminate the variable adding the fewest fill edges; ties go to the
    /// lowest index.
    MinFill,
    /// Eliminate in ascending scheme index.
    SchemeOrder,
}

fn validate(net: &BayesianNetwork, query: &[usize], evidence: &Evidence) -> Result<()> {
    let n = net.len();
    let scheme = net.scheme();
    for (k, &q) in query.iter().enumerate() {
        if q >= n {
            return Err(Error::UnknownVariable(format!("index {q}")));
        }
        if query[..k].contains(&q) {
            return Err(Error::InvalidArgument(format!("`{}` queried twice", scheme.name(q))));
        }
        if evidence.contains_key(&q) {
            return Err(Error::InvalidArgument(format!(
                "`{}` is both queried and observed",
                scheme.name(q)
            )));
        }
    }
    for (&v, &s) in evidence {
        if v >= n {
            return Err(Error::UnknownVariable(format!("index {v}")));
        }
        if s >= scheme.cardinality(v) {
            return Err(Error::UnknownState {
                variable: scheme.name(v).to_string(),
                state: s.to_string(),
            });
        }
    }
    Ok(())
}

/// `P(query | evidence)` with the min-fill elimination order.
pub fn variable_elimination(net: &BayesianNetwork, query: &[usize], evidence: &Evidence) -> Result<Factor> {
    variable_elimination_with(net, query, evidence, EliminationHeuristic::MinFill)
}

pub fn variable_elimination_with(
    net: &BayesianNetwork,
    query: &[usize],
    evidence: &Evidence,
    heuristic: EliminationHeuristic,
) -> Result<Factor> {
    validate(net, query, evidence)?;
    let dag = net.dag();

    // Only ancestors of the query and evidence carry information; the other
    // CPDs sum to one.
    let mut relevant = vec![false; net.len()];
    let mut stack: Vec<usize> = query.iter().chain(evidence.keys()).copied().collect();
    while let Some(v) = stack.pop() {
        if !std::mem::replace(&mut relevant[v], true) {
            stack.extend(dag.parents(v).iter().copied());
        }
    }

    let mut factors = Vec::new();
    for v in (0..net.len()).filter(|&v| relevant[v]) {
        let mut f = net.cpd(v).to_factor();
        for (&e, &s) in evidence {
            f = f.reduce(e, s)?;
        }
        factors.push(f);
    }

    let hidden: BTreeSet<usize> = (0..net.len())
        .filter(|v| relevant[*v] && !query.contains(v) && !evidence.contains_key(v))
        .collect();
    let order = match heuristic {
        EliminationHeuristic::SchemeOrder => hidden.iter().copied().collect(),
        EliminationHeuristic::MinFill => min_fill_order(&factors, &hidden),
    };

    for var in order {
        let (with, without): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars().contains(&var));
        factors = without;
        let mut prod = Factor::scalar(1.0);
        for f in &with {
            prod = prod.product(f)?;
        }
        factors.push(prod.marginalize(var)?);
    }

    let mut joint = Factor::scalar(1.0);
    for f in &factors {
        joint = joint.product(f)?;
    }
    joint.permuted(query)?.normalized()
}

fn min_fill_order(factors: &[Factor], hidden: &BTreeSet<usize>) -> Vec<usize> {
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for f in factors {
        for &a in f.vars() {
            let entry = adj.entry(a).or_default();
            entry.extend(f.vars().iter().copied().filter(|&b| b != a));
        }
    }
    let mut remaining = hidden.clone();
    let mut order = Vec::with_capacity(hidden.len());
    while !remaining.is_empty() {
        let fill = |v: usize| -> usize {
            let nb: Vec<usize> = adj.get(&v).map(|s| s.iter().copied().collect()).unwrap_or_default();
            let mut missing = 0;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if !adj[&a].contains(&b) {
                        missing += 1;
                    }
                }
            }
            missing
        };
        // BTreeSet iteration is ascending, so min_by_key keeps the lowest index on ties
        let v = *remaining.iter().min_by_key(|&&v| fill(v)).unwrap();
        remaining.remove(&v);
        order.push(v);
        let nb: Vec<usize> = adj.remove(&v).map(|s| s.into_iter().collect()).unwrap_or_default();
        for &a in &nb {
            let entry = adj.get_mut(&a).unwrap();
            entry.remove(&v);
            entry.extend(nb.iter().copied().filter(|&b| b != a));
        }
    }
    order
}

/// Reference implementation: enumerates the full joint distribution.
pub fn brute_force_query(net: &BayesianNetwork, query: &[usize], evidence: &Evidence) -> Result<Factor> {
    validate(net, query, evidence)?;
    let cards = net.scheme().cardinalities();
    let size: u128 = cards.iter().map(|&c| c as u128).product();
    if size > MAX_JOINT_ENTRIES {
        return Err(Error::StateSpaceTooLarge(size));
    }
    let q_cards: Vec<usize> = query.iter().map(|&q| cards[q]).collect();
    let q_strides = config_strides(&q_cards);
    let mut out = vec![0.0; q_cards.iter().product()];
    let mut assignment = vec![0usize; cards.len()];
    'outer: loop {
        if evidence.iter().all(|(&v, &s)| assignment[v] == s) {
            let idx: usize = query.iter().zip(&q_strides).map(|(&q, s)| assignment[q] * s).sum();
            out[idx] += net.joint_probability(&assignment);
        }
        for k in (0..cards.len()).rev() {
            assignment[k] += 1;
            if assignment[k] < cards[k] {
                continue 'outer;
            }
            assignment[k] = 0;
        }
        break;
    }
    Factor::new(query.to_vec(), q_cards, out)?.normalized()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::bayesnet::Cpd;
    use crate::graph::{Dag, VariableScheme};

    fn chain() -> BayesianNetwork {
        let s = Arc::new(VariableScheme::binary(&["A", "B"]).unwrap());
        let dag = Dag::from_named_edges(s.clone(), &[("A", "B")]).unwrap();
        let a = Cpd::new(&s, 0, vec![], vec![vec![0.7, 0.3]]).unwrap();
        let b = Cpd::new(&s, 1, vec![0], vec![vec![0.8, 0.2], vec![0.1, 0.9]]).unwrap();
        BayesianNetwork::new(dag, vec![a, b]).unwrap()
    }

    #[test]
    fn chain_marginal() {
        let net = chain();
        let f = variable_elimination(&net, &[1], &Evidence::new()).unwrap();
        // 0.3 * 0.9 + 0.7 * 0.2
        assert!((f.values()[1] - 0.41).abs() < 1e-12);
        let b = brute_force_query(&net, &[1], &Evidence::new()).unwrap();
        assert!((b.values()[1] - 0.41).abs() < 1e-12);
    }

    #[test]
    fn root_query_returns_its_cpd() {
        let net = chain();
        let f = variable_elimination(&net, &[0], &Evidence::new()).unwrap();
        assert!((f.values()[0] - 0.7).abs() < 1e-15);
        assert!((f.values()[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn posterior_by_bayes_rule() {
        let net = chain();
        let ev: Evidence = [(1, 1)].into_iter().collect();
        let f = variable_elimination(&net, &[0], &ev).unwrap();
        assert!((f.values()[1] - 0.27 / 0.41).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_evidence() {
        let s = Arc::new(VariableScheme::binary(&["A", "B"]).unwrap());
        let dag = Dag::from_named_edges(s.clone(), &[("A", "B")]).unwrap();
        let a = Cpd::new(&s, 0, vec![], vec![vec![1.0, 0.0]]).unwrap();
        let b = Cpd::new(&s, 1, vec![0], vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let net = BayesianNetwork::new(dag, vec![a, b]).unwrap();
        let ev: Evidence = [(1, 1)].into_iter().collect();
        assert!(matches!(
            variable_elimination(&net, &[0], &ev),
            Err(Error::ZeroEvidenceProbability)
        ));
        assert!(matches!(
            brute_force_query(&net, &[0], &ev),
            Err(Error::ZeroEvidenceProbability)
        ));
    }

    #[test]
    fn query_validation() {
        let net = chain();
        let ev: Evidence = [(0, 1)].into_iter().collect();
        assert!(variable_elimination(&net, &[0], &ev).is_err());
        assert!(variable_elimination(&net, &[1, 1], &Evidence::new()).is_err());
        let bad: Evidence = [(0, 5)].into_iter().collect();
        assert!(variable_elimination(&net, &[1], &bad).is_err());
    }

    #[test]
    fn independent_joint_is_product() {
        let s = Arc::new(VariableScheme::binary(&["A", "B"]).unwrap());
        let a = Cpd::new(&s, 0, vec![], vec![vec![0.6, 0.4]]).unwrap();
        let b = Cpd::new(&s, 1, vec![], vec![vec![0.25, 0.75]]).unwrap();
        let net = BayesianNetwork::new(Dag::empty(s), vec![a, b]).unwrap();
        let f = brute_force_query(&net, &[0, 1], &Evidence::new()).unwrap();
        assert!((f.get(&[1, 1]) - 0.3).abs() < 1e-15);
        assert!((f.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_fill_prefers_leaves() {
        // star around 0: eliminating the hub first creates fill, leaves do not
        let fs = vec![
            Factor::new(vec![0, 1], vec![2, 2], vec![1.0; 4]).unwrap(),
            Factor::new(vec![0, 2], vec![2, 2], vec![1.0; 4]).unwrap(),
            Factor::new(vec![0, 3], vec![2, 2], vec![1.0; 4]).unwrap(),
        ];
        let hidden: BTreeSet<usize> = [0, 1, 2, 3].into_iter().collect();
        let order = min_fill_order(&fs, &hidden);
        assert_eq!(order[0], 1);
    }
}
