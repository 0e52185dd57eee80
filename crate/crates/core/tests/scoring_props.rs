mod common;

use std::sync::Arc;

use causalprior::bayesnet::{BayesianNetwork, Cpd};
use causalprior::data::{contingency_counts, CategoricalDataset, CountTable};
use causalprior::graph::{Dag, VariableScheme};
use causalprior::scoring::{bdeu_family_canonical, bdeu_family_paper, bdeu_total, ScoreTable, ScoreVariant};
use causalprior::synth::sample_from_network;
use proptest::prelude::*;
use rand::Rng;

/// Canonical BDeu with `ln G(a + n) - ln G(a) = sum_{k<n} ln(a + k)`, so no
/// gamma function is needed for integer counts.
fn canonical_oracle(t: &CountTable, alpha: f64) -> f64 {
    let q = t.n_configs() as f64;
    let r = t.child_card as f64;
    let rising = |a: f64, n: u64| (0..n).map(|k| (a + k as f64).ln()).sum::<f64>();
    t.counts
        .iter()
        .map(|row| {
            let n: u64 = row.iter().sum();
            -rising(alpha / q, n) + row.iter().map(|&c| rising(alpha / (q * r), c)).sum::<f64>()
        })
        .sum()
}

fn all_dags_3(s: &Arc<VariableScheme>) -> Vec<Dag> {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    (0..27)
        .filter_map(|code: usize| {
            let mut c = code;
            let mut e = Vec::new();
            for &(u, v) in &pairs {
                match c % 3 {
                    1 => e.push((u, v)),
                    2 => e.push((v, u)),
                    _ => {}
                }
                c /= 3;
            }
            Dag::from_edges(s.clone(), e).ok()
        })
        .collect()
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |x: &[f64]| {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
        let mut r = vec![0.0; x.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn hand_values() {
    let t = CountTable::from_counts(2, vec![], vec![vec![3, 1]]).unwrap();
    assert!((bdeu_family_paper(&t, 1.0) - (3.5 * 0.7f64.ln() + 1.5 * 0.3f64.ln())).abs() < 1e-12);
    assert!((bdeu_family_paper(&t, 1.0) + 3.054321).abs() < 1e-6);
    assert!((bdeu_family_canonical(&t, 1.0) + 3.242593).abs() < 1e-6);
    assert!((bdeu_family_canonical(&t, 1.0) - bdeu_family_paper(&t, 1.0)).abs() < 1.0);
}

proptest! {
    #[test]
    fn canonical_matches_rising_factorial_oracle(seed in any::<u64>(), n in 0usize..200, alpha in 0.1f64..20.0) {
        let mut r = common::rng(seed);
        let s = common::random_scheme(4, &mut r);
        let data = common::random_dataset(s, n, &mut r);
        let parents: Vec<usize> = (1..4).filter(|_| r.random_bool(0.5)).collect();
        let t = contingency_counts(&data, 0, &parents).unwrap();
        let got = bdeu_family_canonical(&t, alpha);
        let want = canonical_oracle(&t, alpha);
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn totals_decompose(seed in any::<u64>(), variant in prop_oneof![Just(ScoreVariant::Paper), Just(ScoreVariant::Canonical)]) {
        let mut r = common::rng(seed);
        let s = common::random_scheme(5, &mut r);
        let data = common::random_dataset(s.clone(), 150, &mut r);
        let dag = common::random_dag(s.clone(), 0.4, &mut r);
        let report = bdeu_total(&dag, &data, 10.0, variant).unwrap();
        let sum: f64 = report.families.iter().map(|f| f.score).sum();
        prop_assert_eq!(sum, report.total);
        prop_assert!(report.total.is_finite());

        // change one node's parent set
        let v = r.random_range(0..5);
        let mut edges: Vec<(usize, usize)> = dag.edges().into_iter().filter(|&(_, c)| c != v).collect();
        for p in dag.topological_order() {
            if p == v {
                break;
            }
            if r.random_bool(0.5) {
                edges.push((p, v));
            }
        }
        let other = Dag::from_edges(s, edges).unwrap();
        let report2 = bdeu_total(&other, &data, 10.0, variant).unwrap();
        for (a, b) in report.families.iter().zip(&report2.families) {
            if a.variable != s_name(&report, v) {
                prop_assert_eq!(a.score, b.score);
            }
        }
    }

    #[test]
    fn canonical_is_score_equivalent_on_two_nodes(seed in any::<u64>(), n in 1usize..300, alpha in 0.5f64..20.0) {
        let mut r = common::rng(seed);
        let s = common::random_scheme(2, &mut r);
        let data = common::random_dataset(s.clone(), n, &mut r);
        let xy = Dag::from_edges(s.clone(), [(0, 1)]).unwrap();
        let yx = Dag::from_edges(s, [(1, 0)]).unwrap();
        let a = bdeu_total(&xy, &data, alpha, ScoreVariant::Canonical).unwrap().total;
        let b = bdeu_total(&yx, &data, alpha, ScoreVariant::Canonical).unwrap().total;
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn row_permutation_invariance(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let s = common::random_scheme(4, &mut r);
        let data = common::random_dataset(s.clone(), 120, &mut r);
        let dag = common::random_dag(s, 0.5, &mut r);
        let mut order: Vec<usize> = (0..120).collect();
        rand::seq::SliceRandom::shuffle(&mut order[..], &mut r);
        let shuffled = data.permute_rows(&order).unwrap();
        for variant in [ScoreVariant::Paper, ScoreVariant::Canonical] {
            let a = bdeu_total(&dag, &data, 5.0, variant).unwrap();
            let b = bdeu_total(&dag, &shuffled, 5.0, variant).unwrap();
            for (x, y) in a.families.iter().zip(&b.families) {
                prop_assert_eq!(x.score, y.score);
            }
        }
    }
}

fn s_name(report: &causalprior::scoring::ScoreReport, v: usize) -> String {
    report.families[v].variable.clone()
}

#[test]
fn empty_graph_wins_on_independent_data() {
    let s = Arc::new(VariableScheme::binary(&["A", "B", "C"]).unwrap());
    let dags = all_dags_3(&s);
    assert_eq!(dags.len(), 25);
    for seed in 0..10 {
        let mut r = common::rng(seed);
        let data = common::random_dataset(s.clone(), 5000, &mut r);
        let empty = bdeu_total(&Dag::empty(s.clone()), &data, 10.0, ScoreVariant::Canonical).unwrap().total;
        for d in &dags {
            let t = bdeu_total(d, &data, 10.0, ScoreVariant::Canonical).unwrap().total;
            assert!(empty >= t, "seed {seed}: {:?} scores {t} > empty {empty}", d.edges());
        }
    }
}

fn five_node_network() -> BayesianNetwork {
    let s = Arc::new(VariableScheme::binary(&["A", "B", "C", "D", "E"]).unwrap());
    let dag = Dag::from_named_edges(s.clone(), &[("A", "C"), ("B", "C"), ("C", "D"), ("D", "E")]).unwrap();
    let strong = vec![vec![0.85, 0.15], vec![0.2, 0.8]];
    let cpds = vec![
        Cpd::new(&s, 0, vec![], vec![vec![0.6, 0.4]]).unwrap(),
        Cpd::new(&s, 1, vec![], vec![vec![0.3, 0.7]]).unwrap(),
        Cpd::new(&s, 2, vec![0, 1], vec![vec![0.9, 0.1], vec![0.4, 0.6], vec![0.5, 0.5], vec![0.05, 0.95]]).unwrap(),
        Cpd::new(&s, 3, vec![2], strong.clone()).unwrap(),
        Cpd::new(&s, 4, vec![3], strong).unwrap(),
    ];
    BayesianNetwork::new(dag, cpds).unwrap()
}

#[test]
fn generating_graph_beats_reversal() {
    let net = five_node_network();
    let data = sample_from_network(&net, 10_000, 17).unwrap();
    let reversed = Dag::from_edges(net.scheme().clone(), net.dag().edges().into_iter().map(|(u, v)| (v, u))).unwrap();
    let graphs = vec![("true".to_string(), net.dag().clone()), ("reversed".to_string(), reversed)];
    for variant in [ScoreVariant::Canonical, ScoreVariant::Paper] {
        let table = ScoreTable::build(&graphs, &data, &[5.0, 10.0, 15.0], variant).unwrap();
        assert_eq!(table.totals.len(), 3);
        for row in &table.totals {
            assert!(row[0] > row[1], "{variant}: {row:?}");
        }
    }
}

#[test]
fn variants_rank_random_graphs_alike() {
    let mut r = common::rng(99);
    let s = Arc::new(VariableScheme::binary(&["A", "B", "C", "D"]).unwrap());
    let truth = common::random_dag(s.clone(), 0.6, &mut r);
    let net = common::random_network(&truth, &mut r);
    let data: CategoricalDataset = sample_from_network(&net, 3000, 5).unwrap();
    let dags: Vec<Dag> = (0..20).map(|_| common::random_dag(s.clone(), 0.5, &mut r)).collect();
    let score = |v| -> Vec<f64> { dags.iter().map(|d| bdeu_total(d, &data, 10.0, v).unwrap().total).collect() };
    let rho = spearman(&score(ScoreVariant::Paper), &score(ScoreVariant::Canonical));
    assert!(rho > 0.9, "spearman {rho}");
}
