use std::sync::Arc;

use causalprior::graph::{is_acyclic, structural_hamming_distance, Dag, VariableScheme};
use causalprior::notears::{
    acyclicity_h, notears_fit, notears_fit_matrix, objective_and_grad, standardized_matrix, NotearsConfig,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(d: usize) -> Arc<VariableScheme> {
    let n: Vec<String> = (0..d).map(|i| format!("X{}", i + 1)).collect();
    let r: Vec<&str> = n.iter().map(String::as_str).collect();
    Arc::new(VariableScheme::binary(&r).unwrap())
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Samples a linear SEM `X = X W + E` with unit Gaussian noise, columns
/// in topological order `0..d`.
fn sample_sem(w: &DMatrix<f64>, n: usize, seed: u64) -> DMatrix<f64> {
    let d = w.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, d);
    for r in 0..n {
        for j in 0..d {
            let mut v = gaussian(&mut rng);
            for i in 0..j {
                v += x[(r, i)] * w[(i, j)];
            }
            x[(r, j)] = v;
        }
    }
    for mut col in x.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    x
}

fn random_matrix(d: usize, seed: u64, scale: f64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { rng.random_range(-scale..scale) })
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn h_vanishes_on_dag_supports(d in 2usize..8, seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perm: Vec<usize> = {
            let mut p: Vec<usize> = (0..d).collect();
            rand::seq::SliceRandom::shuffle(&mut p[..], &mut rng);
            p
        };
        let mut w = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in a + 1..d {
                if rng.random_bool(0.5) {
                    w[(perm[a], perm[b])] = rng.random_range(-2.0..2.0);
                }
            }
        }
        let adj: Vec<Vec<u8>> = (0..d).map(|i| (0..d).map(|j| u8::from(w[(i, j)] != 0.0)).collect()).collect();
        prop_assert!(is_acyclic(&adj).unwrap());
        let (h, _) = acyclicity_h(&w);
        prop_assert!(h.abs() < 1e-9, "h = {}", h);
    }

    #[test]
    fn h_is_nonnegative_and_gradient_matches(d in 2usize..6, seed in 0u64..10_000) {
        let w = random_matrix(d, seed, 1.0);
        let (h, g) = acyclicity_h(&w);
        prop_assert!(h >= -1e-12);
        let eps = 1e-6;
        for i in 0..d {
            for j in 0..d {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[(i, j)] += eps;
                wm[(i, j)] -= eps;
                let fd = (acyclicity_h(&wp).0 - acyclicity_h(&wm).0) / (2.0 * eps);
                prop_assert!(rel_err(fd, g[(i, j)]) < 1e-5, "{} vs {}", fd, g[(i, j)]);
            }
        }
    }

    #[test]
    fn loss_gradient_matches(d in 2usize..6, seed in 0u64..10_000) {
        let w = random_matrix(d, seed, 1.0);
        let x = random_matrix(20, seed + 1, 2.0).columns(0, d).into_owned();
        let (_, g) = objective_and_grad(&w, &x, 0.0);
        let eps = 1e-6;
        for i in 0..d {
            for j in 0..d {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[(i, j)] += eps;
                wm[(i, j)] -= eps;
                let fd = (objective_and_grad(&wp, &x, 0.0).0 - objective_and_grad(&wm, &x, 0.0).0) / (2.0 * eps);
                prop_assert!(rel_err(fd, g[(i, j)]) < 1e-5, "{} vs {}", fd, g[(i, j)]);
            }
        }
    }
}

#[test]
fn independent_standardized_columns_at_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<usize>> = (0..20_000).map(|_| (0..4).map(|_| rng.random_range(0..2)).collect()).collect();
    let data = causalprior::data::CategoricalDataset::new(names(4), &rows).unwrap();
    let x = standardized_matrix(&data);
    let (loss, g) = objective_and_grad(&DMatrix::zeros(4, 4), &x, 0.1);
    assert!((loss - 2.0).abs() < 1e-9);
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert!(g[(i, j)].abs() < 0.03, "{}", g[(i, j)]);
            }
        }
    }
}

#[test]
fn constant_columns_are_zeroed() {
    let rows: Vec<Vec<usize>> = (0..10).map(|i| vec![i % 2, 1]).collect();
    let data = causalprior::data::CategoricalDataset::new(names(2), &rows).unwrap();
    let x = standardized_matrix(&data);
    assert!(x.column(1).iter().all(|v| *v == 0.0));
    assert!((x.column(0).norm_squared() / 10.0 - 1.0).abs() < 1e-12);
}

#[test]
fn two_node_sem() {
    let mut w = DMatrix::zeros(2, 2);
    w[(0, 1)] = 0.8;
    let x = sample_sem(&w, 5000, 1);
    let cfg = NotearsConfig {
        l1_penalty: 0.01,
        ..Default::default()
    };
    let fit = notears_fit_matrix(&x, names(2), &cfg).unwrap();
    assert_eq!(fit.dag.edges(), vec![(0, 1)]);
    assert!((fit.raw.get(0, 1) - 0.8).abs() < 0.1, "{}", fit.raw.get(0, 1));
    assert!(fit.converged);
    assert!(fit.h <= 1e-8);
}

#[test]
fn ten_node_sem() {
    let d = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut w = DMatrix::zeros(d, d);
    let mut edges = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            if rng.random_bool(0.2) {
                let mag = rng.random_range(0.5..2.0);
                w[(i, j)] = if rng.random_bool(0.5) { mag } else { -mag };
                edges.push((i, j));
            }
        }
    }
    let x = sample_sem(&w, 5000, 11);
    let cfg = NotearsConfig {
        l1_penalty: 0.01,
        ..Default::default()
    };
    let fit = notears_fit_matrix(&x, names(d), &cfg).unwrap();
    let truth = Dag::from_edges(names(d), edges).unwrap();
    let shd = structural_hamming_distance(&fit.dag.to_pdag(), &truth.to_pdag()).unwrap();
    println!("ten-node SEM: {} true edges, SHD {shd}", truth.edge_count());
    assert!(shd <= 2, "SHD {shd}");
    assert!(fit.converged);
}

#[test]
fn categorical_fit_is_deterministic_and_acyclic() {
    let net = causalprior::synth::reference_nsclc_network(3);
    let data = causalprior::synth::sample_from_network(&net, 1000, 3).unwrap();
    let cfg = NotearsConfig::default();
    let a = notears_fit(&data, &cfg).unwrap();
    let b = notears_fit(&data, &cfg).unwrap();
    assert_eq!(a.raw, b.raw);
    assert_eq!(a.dag, b.dag);
    assert!(is_acyclic(&a.dag.to_adjacency()).unwrap());
    for (u, v) in a.dag.edges() {
        assert!(a.raw.get(u, v).abs() >= cfg.w_threshold);
    }
}

#[test]
fn config_validation() {
    let bad = NotearsConfig {
        h_tol: 2.0,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
    let bad = NotearsConfig {
        w_threshold: 0.0,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
    assert!(NotearsConfig::default().validate().is_ok());
}
