//! NOTEARS: least-squares structure learning under the trace-exponential
//! acyclicity constraint, solved by an augmented Lagrangian.

mod lbfgs;
mod linalg;

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use lbfgs::{minimize, LbfgsOptions, Minimum};
pub use linalg::{acyclicity_h, expm, objective_and_grad};

use crate::data::CategoricalDataset;
use crate::error::{Error, Result};
use crate::graph::{find_cycle, Dag, VariableScheme};
use crate::scoring::csv_field;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NotearsConfig {
    pub max_iter: usize,
    pub h_tol: f64,
    pub w_threshold: f64,
    pub l1_penalty: f64,
    pub rho_init: f64,
    pub rho_max: f64,
    pub alpha_init: f64,
}

impl Default for NotearsConfig {
    fn default() -> Self {
        NotearsConfig {
            max_iter: 100,
            h_tol: 1e-8,
            w_threshold: 0.5,
            l1_penalty: 0.1,
            rho_init: 1.0,
            rho_max: 1e16,
            alpha_init: 0.0,
        }
    }
}

impl NotearsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("max_iter", self.max_iter as f64),
            ("h_tol", self.h_tol),
            ("w_threshold", self.w_threshold),
            ("rho_init", self.rho_init),
            ("rho_max", self.rho_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.l1_penalty >= 0.0) || !(self.alpha_init >= 0.0) {
            return Err(Error::InvalidArgument("l1_penalty and alpha_init must be nonnegative".into()));
        }
        if self.h_tol >= 1.0 {
            return Err(Error::InvalidArgument("h_tol must be below 1".into()));
        }
        Ok(())
    }
}

/// Real-valued weights with `w[(i, j)]` the weight of `i -> j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAdjacency {
    scheme: Arc<VariableScheme>,
    w: DMatrix<f64>,
}

impl WeightedAdjacency {
    pub fn new(scheme: Arc<VariableScheme>, w: DMatrix<f64>) -> Result<Self> {
        let d = scheme.len();
        if w.nrows() != d || w.ncols() != d {
            return Err(Error::Shape(format!("weights are {}x{}, expected {d}x{d}", w.nrows(), w.ncols())));
        }
        if (0..d).any(|i| w[(i, i)] != 0.0) || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("weights need a zero diagonal and finite entries".into()));
        }
        Ok(WeightedAdjacency { scheme, w })
    }

    pub fn scheme(&self) -> &Arc<VariableScheme> {
        &self.scheme
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.w[(from, to)]
    }

    pub fn to_csv(&self) -> String {
        let d = self.scheme.len();
        let mut out = String::new();
        for name in self.scheme.names() {
            out.push(',');
            out.push_str(&csv_field(name));
        }
        out.push('\n');
        for i in 0..d {
            out.push_str(&csv_field(self.scheme.name(i)));
            for j in 0..d {
                let _ = write!(out, ",{:.6}", self.w[(i, j)]);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct NotearsResult {
    pub raw: WeightedAdjacency,
    pub dag: Dag,
    /// `h` of the raw weights.
    pub h: f64,
    /// False when the outer loop ran out before `h <= h_tol`.
    pub converged: bool,
    /// Edges dropped after thresholding to break leftover cycles.
    pub removed_edges: Vec<(usize, usize)>,
}

/// State indices as columns, centered and scaled to unit variance.
/// Constant columns become zero.
pub fn standardized_matrix(data: &CategoricalDataset) -> DMatrix<f64> {
    let (n, d) = (data.n_rows(), data.n_vars());
    let mut x = DMatrix::from_fn(n, d, |r, c| data.value(r, c) as f64);
    for mut col in x.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / n as f64).sqrt();
        if sd > 1e-12 {
            col /= sd;
        } else {
            col.fill(0.0);
        }
    }
    x
}

pub fn notears_fit(data: &CategoricalDataset, config: &NotearsConfig) -> Result<NotearsResult> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset("NOTEARS needs at least one row".into()));
    }
    notears_fit_matrix(&standardized_matrix(data), data.scheme().clone(), config)
}

/// Fits on an arbitrary `N x d` matrix, used as given.
pub fn notears_fit_matrix(
    x: &DMatrix<f64>,
    scheme: Arc<VariableScheme>,
    config: &NotearsConfig,
) -> Result<NotearsResult> {
    config.validate()?;
    let d = scheme.len();
    if x.ncols() != d {
        return Err(Error::Shape(format!("data has {} columns, scheme has {d}", x.ncols())));
    }
    if x.nrows() == 0 {
        return Err(Error::EmptyDataset("NOTEARS needs at least one row".into()));
    }
    let dd = d * d;
    // w = w_pos - w_neg with both halves nonnegative; the diagonal is pinned
    let lower = vec![0.0; 2 * dd];
    let upper: Vec<f64> = (0..2 * dd)
        .map(|k| if (k % dd) / d == k % d { 0.0 } else { f64::INFINITY })
        .collect();
    let unpack = |z: &[f64]| DMatrix::from_fn(d, d, |i, j| z[i * d + j] - z[dd + i * d + j]);

    let mut z = vec![0.0; 2 * dd];
    let (mut rho, mut alpha, mut h) = (config.rho_init, config.alpha_init, f64::INFINITY);
    let opts = LbfgsOptions::default();
    let l1 = config.l1_penalty;
    for outer in 0..config.max_iter {
        let mut h_new;
        let mut z_new;
        loop {
            let fg = |z: &[f64]| {
                let w = unpack(z);
                let (loss, g_loss) = objective_and_grad(&w, x, 0.0);
                let (hv, g_h) = acyclicity_h(&w);
                let f = loss + 0.5 * rho * hv * hv + alpha * hv + l1 * z.iter().sum::<f64>();
                let g = g_loss + g_h * (rho * hv + alpha);
                let mut grad = vec![0.0; 2 * dd];
                for i in 0..d {
                    for j in 0..d {
                        grad[i * d + j] = g[(i, j)] + l1;
                        grad[dd + i * d + j] = -g[(i, j)] + l1;
                    }
                }
                (f, grad)
            };
            let m = minimize(fg, &z, &lower, &upper, &opts);
            z_new = m.x;
            h_new = acyclicity_h(&unpack(&z_new)).0;
            log::debug!(
                "notears: outer {outer} rho {rho:e} h {h_new:e} inner {} |pg| {:e}",
                m.iterations,
                m.projected_grad_norm
            );
            if h_new > 0.25 * h {
                rho *= 10.0;
            } else {
                break;
            }
            if rho >= config.rho_max {
                break;
            }
        }
        z = z_new;
        h = h_new;
        alpha += rho * h;
        if h <= config.h_tol || rho >= config.rho_max {
            break;
        }
    }
    let converged = h <= config.h_tol;
    if !converged {
        log::warn!("notears: stopped with h = {h:e} above tolerance {:e}", config.h_tol);
    }
    let mut w = unpack(&z);
    for i in 0..d {
        w[(i, i)] = 0.0;
    }
    let raw = WeightedAdjacency::new(scheme.clone(), w.clone())?;

    let mut adj: Vec<Vec<u8>> = (0..d)
        .map(|i| (0..d).map(|j| u8::from(w[(i, j)].abs() >= config.w_threshold)).collect())
        .collect();
    let mut removed = Vec::new();
    while let Some(cycle) = find_cycle(&adj)? {
        let &(u, v) = cycle
            .iter()
            .min_by(|a, b| w[**a].abs().total_cmp(&w[**b].abs()))
            .expect("cycles have edges");
        log::warn!(
            "notears: dropped {} -> {} (|w| = {:.4}) to break a cycle",
            scheme.name(u),
            scheme.name(v),
            w[(u, v)].abs()
        );
        adj[u][v] = 0;
        removed.push((u, v));
    }
    let dag = Dag::from_adjacency(scheme, &adj)?;
    Ok(NotearsResult {
        raw,
        dag,
        h,
        converged,
        removed_edges: removed,
    })
}
