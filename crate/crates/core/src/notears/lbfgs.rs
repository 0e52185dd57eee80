use std::collections::VecDeque;

/// Outcome of a bound-constrained minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub projected_grad_norm: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when the projected gradient's infinity norm falls below this.
    pub gtol: f64,
    /// Stop on a relative decrease of `f` below this.
    pub ftol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 10,
            max_iter: 2000,
            gtol: 1e-6,
            ftol: 1e3 * f64::EPSILON,
        }
    }
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected L-BFGS over the box `lower <= x <= upper`. Variables held at a
/// bound by their gradient are frozen for the step; the quasi-Newton
/// direction is built on the rest and the step is projected back into the
/// box with a backtracking Armijo search.
pub fn minimize<F>(mut fg: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: &LbfgsOptions) -> Minimum
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let (mut f, mut g) = fg(&x);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let pg_norm = |x: &[f64], g: &[f64]| -> f64 {
        (0..n)
            .map(|i| (x[i] - (x[i] - g[i]).clamp(lower[i], upper[i])).abs())
            .fold(0.0, f64::max)
    };
    let mut pgn = pg_norm(&x, &g);
    while iterations < opts.max_iter && pgn > opts.gtol {
        iterations += 1;
        let free: Vec<bool> = (0..n)
            .map(|i| {
                !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0) || lower[i] == upper[i])
            })
            .collect();
        let gf: Vec<f64> = (0..n).map(|i| if free[i] { g[i] } else { 0.0 }).collect();

        // two-loop recursion
        let mut q = gf.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = (0..n).map(|i| if free[i] { -q[i] } else { 0.0 }).collect();
        if dot(&dir, &gf) >= 0.0 {
            history.clear();
            dir = gf.iter().map(|v| -v).collect();
        }

        let mut t = if history.is_empty() {
            1.0 / dir.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let mut xn: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            project(&mut xn, lower, upper);
            let step: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &step);
            if decrease >= 0.0 {
                t *= 0.5;
                continue;
            }
            let (fn_, gn) = fg(&xn);
            if fn_ <= f + 1e-4 * decrease {
                accepted = Some((xn, fn_, gn, step));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fn_, gn, s)) = accepted else {
            break;
        };
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).max(1e-300) {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let rel = (f - fn_) / f.abs().max(fn_.abs()).max(1.0);
        x = xn;
        f = fn_;
        g = gn;
        pgn = pg_norm(&x, &g);
        if rel <= opts.ftol {
            break;
        }
    }
    Minimum {
        x,
        f,
        iterations,
        projected_grad_norm: pgn,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let fg = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            (f, g)
        };
        let inf = f64::INFINITY;
        let opts = LbfgsOptions {
            ftol: 0.0,
            ..Default::default()
        };
        let m = minimize(fg, &[-1.2, 1.0], &[-inf, -inf], &[inf, inf], &opts);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m);
    }

    #[test]
    fn active_bound() {
        // minimum of (x + 1)^2 + (y - 2)^2 over x, y >= 0 is (0, 2)
        let fg = |x: &[f64]| {
            let f = (x[0] + 1.0).powi(2) + (x[1] - 2.0).powi(2);
            (f, vec![2.0 * (x[0] + 1.0), 2.0 * (x[1] - 2.0)])
        };
        let m = minimize(fg, &[3.0, 3.0], &[0.0, 0.0], &[f64::INFINITY; 2], &LbfgsOptions::default());
        assert!(m.x[0].abs() < 1e-9);
        assert!((m.x[1] - 2.0).abs() < 1e-6);
        assert!(m.projected_grad_norm < 1e-6);
    }
}
