use nalgebra::DMatrix;

/// Matrix exponential by scaling and squaring with a truncated Taylor
/// series. The argument is scaled until its 1-norm is at most 0.5, where 18
/// terms leave a truncation error far below f64 resolution.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a / 2f64.powi(squarings as i32);
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `h(W) = tr(exp(W o W)) - d` and its gradient `exp(W o W)^T o 2W`.
pub fn acyclicity_h(w: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
    let d = w.nrows();
    let e = expm(&w.component_mul(w));
    let h = e.trace() - d as f64;
    let grad = e.transpose().component_mul(w) * 2.0;
    (h, grad)
}

/// Loss `1/(2N) |X - XW|_F^2 + l1 |W|_1` and the gradient of the smooth
/// part, `-1/N X^T (X - XW)`.
pub fn objective_and_grad(w: &DMatrix<f64>, x: &DMatrix<f64>, l1: f64) -> (f64, DMatrix<f64>) {
    let n = x.nrows() as f64;
    let r = x - x * w;
    let loss = 0.5 / n * r.norm_squared() + l1 * w.iter().map(|v| v.abs()).sum::<f64>();
    let grad = -(x.transpose() * r) / n;
    (loss, grad)
}
