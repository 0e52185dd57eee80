use super::CategoricalDataset;
use crate::error::{Error, Result};

/// Pearson correlations over state indices. `None` marks a pair involving a
/// constant column, where the coefficient is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub variables: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    /// Variables whose column is constant.
    pub fn constant_columns(&self) -> Vec<&str> {
        (0..self.values.len())
            .filter(|&i| self.values[i][i].is_none())
            .map(|i| self.variables[i].as_str())
            .collect()
    }
}

pub fn correlation_matrix(data: &CategoricalDataset) -> Result<CorrelationMatrix> {
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least 2 rows, got {n}"
        )));
    }
    let d = data.n_vars();
    let mut means = vec![0.0; d];
    for row in data.rows() {
        for (m, &x) in means.iter_mut().zip(row) {
            *m += x as f64;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = vec![vec![0.0; d]; d];
    for row in data.rows() {
        for i in 0..d {
            let di = row[i] as f64 - means[i];
            for j in i..d {
                cov[i][j] += di * (row[j] as f64 - means[j]);
            }
        }
    }
    let mut values = vec![vec![None; d]; d];
    for i in 0..d {
        for j in i..d {
            let denom = (cov[i][i] * cov[j][j]).sqrt();
            let r = if denom > 0.0 {
                Some(if i == j { 1.0 } else { (cov[i][j] / denom).clamp(-1.0, 1.0) })
            } else {
                None
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        variables: data.scheme().names().map(str::to_string).collect(),
        values,
    })
}

/// Product-limit survival estimate.
///
/// Returns `(time, S(time))` steps starting at `(0, 1)`, with one entry per
/// distinct event time. Subjects with `event == false` are censored: they
/// leave the risk set after their time without a drop in survival. Censoring
/// tied with an event time counts the censored subject as still at risk.
pub fn kaplan_meier(times: &[f64], events: &[bool]) -> Result<Vec<(f64, f64)>> {
    if times.is_empty() {
        return Err(Error::EmptyInput);
    }
    if times.len() != events.len() {
        return Err(Error::InvalidArgument(format!(
            "{} times but {} event flags",
            times.len(),
            events.len()
        )));
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::InvalidArgument(format!("invalid survival time {t}")));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let mut curve = vec![(0.0, 1.0)];
    let mut at_risk = times.len();
    let mut surv = 1.0;
    let mut k = 0;
    while k < order.len() {
        let t = times[order[k]];
        let mut deaths = 0usize;
        let mut leaving = 0usize;
        while k < order.len() && times[order[k]] == t {
            if events[order[k]] {
                deaths += 1;
            }
            leaving += 1;
            k += 1;
        }
        if deaths > 0 {
            surv *= 1.0 - deaths as f64 / at_risk as f64;
            if t == 0.0 {
                curve[0].1 = surv;
            } else {
                curve.push((t, surv));
            }
        }
        at_risk -= leaving;
    }
    Ok(curve)
}

/// Evaluates a step curve from [`kaplan_meier`] at time `t` (right-continuous).
pub fn survival_at(curve: &[(f64, f64)], t: f64) -> f64 {
    curve
        .iter()
        .take_while(|(time, _)| *time <= t)
        .last()
        .map_or(1.0, |&(_, s)| s)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::VariableScheme;

    #[test]
    fn km_all_events() {
        let c = kaplan_meier(&[5.0, 10.0, 15.0], &[true, true, true]).unwrap();
        assert_eq!(c.len(), 4);
        assert!((c[1].1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((c[2].1 - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(c[3], (15.0, 0.0));
    }

    #[test]
    fn km_all_censored() {
        let c = kaplan_meier(&[1.0, 2.0], &[false, false]).unwrap();
        assert_eq!(c, vec![(0.0, 1.0)]);
        assert_eq!(survival_at(&c, 100.0), 1.0);
    }

    #[test]
    fn km_with_censoring() {
        let c = kaplan_meier(&[1.0, 2.0], &[true, false]).unwrap();
        assert_eq!(survival_at(&c, 1.0), 0.5);
        assert_eq!(survival_at(&c, 5.0), 0.5);
        assert_eq!(survival_at(&c, 0.5), 1.0);
    }

    #[test]
    fn km_errors() {
        assert!(matches!(kaplan_meier(&[], &[]), Err(Error::EmptyInput)));
        assert!(kaplan_meier(&[1.0], &[]).is_err());
        assert!(kaplan_meier(&[-1.0], &[true]).is_err());
    }

    #[test]
    fn correlation_identity_and_flip() {
        let s = Arc::new(VariableScheme::binary(&["A", "B", "C"]).unwrap());
        let rows: Vec<Vec<usize>> = [0, 1, 1, 0, 1]
            .iter()
            .map(|&a| vec![a, 1 - a, 1])
            .collect();
        let data = CategoricalDataset::new(s, &rows).unwrap();
        let m = correlation_matrix(&data).unwrap();
        assert_eq!(m.get(0, 0), Some(1.0));
        assert!((m.get(0, 1).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(m.get(0, 2), None);
        assert_eq!(m.constant_columns(), vec!["C"]);
    }

    #[test]
    fn correlation_needs_two_rows() {
        let s = Arc::new(VariableScheme::binary(&["A"]).unwrap());
        let data = CategoricalDataset::new(s, &[vec![0]]).unwrap();
        assert!(correlation_matrix(&data).is_err());
    }
}
