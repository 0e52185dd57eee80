use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::{config_strides, CategoricalDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
}

/// A conditional-independence test `x _||_ y | cond`. Large p-values mean
/// independence is accepted.
pub trait CiTest {
    fn test(&self, x: usize, y: usize, cond: &[usize]) -> Result<CiResult>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiStatistic {
    /// Likelihood-ratio statistic `2 sum O ln(O / E)`.
    G2,
    /// Pearson `sum (O - E)^2 / E`.
    Chi2,
}

impl std::str::FromStr for CiStatistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g2" => Ok(CiStatistic::G2),
            "chi2" => Ok(CiStatistic::Chi2),
            other => Err(Error::InvalidArgument(format!("unknown CI test `{other}`"))),
        }
    }
}

/// Contingency-table test on a categorical dataset. Keeps a column-major
/// copy of the data so stratum keys are cheap to build.
pub struct DataCiTest<'a> {
    data: &'a CategoricalDataset,
    columns: Vec<Vec<u16>>,
    statistic: CiStatistic,
}

impl<'a> DataCiTest<'a> {
    pub fn new(data: &'a CategoricalDataset, statistic: CiStatistic) -> Self {
        let d = data.n_vars();
        let mut columns = vec![Vec::with_capacity(data.n_rows()); d];
        for row in data.rows() {
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        DataCiTest {
            data,
            columns,
            statistic,
        }
    }
}

impl CiTest for DataCiTest<'_> {
    fn test(&self, x: usize, y: usize, cond: &[usize]) -> Result<CiResult> {
        contingency_test(self, x, y, cond)
    }
}

pub fn ci_test_g2(data: &CategoricalDataset, x: usize, y: usize, cond: &[usize]) -> Result<CiResult> {
    DataCiTest::new(data, CiStatistic::G2).test(x, y, cond)
}

pub fn ci_test_chi2(data: &CategoricalDataset, x: usize, y: usize, cond: &[usize]) -> Result<CiResult> {
    DataCiTest::new(data, CiStatistic::Chi2).test(x, y, cond)
}

/// Stratified test of `x` against `y` within each configuration of `cond`.
///
/// Degrees of freedom are summed per non-empty stratum as
/// `(levels of x seen - 1) * (levels of y seen - 1)`, so empty strata and
/// unobserved levels do not count. When that total is zero the data cannot
/// show independence and the result is reported as dependent (p = 0).
fn contingency_test(t: &DataCiTest<'_>, x: usize, y: usize, cond: &[usize]) -> Result<CiResult> {
    let d = t.data.n_vars();
    if x == y {
        return Err(Error::InvalidArgument("x and y must differ".into()));
    }
    if x >= d || y >= d || cond.iter().any(|&c| c >= d) {
        return Err(Error::UnknownVariable("CI test variable out of range".into()));
    }
    if cond.contains(&x) || cond.contains(&y) {
        return Err(Error::InvalidArgument("x and y cannot be in the conditioning set".into()));
    }
    let n_rows = t.data.n_rows();
    if n_rows == 0 {
        return Err(Error::InsufficientData("no rows in any conditioning stratum".into()));
    }
    let scheme = t.data.scheme();
    let (rx, ry) = (scheme.cardinality(x), scheme.cardinality(y));
    let cond_cards: Vec<usize> = cond.iter().map(|&c| scheme.cardinality(c)).collect();
    let strides = config_strides(&cond_cards);
    let cell = rx * ry;

    let mut keys = vec![0u64; n_rows];
    for (&c, &st) in cond.iter().zip(&strides) {
        for (k, &v) in keys.iter_mut().zip(&t.columns[c]) {
            *k += v as u64 * st as u64;
        }
    }
    let cells: Vec<usize> = t.columns[x]
        .iter()
        .zip(&t.columns[y])
        .map(|(&a, &b)| a as usize * ry + b as usize)
        .collect();

    let n_strata: usize = cond_cards.iter().product();
    let mut strata: Vec<Vec<u64>> = Vec::new();
    if n_strata <= n_rows {
        let mut dense = vec![0u64; n_strata * cell];
        for (&k, &c) in keys.iter().zip(&cells) {
            dense[k as usize * cell + c] += 1;
        }
        strata.extend(dense.chunks(cell).filter(|t| t.iter().any(|&c| c > 0)).map(<[u64]>::to_vec));
    } else {
        let mut pairs: Vec<(u64, usize)> = keys.into_iter().zip(cells).collect();
        pairs.sort_unstable();
        for group in pairs.chunk_by(|a, b| a.0 == b.0) {
            let mut table = vec![0u64; cell];
            for &(_, c) in group {
                table[c] += 1;
            }
            strata.push(table);
        }
    }

    let mut stat = 0.0;
    let mut dof = 0usize;
    for table in &strata {
        let row_sum: Vec<u64> = (0..rx).map(|a| table[a * ry..(a + 1) * ry].iter().sum()).collect();
        let col_sum: Vec<u64> = (0..ry).map(|b| (0..rx).map(|a| table[a * ry + b]).sum()).collect();
        let n: u64 = row_sum.iter().sum();
        let levels_x = row_sum.iter().filter(|&&c| c > 0).count();
        let levels_y = col_sum.iter().filter(|&&c| c > 0).count();
        dof += (levels_x.saturating_sub(1)) * (levels_y.saturating_sub(1));
        for a in 0..rx {
            for b in 0..ry {
                let expected = row_sum[a] as f64 * col_sum[b] as f64 / n as f64;
                if expected == 0.0 {
                    continue;
                }
                let observed = table[a * ry + b] as f64;
                stat += match t.statistic {
                    CiStatistic::G2 if observed > 0.0 => 2.0 * observed * (observed / expected).ln(),
                    CiStatistic::G2 => 0.0,
                    CiStatistic::Chi2 => (observed - expected).powi(2) / expected,
                };
            }
        }
    }
    let stat = stat.max(0.0);
    let p_value = if dof == 0 {
        0.0
    } else {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sf(stat)
    };
    Ok(CiResult {
        statistic: stat,
        p_value,
        dof,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::VariableScheme;

    fn dataset(rows: &[Vec<usize>]) -> CategoricalDataset {
        let names: Vec<String> = (0..rows[0].len()).map(|i| format!("V{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        CategoricalDataset::new(Arc::new(VariableScheme::binary(&refs).unwrap()), rows).unwrap()
    }

    fn table(counts: [[usize; 2]; 2]) -> CategoricalDataset {
        let mut rows = Vec::new();
        for (a, row) in counts.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                rows.extend(std::iter::repeat(vec![a, b]).take(c));
            }
        }
        dataset(&rows)
    }

    #[test]
    fn exact_independence() {
        let data = table([[25, 25], [25, 25]]);
        let r = ci_test_g2(&data, 0, 1, &[]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.dof, 1);
    }

    #[test]
    fn perfect_dependence() {
        let data = table([[50, 0], [0, 50]]);
        let r = ci_test_g2(&data, 0, 1, &[]).unwrap();
        // G2 = 2 N ln 2
        assert!((r.statistic - 200.0 * 2f64.ln()).abs() < 1e-9);
        assert!(r.p_value < 1e-6);
        let c = ci_test_chi2(&data, 0, 1, &[]).unwrap();
        assert!((c.statistic - 100.0).abs() < 1e-9);
    }

    #[test]
    fn g2_matches_hand_value() {
        // [[30,10],[10,30]]: E = 20 everywhere
        let data = table([[30, 10], [10, 30]]);
        let r = ci_test_g2(&data, 0, 1, &[]).unwrap();
        let expected = 2.0 * (2.0 * 30.0 * (1.5f64).ln() + 2.0 * 10.0 * (0.5f64).ln());
        assert!((r.statistic - expected).abs() < 1e-9);
    }

    #[test]
    fn empty_strata_reduce_dof() {
        // conditioning variable V2 only ever takes state 0
        let rows: Vec<Vec<usize>> = (0..40).map(|i| vec![i % 2, (i / 2) % 2, 0]).collect();
        let data = dataset(&rows);
        let r = ci_test_g2(&data, 0, 1, &[2]).unwrap();
        assert_eq!(r.dof, 1);
    }

    #[test]
    fn determined_strata_report_dependence() {
        let rows: Vec<Vec<usize>> = (0..40).map(|i| vec![i % 2, i % 2, i % 2]).collect();
        let data = dataset(&rows);
        let r = ci_test_g2(&data, 0, 1, &[2]).unwrap();
        assert_eq!(r.dof, 0);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn argument_checks() {
        let data = table([[1, 1], [1, 1]]);
        assert!(ci_test_g2(&data, 0, 0, &[]).is_err());
        assert!("g2".parse::<CiStatistic>().is_ok());
        assert!("fisher".parse::<CiStatistic>().is_err());
    }
}
