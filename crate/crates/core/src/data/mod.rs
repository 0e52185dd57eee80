//! Categorical datasets, CSV ingestion and contingency counting.

mod csv_io;
mod stats;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::VariableScheme;

pub use csv_io::{load_csv, write_csv, CsvOptions, DiscretizationSpec, LoadReport};
pub use stats::{correlation_matrix, kaplan_meier, survival_at, CorrelationMatrix};

/// Row-major table of state indices conforming to a scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDataset {
    scheme: Arc<VariableScheme>,
    cells: Vec<u16>,
    n_rows: usize,
}

impl CategoricalDataset {
    pub fn new(scheme: Arc<VariableScheme>, rows: &[Vec<usize>]) -> Result<Self> {
        let d = scheme.len();
        let mut cells = Vec::with_capacity(rows.len() * d);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Shape(format!(
                    "row {r} has {} cells, expected {d}",
                    row.len()
                )));
            }
            cells.extend(row.iter().map(|&x| x as u16));
        }
        Self::from_cells(scheme, cells)
    }

    /// Builds a dataset from a flat row-major buffer.
    pub fn from_cells(scheme: Arc<VariableScheme>, cells: Vec<u16>) -> Result<Self> {
        let d = scheme.len();
        if cells.len() % d != 0 {
            return Err(Error::Shape(format!(
                "{} cells do not divide into rows of {d}",
                cells.len()
            )));
        }
        let cards = scheme.cardinalities();
        for (i, &x) in cells.iter().enumerate() {
            let v = i % d;
            if x as usize >= cards[v] {
                return Err(Error::SchemaMismatch(format!(
                    "row {} has state {x} for `{}` which has {} states",
                    i / d,
                    scheme.name(v),
                    cards[v]
                )));
            }
        }
        let n_rows = cells.len() / d;
        Ok(CategoricalDataset {
            scheme,
            cells,
            n_rows,
        })
    }

    pub fn scheme(&self) -> &Arc<VariableScheme> {
        &self.scheme
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_vars(&self) -> usize {
        self.scheme.len()
    }

    pub fn row(&self, r: usize) -> &[u16] {
        let d = self.n_vars();
        &self.cells[r * d..(r + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u16]> {
        self.cells.chunks_exact(self.n_vars())
    }

    pub fn value(&self, r: usize, v: usize) -> usize {
        self.cells[r * self.n_vars() + v] as usize
    }

    pub fn column(&self, v: usize) -> Vec<usize> {
        self.rows().map(|row| row[v] as usize).collect()
    }

    /// A new dataset with rows reordered by `order`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut cells = Vec::with_capacity(self.cells.len());
        for &r in order {
            if r >= self.n_rows {
                return Err(Error::InvalidArgument(format!("row {r} out of range")));
            }
            cells.extend_from_slice(self.row(r));
        }
        Self::from_cells(self.scheme.clone(), cells)
    }
}

/// Row-major strides for enumerating parent configurations: the last parent
/// varies fastest.
pub fn config_strides(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * cards[k + 1];
    }
    strides
}

/// Counts of a child's states per parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub child: usize,
    pub parents: Vec<usize>,
    pub child_card: usize,
    pub parent_cards: Vec<usize>,
    /// `counts[i][j]` = rows with parent configuration `i` and child state `j`.
    pub counts: Vec<Vec<u64>>,
    /// Row sums of `counts`.
    pub totals: Vec<u64>,
}

impl CountTable {
    /// Builds a table from explicit counts; `parent_cards` fixes the number
    /// of configurations.
    pub fn from_counts(child_card: usize, parent_cards: Vec<usize>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let n_configs: usize = parent_cards.iter().product();
        if counts.len() != n_configs || counts.iter().any(|r| r.len() != child_card) {
            return Err(Error::Shape(format!(
                "expected {n_configs} rows of {child_card} counts"
            )));
        }
        let totals = counts.iter().map(|r| r.iter().sum()).collect();
        Ok(CountTable {
            child: 0,
            parents: (1..=parent_cards.len()).collect(),
            child_card,
            parent_cards,
            counts,
            totals,
        })
    }

    /// Number of parent configurations.
    pub fn n_configs(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.totals.iter().sum()
    }

    pub fn config_index(&self, parent_states: &[usize]) -> usize {
        config_strides(&self.parent_cards)
            .iter()
            .zip(parent_states)
            .map(|(s, x)| s * x)
            .sum()
    }
}

/// Tallies `n_ij` for `child` given `parents` (in the stated order).
pub fn contingency_counts(
    data: &CategoricalDataset,
    child: usize,
    parents: &[usize],
) -> Result<CountTable> {
    let d = data.n_vars();
    for (k, &p) in parents.iter().enumerate() {
        if p >= d {
            return Err(Error::UnknownVariable(format!("index {p}")));
        }
        if p == child || parents[..k].contains(&p) {
            return Err(Error::DuplicateParent(data.scheme().name(p).to_string()));
        }
    }
    if child >= d {
        return Err(Error::UnknownVariable(format!("index {child}")));
    }
    let scheme = data.scheme();
    let child_card = scheme.cardinality(child);
    let parent_cards: Vec<usize> = parents.iter().map(|&p| scheme.cardinality(p)).collect();
    let strides = config_strides(&parent_cards);
    let n_configs: usize = parent_cards.iter().product();
    let mut counts = vec![vec![0u64; child_card]; n_configs];
    for row in data.rows() {
        let i: usize = parents
            .iter()
            .zip(&strides)
            .map(|(&p, s)| row[p] as usize * s)
            .sum();
        counts[i][row[child] as usize] += 1;
    }
    let totals = counts.iter().map(|r| r.iter().sum()).collect();
    Ok(CountTable {
        child,
        parents: parents.to_vec(),
        child_card,
        parent_cards,
        counts,
        totals,
    })
}
