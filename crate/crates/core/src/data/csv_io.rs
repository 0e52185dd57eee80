use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CategoricalDataset;
use crate::error::{Error, Result};
use crate::graph::VariableScheme;

/// How raw CSV values map onto scheme states.
///
/// `bins` gives ascending cut points for numeric columns: a value `x` falls in
/// bin `k` where `k` is the number of cut points `<= x`, so a variable with
/// `c` states needs `c - 1` cut points. `labels` renames raw text values to
/// state labels (e.g. `"M"` to `"Male"`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    #[serde(default)]
    pub bins: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub labels: BTreeMap<String, BTreeMap<String, String>>,
}

impl DiscretizationSpec {
    pub fn validate(&self, scheme: &VariableScheme) -> Result<()> {
        for (name, cuts) in &self.bins {
            let v = scheme.index_of(name)?;
            let card = scheme.cardinality(v);
            if cuts.len() + 1 != card {
                return Err(Error::SchemaMismatch(format!(
                    "`{name}` has {card} states but {} cut points",
                    cuts.len()
                )));
            }
            if cuts.windows(2).any(|w| !(w[0] < w[1])) || cuts.iter().any(|c| !c.is_finite()) {
                return Err(Error::SchemaMismatch(format!(
                    "cut points for `{name}` must be finite and strictly increasing"
                )));
            }
        }
        for (name, map) in &self.labels {
            let v = scheme.index_of(name)?;
            for target in map.values() {
                scheme.state_index(v, target)?;
            }
        }
        Ok(())
    }

    fn bin(cuts: &[f64], x: f64) -> usize {
        cuts.iter().take_while(|&&c| c <= x).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { delimiter: b',' }
    }
}

#[derive(Debug, Clone)]
pub struct LoadReport {
    pub dataset: CategoricalDataset,
    /// Rows dropped because a required cell was missing.
    pub dropped: usize,
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || ["na", "n/a", "nan", "null"].contains(&t.to_ascii_lowercase().as_str())
}

/// Reads a CSV whose header names scheme variables, encoding each cell as a
/// state index. Rows with a missing cell are dropped and counted.
pub fn load_csv<R: Read>(
    source: R,
    scheme: Arc<VariableScheme>,
    discretization: &DiscretizationSpec,
    options: CsvOptions,
) -> Result<LoadReport> {
    discretization.validate(&scheme)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let mut column_of = vec![usize::MAX; scheme.len()];
    for (col, name) in headers.iter().enumerate() {
        let v = scheme
            .index_of(name)
            .map_err(|_| Error::SchemaMismatch(format!("unknown column `{name}`")))?;
        if column_of[v] != usize::MAX {
            return Err(Error::SchemaMismatch(format!("column `{name}` appears twice")));
        }
        column_of[v] = col;
    }
    if let Some(v) = column_of.iter().position(|&c| c == usize::MAX) {
        return Err(Error::SchemaMismatch(format!(
            "missing column `{}`",
            scheme.name(v)
        )));
    }

    let mut cells = Vec::new();
    let mut dropped = 0;
    let mut row_buf = Vec::with_capacity(scheme.len());
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        row_buf.clear();
        let mut missing = false;
        for (v, &col) in column_of.iter().enumerate() {
            let raw = record.get(col).unwrap_or("");
            if is_missing(raw) {
                missing = true;
                break;
            }
            let state = encode_cell(&scheme, discretization, v, raw.trim()).map_err(|e| {
                Error::SchemaMismatch(format!("data row {}: {e}", line + 1))
            })?;
            row_buf.push(state as u16);
        }
        if missing {
            dropped += 1;
        } else {
            cells.extend_from_slice(&row_buf);
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyDataset(format!(
            " ({dropped} rows dropped for missing values)"
        )));
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows with missing values");
    }
    let dataset = CategoricalDataset::from_cells(scheme, cells)?;
    Ok(LoadReport { dataset, dropped })
}

fn encode_cell(
    scheme: &VariableScheme,
    spec: &DiscretizationSpec,
    v: usize,
    raw: &str,
) -> std::result::Result<usize, String> {
    let var = scheme.variable(v);
    let mapped = spec
        .labels
        .get(&var.name)
        .and_then(|m| m.get(raw))
        .map(String::as_str)
        .unwrap_or(raw);
    if let Some(i) = var.states.iter().position(|s| s == mapped) {
        return Ok(i);
    }
    if let Some(i) = var.states.iter().position(|s| s.eq_ignore_ascii_case(mapped)) {
        return Ok(i);
    }
    if let Some(cuts) = spec.bins.get(&var.name) {
        if let Ok(x) = mapped.parse::<f64>() {
            if x.is_finite() {
                return Ok(DiscretizationSpec::bin(cuts, x));
            }
        }
    }
    Err(format!("value `{raw}` is not a state of `{}`", var.name))
}

/// Writes the dataset with state labels, one column per scheme variable.
pub fn write_csv<W: Write>(data: &CategoricalDataset, sink: W, options: CsvOptions) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(options.delimiter)
        .from_writer(sink);
    let scheme = data.scheme();
    w.write_record(scheme.names())?;
    for row in data.rows() {
        w.write_record(
            row.iter()
                .enumerate()
                .map(|(v, &x)| scheme.variable(v).states[x as usize].as_str()),
        )?;
    }
    w.flush()?;
    Ok(())
}
