//! BDeu graph scores.
//!
//! Two family scores are provided. [`bdeu_family_canonical`] is the usual
//! log marginal likelihood under a BDeu prior. [`bdeu_family_paper`] is the
//! closed-form smoothed log-likelihood
//! `sum_ij (n_ij + a/q) ln((n_ij + a/q) / (n_i + a))`
//! with `q` child states. Both use natural logarithms. Graph totals drop the
//! structure prior and the data evidence term, which are constant across
//! graphs.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::data::{contingency_counts, CategoricalDataset, CountTable};
use crate::error::{Error, Result};
use crate::graph::{same_scheme, Dag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreVariant {
    Paper,
    Canonical,
}

impl std::str::FromStr for ScoreVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(ScoreVariant::Paper),
            "canonical" => Ok(ScoreVariant::Canonical),
            other => Err(Error::InvalidArgument(format!("unknown score variant `{other}`"))),
        }
    }
}

impl std::fmt::Display for ScoreVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScoreVariant::Paper => "paper",
            ScoreVariant::Canonical => "canonical",
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("equivalent sample size must be positive, got {alpha}")))
    }
}

pub fn bdeu_family_paper(counts: &CountTable, alpha: f64) -> f64 {
    let q = counts.child_card as f64;
    let pseudo = alpha / q;
    let mut score = 0.0;
    for (row, &n_i) in counts.counts.iter().zip(&counts.totals) {
        let denom = n_i as f64 + alpha;
        for &n_ij in row {
            let num = n_ij as f64 + pseudo;
            score += num * (num / denom).ln();
        }
    }
    score
}

pub fn bdeu_family_canonical(counts: &CountTable, alpha: f64) -> f64 {
    let r = counts.n_configs() as f64;
    let q = counts.child_card as f64;
    let a_i = alpha / r;
    let a_ij = alpha / (r * q);
    let lg_ai = ln_gamma(a_i);
    let lg_aij = ln_gamma(a_ij);
    let mut score = 0.0;
    for (row, &n_i) in counts.counts.iter().zip(&counts.totals) {
        if n_i == 0 {
            continue;
        }
        score += lg_ai - ln_gamma(a_i + n_i as f64);
        for &n_ij in row {
            if n_ij > 0 {
                score += ln_gamma(a_ij + n_ij as f64) - lg_aij;
            }
        }
    }
    score
}

pub fn family_score(counts: &CountTable, alpha: f64, variant: ScoreVariant) -> f64 {
    match variant {
        ScoreVariant::Paper => bdeu_family_paper(counts, alpha),
        ScoreVariant::Canonical => bdeu_family_canonical(counts, alpha),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyScore {
    pub variable: String,
    pub parents: Vec<String>,
    pub score: f64,
}

/// Per-node decomposition of a graph score. `total` is the left-to-right sum
/// of `families`, which are in scheme order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub variant: ScoreVariant,
    pub ess: f64,
    pub families: Vec<FamilyScore>,
    pub total: f64,
}

impl ScoreReport {
    pub fn family(&self, name: &str) -> Option<f64> {
        self.families.iter().find(|f| f.variable == name).map(|f| f.score)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct FamilyKey {
    child: usize,
    parents: Vec<usize>,
    alpha_bits: u64,
    variant: ScoreVariant,
}

/// Scores graphs against one dataset, caching count tables and family
/// scores. Safe to share between threads.
pub struct BdeuScorer<'a> {
    data: &'a CategoricalDataset,
    counts: Mutex<HashMap<(usize, Vec<usize>), Arc<CountTable>>>,
    scores: Mutex<HashMap<FamilyKey, f64>>,
}

impl<'a> BdeuScorer<'a> {
    pub fn new(data: &'a CategoricalDataset) -> Self {
        BdeuScorer {
            data,
            counts: Mutex::new(HashMap::new()),
            scores: Mutex::new(HashMap::new()),
        }
    }

    pub fn data(&self) -> &CategoricalDataset {
        self.data
    }

    /// Count table with parents in ascending index order.
    pub fn counts(&self, child: usize, parents: &[usize]) -> Result<Arc<CountTable>> {
        let mut sorted = parents.to_vec();
        sorted.sort_unstable();
        let key = (child, sorted);
        if let Some(t) = self.counts.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(contingency_counts(self.data, child, &key.1)?);
        self.counts.lock().unwrap().insert(key, table.clone());
        Ok(table)
    }

    pub fn family(&self, child: usize, parents: &[usize], alpha: f64, variant: ScoreVariant) -> Result<f64> {
        check_alpha(alpha)?;
        let mut sorted = parents.to_vec();
        sorted.sort_unstable();
        let key = FamilyKey {
            child,
            parents: sorted,
            alpha_bits: alpha.to_bits(),
            variant,
        };
        if let Some(&s) = self.scores.lock().unwrap().get(&key) {
            return Ok(s);
        }
        let counts = self.counts(child, &key.parents)?;
        let s = family_score(&counts, alpha, variant);
        self.scores.lock().unwrap().insert(key, s);
        Ok(s)
    }

    pub fn total(&self, dag: &Dag, alpha: f64, variant: ScoreVariant) -> Result<ScoreReport> {
        if !same_scheme(dag.scheme(), self.data.scheme()) {
            return Err(Error::SchemeMismatch);
        }
        check_alpha(alpha)?;
        let scheme = dag.scheme();
        let mut families = Vec::with_capacity(dag.len());
        let mut total = 0.0;
        for v in 0..dag.len() {
            let parents: Vec<usize> = dag.parents(v).iter().copied().collect();
            let score = self.family(v, &parents, alpha, variant)?;
            total += score;
            families.push(FamilyScore {
                variable: scheme.name(v).to_string(),
                parents: parents.iter().map(|&p| scheme.name(p).to_string()).collect(),
                score,
            });
        }
        Ok(ScoreReport {
            variant,
            ess: alpha,
            families,
            total,
        })
    }
}

pub fn bdeu_total(dag: &Dag, data: &CategoricalDataset, alpha: f64, variant: ScoreVariant) -> Result<ScoreReport> {
    BdeuScorer::new(data).total(dag, alpha, variant)
}

/// Graph totals laid out with one row per ESS value and one column per graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub variant: ScoreVariant,
    pub graphs: Vec<String>,
    pub ess: Vec<f64>,
    /// `totals[e][g]` is graph `g` scored at `ess[e]`.
    pub totals: Vec<Vec<f64>>,
}

impl ScoreTable {
    pub fn build(
        graphs: &[(String, Dag)],
        data: &CategoricalDataset,
        ess: &[f64],
        variant: ScoreVariant,
    ) -> Result<Self> {
        if ess.is_empty() {
            return Err(Error::InvalidArgument("ess list is empty".into()));
        }
        let scorer = BdeuScorer::new(data);
        let totals = ess
            .iter()
            .map(|&a| {
                graphs
                    .iter()
                    .map(|(_, g)| scorer.total(g, a, variant).map(|r| r.total))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreTable {
            variant,
            graphs: graphs.iter().map(|(n, _)| n.clone()).collect(),
            ess: ess.to_vec(),
            totals,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ess");
        for g in &self.graphs {
            out.push(',');
            out.push_str(&csv_field(g));
        }
        out.push('\n');
        for (a, row) in self.ess.iter().zip(&self.totals) {
            let _ = write!(out, "{a}");
            for t in row {
                let _ = write!(out, ",{t:.6}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let head = "Equivalent sample size".to_string();
        let cells: Vec<Vec<String>> = self
            .totals
            .iter()
            .map(|row| row.iter().map(|t| format!("{t:.2}")).collect())
            .collect();
        let mut widths = vec![head.len()];
        for (g, name) in self.graphs.iter().enumerate() {
            let w = cells.iter().map(|r| r[g].len()).max().unwrap_or(0).max(name.len());
            widths.push(w);
        }
        let mut out = String::new();
        let _ = write!(out, "{:<w$}", head, w = widths[0]);
        for (name, w) in self.graphs.iter().zip(&widths[1..]) {
            let _ = write!(out, "  {name:>w$}");
        }
        out.push('\n');
        for (a, row) in self.ess.iter().zip(&cells) {
            let _ = write!(out, "{:<w$}", a.to_string(), w = widths[0]);
            for (c, w) in row.iter().zip(&widths[1..]) {
                let _ = write!(out, "  {c:>w$}");
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
