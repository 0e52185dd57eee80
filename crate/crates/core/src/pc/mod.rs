//! PC structure discovery: stable skeleton search with a pluggable CI test,
//! collider orientation, and Meek's rules.

mod citest;
mod dsep;
mod meek;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use citest::{ci_test_chi2, ci_test_g2, CiResult, CiStatistic, CiTest, DataCiTest};
pub use dsep::{d_separated, DSeparationOracle};
pub use meek::meek_closure;

use crate::data::CategoricalDataset;
use crate::error::{Error, Result};
use crate::graph::{Dag, Pdag, VariableScheme};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcConfig {
    pub alpha: f64,
    /// Largest conditioning set tried. `None` means `|V| - 2`.
    pub max_cond_size: Option<usize>,
    pub ci_test: CiStatistic,
}

impl Default for PcConfig {
    fn default() -> Self {
        PcConfig {
            alpha: 0.05,
            max_cond_size: None,
            ci_test: CiStatistic::G2,
        }
    }
}

impl PcConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        PcConfig {
            alpha,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "significance level must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Separating sets of the pairs whose edge was removed, keyed by the
/// unordered pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetMap {
    sets: BTreeMap<(usize, usize), Vec<usize>>,
}

impl SepsetMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: usize, y: usize, set: Vec<usize>) {
        self.sets.insert(key(x, y), set);
    }

    pub fn get(&self, x: usize, y: usize) -> Option<&[usize]> {
        self.sets.get(&key(x, y)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<usize>)> {
        self.sets.iter()
    }
}

fn key(x: usize, y: usize) -> (usize, usize) {
    (x.min(y), x.max(y))
}

/// Size-`k` subsets of `items` in lexicographic order.
fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}

pub fn learn_skeleton(data: &CategoricalDataset, config: &PcConfig) -> Result<(Pdag, SepsetMap)> {
    let test = DataCiTest::new(data, config.ci_test);
    learn_skeleton_with(&test, data.scheme().clone(), config)
}

/// Stable PC skeleton search. Neighborhoods are frozen at the start of each
/// level and removals are applied together when the level ends, so the
/// result does not depend on variable order.
pub fn learn_skeleton_with(
    test: &dyn CiTest,
    scheme: Arc<VariableScheme>,
    config: &PcConfig,
) -> Result<(Pdag, SepsetMap)> {
    config.validate()?;
    let n = scheme.len();
    let max_cond = config.max_cond_size.unwrap_or(n.saturating_sub(2));
    let mut g = Pdag::complete(scheme);
    let mut sepsets = SepsetMap::new();
    let mut level = 0;
    loop {
        if level > max_cond {
            break;
        }
        let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v)).collect();
        let mut any_testable = false;
        let mut removals: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        let edges: Vec<(usize, usize)> = g.undirected_edges().iter().copied().collect();
        for (x, y) in edges {
            for (a, b) in [(x, y), (y, x)] {
                let candidates: Vec<usize> = adj[a].iter().copied().filter(|&c| c != b).collect();
                if candidates.len() < level {
                    continue;
                }
                any_testable = true;
                let mut found = None;
                for s in subsets(&candidates, level) {
                    let r = test.test(a, b, &s)?;
                    if r.p_value > config.alpha {
                        found = Some(s);
                        break;
                    }
                }
                if let Some(s) = found {
                    removals.entry((x, y)).or_insert(s);
                    break;
                }
            }
        }
        for ((x, y), s) in removals {
            log::debug!("pc: removed {x} - {y} given {s:?}");
            g.remove_edge(x, y);
            sepsets.insert(x, y, s);
        }
        if !any_testable {
            break;
        }
        level += 1;
    }
    Ok((g, sepsets))
}

/// Orients `x -> z <- y` for every nonadjacent pair `x, y` with a common
/// neighbor `z` outside their separating set. An edge claimed in both
/// directions stays undirected.
pub fn orient_v_structures(skeleton: &Pdag, sepsets: &SepsetMap) -> Pdag {
    let n = skeleton.len();
    let mut claims: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    for x in 0..n {
        for y in x + 1..n {
            if skeleton.adjacent(x, y) {
                continue;
            }
            let Some(sep) = sepsets.get(x, y) else { continue };
            for z in skeleton.undirected_neighbors(x) {
                if skeleton.is_undirected(y, z) && !sep.contains(&z) {
                    claims.insert((x, z), ());
                    claims.insert((y, z), ());
                }
            }
        }
    }
    let mut g = skeleton.clone();
    for &(u, v) in claims.keys() {
        if claims.contains_key(&(v, u)) {
            log::warn!(
                "pc: conflicting collider orientations on {} - {}, left undirected",
                skeleton.scheme().name(u),
                skeleton.scheme().name(v)
            );
            continue;
        }
        g.orient(u, v);
    }
    g
}

pub fn pc_run(data: &CategoricalDataset, config: &PcConfig) -> Result<Pdag> {
    let test = DataCiTest::new(data, config.ci_test);
    pc_run_with(&test, data.scheme().clone(), config)
}

pub fn pc_run_with(test: &dyn CiTest, scheme: Arc<VariableScheme>, config: &PcConfig) -> Result<Pdag> {
    let (skeleton, sepsets) = learn_skeleton_with(test, scheme, config)?;
    Ok(meek_closure(&orient_v_structures(&skeleton, &sepsets)))
}

/// The completed PDAG of `dag`'s Markov equivalence class.
pub fn cpdag(dag: &Dag) -> Pdag {
    let n = dag.len();
    let mut g = Pdag::empty(dag.scheme().clone());
    for (u, v) in dag.edges() {
        g.add_undirected(u, v).expect("DAG edges are simple");
    }
    for z in 0..n {
        let ps: Vec<usize> = dag.parents(z).iter().copied().collect();
        for (i, &x) in ps.iter().enumerate() {
            for &y in &ps[i + 1..] {
                if !dag.has_edge(x, y) && !dag.has_edge(y, x) {
                    g.orient(x, z);
                    g.orient(y, z);
                }
            }
        }
    }
    meek_closure(&g)
}
