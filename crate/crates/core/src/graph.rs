//! Directed and partially directed graphs over a fixed variable scheme.
//!
//! A [`VariableScheme`] fixes the universe of categorical variables and their
//! ordering; every graph holds an `Arc` to its scheme and refers to variables
//! by their index in that order. [`Dag`] values are immutable: mutation
//! returns a new graph and every insertion is checked for cycles.

use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named categorical variable with ordered state labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: S, states: &[&str]) -> Self {
        Variable {
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }
}

/// Ordered set of variables. Graph and dataset indices refer to this order.
#[derive(Debug, Clone)]
pub struct VariableScheme {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
}

impl PartialEq for VariableScheme {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
    }
}

impl Eq for VariableScheme {}

#[derive(Serialize, Deserialize)]
struct SchemeFile {
    variables: Vec<Variable>,
}

impl VariableScheme {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidScheme("scheme has no variables".into()));
        }
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if v.name.trim().is_empty() {
                return Err(Error::InvalidScheme(format!("variable {i} has an empty name")));
            }
            if v.states.len() < 2 {
                return Err(Error::InvalidScheme(format!(
                    "variable `{}` needs at least 2 states",
                    v.name
                )));
            }
            let mut seen = BTreeSet::new();
            for s in &v.states {
                if !seen.insert(s.as_str()) {
                    return Err(Error::InvalidScheme(format!(
                        "variable `{}` repeats state `{s}`",
                        v.name
                    )));
                }
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::InvalidScheme(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(VariableScheme { variables, index })
    }

    /// Binary variables with states `0`/`1`, handy for synthetic fixtures.
    pub fn binary(names: &[&str]) -> Result<Self> {
        Self::new(names.iter().map(|n| Variable::new(*n, &["0", "1"])).collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SchemeFile = serde_json::from_str(text)?;
        Self::new(file.variables)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SchemeFile {
            variables: self.variables.clone(),
        })
        .expect("scheme serialization cannot fail")
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, idx: usize) -> &Variable {
        &self.variables[idx]
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.variables[idx].name
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    pub fn cardinality(&self, idx: usize) -> usize {
        self.variables[idx].states.len()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::cardinality).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn state_index(&self, var: usize, label: &str) -> Result<usize> {
        let v = &self.variables[var];
        v.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownState {
                variable: v.name.clone(),
                state: label.to_string(),
            })
    }
}

/// Two schemes are interchangeable when they are the same allocation or
/// structurally equal.
pub fn same_scheme(a: &Arc<VariableScheme>, b: &Arc<VariableScheme>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeAction {
    Add,
    Remove,
}

/// Directed acyclic graph over a scheme.
#[derive(Debug, Clone)]
pub struct Dag {
    scheme: Arc<VariableScheme>,
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
}

impl PartialEq for Dag {
    fn eq(&self, other: &Self) -> bool {
        same_scheme(&self.scheme, &other.scheme) && self.parents == other.parents
    }
}

impl Eq for Dag {}

impl Dag {
    pub fn empty(scheme: Arc<VariableScheme>) -> Self {
        let n = scheme.len();
        Dag {
            scheme,
            parents: vec![BTreeSet::new(); n],
            children: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges<I>(scheme: Arc<VariableScheme>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut dag = Dag::empty(scheme);
        for (p, c) in edges {
            dag.insert(p, c)?;
        }
        Ok(dag)
    }

    pub fn from_named_edges(scheme: Arc<VariableScheme>, edges: &[(&str, &str)]) -> Result<Self> {
        let idx = edges
            .iter()
            .map(|(p, c)| Ok((scheme.index_of(p)?, scheme.index_of(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_edges(scheme, idx)
    }

    /// Builds a graph from a square 0/1 adjacency matrix where entry `[i][j]`
    /// marks the edge `i -> j`.
    pub fn from_adjacency(scheme: Arc<VariableScheme>, adjacency: &[Vec<u8>]) -> Result<Self> {
        check_square(adjacency)?;
        if adjacency.len() != scheme.len() {
            return Err(Error::Shape(format!(
                "adjacency is {0}x{0} but the scheme has {1} variables",
                adjacency.len(),
                scheme.len()
            )));
        }
        let edges: Vec<_> = adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(move |(j, _)| (i, j))
            })
            .collect();
        Self::from_edges(scheme, edges)
    }

    pub fn scheme(&self) -> &Arc<VariableScheme> {
        &self.scheme
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, v: usize) -> &BTreeSet<usize> {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &BTreeSet<usize> {
        &self.children[v]
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child].contains(&parent)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(BTreeSet::len).sum()
    }

    /// Edges sorted by (parent, child).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .children
            .iter()
            .enumerate()
            .flat_map(|(p, cs)| cs.iter().map(move |&c| (p, c)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn named_edges(&self) -> Vec<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(p, c)| (self.scheme.name(p).to_string(), self.scheme.name(c).to_string()))
            .collect()
    }

    pub fn to_adjacency(&self) -> Vec<Vec<u8>> {
        let n = self.len();
        let mut m = vec![vec![0u8; n]; n];
        for (p, c) in self.edges() {
            m[p][c] = 1;
        }
        m
    }

    /// Returns a new graph with the edge added or removed. `self` is untouched.
    pub fn mutate_edge(&self, action: EdgeAction, parent: &str, child: &str) -> Result<Dag> {
        let p = self.scheme.index_of(parent)?;
        let c = self.scheme.index_of(child)?;
        match action {
            EdgeAction::Add => self.with_edge(p, c),
            EdgeAction::Remove => Ok(self.without_edge(p, c)),
        }
    }

    pub fn with_edge(&self, parent: usize, child: usize) -> Result<Dag> {
        let mut next = self.clone();
        next.insert(parent, child)?;
        Ok(next)
    }

    pub fn without_edge(&self, parent: usize, child: usize) -> Dag {
        let mut next = self.clone();
        next.parents[child].remove(&parent);
        next.children[parent].remove(&child);
        next
    }

    /// Whether adding `parent -> child` would close a directed cycle.
    pub fn would_cycle(&self, parent: usize, child: usize) -> bool {
        parent == child || self.reaches(child, parent)
    }

    /// Directed reachability `from ~> to` (a node reaches itself).
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(self.children[v].iter().copied().filter(|&c| !seen[c]));
        }
        false
    }

    fn insert(&mut self, parent: usize, child: usize) -> Result<()> {
        let n = self.len();
        if parent >= n || child >= n {
            return Err(Error::UnknownVariable(format!("index {}", parent.max(child))));
        }
        if parent == child {
            return Err(Error::SelfLoop(self.scheme.name(parent).to_string()));
        }
        if self.has_edge(parent, child) {
            return Ok(());
        }
        if self.reaches(child, parent) {
            return Err(Error::Cycle {
                parent: self.scheme.name(parent).to_string(),
                child: self.scheme.name(child).to_string(),
            });
        }
        self.parents[child].insert(parent);
        self.children[parent].insert(child);
        Ok(())
    }

    /// Kahn's algorithm; among ready nodes the lowest scheme index goes first.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(BTreeSet::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        debug_assert_eq!(order.len(), n);
        order
    }

    pub fn topological_names(&self) -> Vec<String> {
        self.topological_order()
            .into_iter()
            .map(|v| self.scheme.name(v).to_string())
            .collect()
    }

    pub fn to_pdag(&self) -> Pdag {
        let mut p = Pdag::empty(self.scheme.clone());
        for (u, v) in self.edges() {
            p.directed.insert((u, v));
        }
        p
    }

    pub fn to_dot(&self) -> String {
        self.to_pdag().to_dot()
    }

    pub fn to_json(&self) -> String {
        self.to_pdag().to_json()
    }

    /// Parses the graph JSON format; undirected edges are rejected.
    pub fn from_json(text: &str, scheme: Arc<VariableScheme>) -> Result<Dag> {
        let pdag = Pdag::from_json(text, scheme.clone())?;
        if !pdag.undirected.is_empty() {
            return Err(Error::Parse("a DAG cannot contain undirected edges".into()));
        }
        Dag::from_edges(scheme, pdag.directed.iter().copied())
    }
}

/// Partially directed graph: a mix of directed and undirected edges, with at
/// most one edge per unordered pair.
#[derive(Debug, Clone)]
pub struct Pdag {
    scheme: Arc<VariableScheme>,
    directed: BTreeSet<(usize, usize)>,
    // stored with the smaller index first
    undirected: BTreeSet<(usize, usize)>,
}

impl PartialEq for Pdag {
    fn eq(&self, other: &Self) -> bool {
        same_scheme(&self.scheme, &other.scheme)
            && self.directed == other.directed
            && self.undirected == other.undirected
    }
}

impl Eq for Pdag {}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Pdag {
    pub fn empty(scheme: Arc<VariableScheme>) -> Self {
        Pdag {
            scheme,
            directed: BTreeSet::new(),
            undirected: BTreeSet::new(),
        }
    }

    /// The complete undirected graph.
    pub fn complete(scheme: Arc<VariableScheme>) -> Self {
        let n = scheme.len();
        let mut p = Pdag::empty(scheme);
        for u in 0..n {
            for v in u + 1..n {
                p.undirected.insert((u, v));
            }
        }
        p
    }

    pub fn from_edges(
        scheme: Arc<VariableScheme>,
        directed: &[(usize, usize)],
        undirected: &[(usize, usize)],
    ) -> Result<Self> {
        let mut p = Pdag::empty(scheme);
        for &(u, v) in directed {
            p.add_directed(u, v)?;
        }
        for &(u, v) in undirected {
            p.add_undirected(u, v)?;
        }
        Ok(p)
    }

    pub fn scheme(&self) -> &Arc<VariableScheme> {
        &self.scheme
    }

    pub fn len(&self) -> usize {
        self.scheme.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scheme.is_empty()
    }

    pub fn directed_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.directed
    }

    pub fn undirected_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.undirected
    }

    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        let n = self.len();
        if u >= n || v >= n {
            return Err(Error::UnknownVariable(format!("index {}", u.max(v))));
        }
        if u == v {
            return Err(Error::SelfLoop(self.scheme.name(u).to_string()));
        }
        if self.adjacent(u, v) {
            return Err(Error::InvalidArgument(format!(
                "{} and {} are already adjacent",
                self.scheme.name(u),
                self.scheme.name(v)
            )));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_pair(u, v)?;
        self.directed.insert((u, v));
        Ok(())
    }

    pub fn add_undirected(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_pair(u, v)?;
        self.undirected.insert(ordered(u, v));
        Ok(())
    }

    /// Drops whatever edge joins `u` and `v`.
    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.undirected.remove(&ordered(u, v));
        self.directed.remove(&(u, v));
        self.directed.remove(&(v, u));
    }

    /// Turns the undirected edge `u - v` into `u -> v`. Returns false when
    /// there is no such undirected edge.
    pub fn orient(&mut self, u: usize, v: usize) -> bool {
        if self.undirected.remove(&ordered(u, v)) {
            self.directed.insert((u, v));
            true
        } else {
            false
        }
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.undirected.contains(&ordered(u, v))
            || self.directed.contains(&(u, v))
            || self.directed.contains(&(v, u))
    }

    pub fn is_directed(&self, u: usize, v: usize) -> bool {
        self.directed.contains(&(u, v))
    }

    pub fn is_undirected(&self, u: usize, v: usize) -> bool {
        self.undirected.contains(&ordered(u, v))
    }

    /// All nodes adjacent to `v`, ascending.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&u| u != v && self.adjacent(u, v)).collect()
    }

    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&u| u != v && self.is_undirected(u, v)).collect()
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&u| self.is_directed(u, v)).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&u| self.is_directed(v, u)).collect()
    }

    /// Undirected copy of this graph.
    pub fn skeleton(&self) -> Pdag {
        let mut p = Pdag::empty(self.scheme.clone());
        for &(u, v) in self.directed.iter().chain(self.undirected.iter()) {
            p.undirected.insert(ordered(u, v));
        }
        p
    }

    /// True when the directed part alone has no cycle.
    pub fn directed_part_is_acyclic(&self) -> bool {
        let n = self.len();
        let mut adj = vec![vec![0u8; n]; n];
        for &(u, v) in &self.directed {
            adj[u][v] = 1;
        }
        is_acyclic(&adj).unwrap_or(false)
    }

    /// Converts to a DAG if no undirected edges remain.
    pub fn to_dag(&self) -> Result<Dag> {
        if !self.undirected.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} undirected edges remain",
                self.undirected.len()
            )));
        }
        Dag::from_edges(self.scheme.clone(), self.directed.iter().copied())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for name in self.scheme.names() {
            let _ = writeln!(out, "  {};", dot_id(name));
        }
        for &(u, v) in &self.directed {
            let _ = writeln!(
                out,
                "  {} -> {};",
                dot_id(self.scheme.name(u)),
                dot_id(self.scheme.name(v))
            );
        }
        for &(u, v) in &self.undirected {
            let _ = writeln!(
                out,
                "  {} -> {} [dir=none];",
                dot_id(self.scheme.name(u)),
                dot_id(self.scheme.name(v))
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        let name = |i: usize| self.scheme.name(i).to_string();
        let file = GraphFile {
            variables: self.scheme.names().map(str::to_string).collect(),
            directed: self.directed.iter().map(|&(u, v)| [name(u), name(v)]).collect(),
            undirected: self.undirected.iter().map(|&(u, v)| [name(u), name(v)]).collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str, scheme: Arc<VariableScheme>) -> Result<Pdag> {
        let file: GraphFile = serde_json::from_str(text)?;
        if !file.variables.iter().map(String::as_str).eq(scheme.names()) {
            return Err(Error::SchemeMismatch);
        }
        let lookup = |pair: &[String; 2]| -> Result<(usize, usize)> {
            Ok((scheme.index_of(&pair[0])?, scheme.index_of(&pair[1])?))
        };
        let directed = file.directed.iter().map(lookup).collect::<Result<Vec<_>>>()?;
        let undirected = file.undirected.iter().map(lookup).collect::<Result<Vec<_>>>()?;
        Pdag::from_edges(scheme, &directed, &undirected)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    variables: Vec<String>,
    #[serde(default)]
    directed: Vec<[String; 2]>,
    #[serde(default)]
    undirected: Vec<[String; 2]>,
}

fn dot_id(name: &str) -> String {
    let plain = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

/// Structural Hamming distance: the number of unordered pairs whose edge
/// status (absent, undirected, u->v, v->u) differs between the two graphs.
pub fn structural_hamming_distance(a: &Pdag, b: &Pdag) -> Result<usize> {
    if !same_scheme(&a.scheme, &b.scheme) {
        return Err(Error::SchemeMismatch);
    }
    let status = |g: &Pdag, u: usize, v: usize| -> u8 {
        if g.is_undirected(u, v) {
            1
        } else if g.is_directed(u, v) {
            2
        } else if g.is_directed(v, u) {
            3
        } else {
            0
        }
    };
    let n = a.len();
    let mut d = 0;
    for u in 0..n {
        for v in u + 1..n {
            if status(a, u, v) != status(b, u, v) {
                d += 1;
            }
        }
    }
    Ok(d)
}

fn check_square(adjacency: &[Vec<u8>]) -> Result<()> {
    let n = adjacency.len();
    if let Some((i, row)) = adjacency.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Shape(format!(
            "row {i} has {} entries in a {n}-row matrix",
            row.len()
        )));
    }
    Ok(())
}

/// True iff the directed graph with `adjacency[i][j] != 0` meaning `i -> j`
/// has no directed cycle. A self-loop counts as a cycle.
pub fn is_acyclic(adjacency: &[Vec<u8>]) -> Result<bool> {
    Ok(find_cycle(adjacency)?.is_none())
}

/// Returns the edges of one directed cycle, if any.
pub fn find_cycle(adjacency: &[Vec<u8>]) -> Result<Option<Vec<(usize, usize)>>> {
    check_square(adjacency)?;
    let n = adjacency.len();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < n {
                let w = *next;
                *next += 1;
                if adjacency[v][w] == 0 {
                    continue;
                }
                match color[w] {
                    0 => {
                        color[w] = 1;
                        parent[w] = v;
                        stack.push((w, 0));
                    }
                    1 => {
                        // back edge v -> w closes a cycle w ~> v -> w
                        let mut cycle = vec![(v, w)];
                        let mut x = v;
                        while x != w {
                            let p = parent[x];
                            cycle.push((p, x));
                            x = p;
                        }
                        cycle.reverse();
                        return Ok(Some(cycle));
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
                stack.pop();
            }
        }
    }
    Ok(None)
}
