//! Weighted networks: loading, validation, and the dense node indexing shared
//! by every other module.
//!
//! Edge-list files hold one edge per line, `u v [w]`, whitespace separated.
//! Lines starting with `#` and blank lines are ignored. External ids may be
//! any token; when every id parses as an integer the dense indices follow
//! numeric order, otherwise they follow first appearance.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// An immutable-after-load network with contiguous node ids `0..n_nodes`.
///
/// Undirected edges are stored once; [`Graph::out_arcs`] expands them into
/// both directions.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<Edge>,
    directed: bool,
    ids: Vec<String>,
    labels: Option<Vec<String>>,
    seen: HashSet<(usize, usize)>,
}

pub(crate) fn check_probability(what: &str, w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Validation(format!("{what} {w} is outside [0, 1]")));
    }
    Ok(())
}

impl Graph {
    /// A graph on `n_nodes` isolated nodes with external ids `0..n_nodes`.
    pub fn new(n_nodes: usize, directed: bool) -> Self {
        Graph {
            n_nodes,
            edges: Vec::new(),
            directed,
            ids: (0..n_nodes).map(|i| i.to_string()).collect(),
            labels: None,
            seen: HashSet::new(),
        }
    }

    pub fn from_edges<I>(n_nodes: usize, directed: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = Graph::new(n_nodes, directed);
        for (u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, source: usize, target: usize, weight: f64) -> Result<()> {
        if source >= self.n_nodes || target >= self.n_nodes {
            return Err(Error::Validation(format!(
                "edge ({source}, {target}) references a node outside 0..{}",
                self.n_nodes
            )));
        }
        if source == target {
            return Err(Error::Validation(format!(
                "self-loop on node {}",
                self.ids[source]
            )));
        }
        check_probability("edge weight", weight)?;
        let key = if self.directed {
            (source, target)
        } else {
            (source.min(target), source.max(target))
        };
        if !self.seen.insert(key) {
            return Err(Error::Validation(format!(
                "duplicate edge ({}, {})",
                self.ids[source], self.ids[target]
            )));
        }
        self.edges.push(Edge {
            source,
            target,
            weight,
        });
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_empty(&self) -> bool {
        self.n_nodes == 0
    }

    /// External id of a dense node index, as it appeared in the input.
    pub fn external_id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn external_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, external: &str) -> Option<usize> {
        self.ids.iter().position(|id| id == external)
    }

    /// Display name from the label file, falling back to the external id.
    pub fn display_name(&self, node: usize) -> &str {
        match &self.labels {
            Some(labels) => &labels[node],
            None => &self.ids[node],
        }
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    /// Copy of the graph with one edge's weight replaced.
    pub fn with_edge_weight(&self, edge: usize, weight: f64) -> Result<Graph> {
        check_probability("edge weight", weight)?;
        let mut g = self.clone();
        g.edges[edge].weight = weight;
        Ok(g)
    }

    /// Outgoing arcs per node; undirected edges appear in both directions.
    /// Neighbour lists are sorted by target index.
    pub fn out_arcs(&self) -> Vec<Vec<(usize, f64)>> {
        let mut arcs = vec![Vec::new(); self.n_nodes];
        for e in &self.edges {
            arcs[e.source].push((e.target, e.weight));
            if !self.directed {
                arcs[e.target].push((e.source, e.weight));
            }
        }
        for list in &mut arcs {
            list.sort_by_key(|&(t, _)| t);
        }
        arcs
    }

    /// Sorted neighbour sets ignoring direction and weight.
    pub fn undirected_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.n_nodes];
        for e in &self.edges {
            nb[e.source].push(e.target);
            nb[e.target].push(e.source);
        }
        for list in &mut nb {
            list.sort_unstable();
            list.dedup();
        }
        nb
    }

    /// Attaches display names from `id<TAB>name` lines. Ids not present in the
    /// graph are rejected; nodes without a line keep their external id.
    pub fn load_labels(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let index: HashMap<&str, usize> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut labels = self.ids.clone();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, name) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "expected `id<TAB>name`".into(),
            })?;
            let node = *index.get(id.trim()).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("unknown node id `{}`", id.trim()),
            })?;
            labels[node] = name.trim().to_string();
        }
        self.labels = Some(labels);
        Ok(())
    }

    /// Edge list with an explicit weight column; loads back to an identical graph.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{} {} {}",
                self.ids[e.source], self.ids[e.target], e.weight
            );
        }
        out
    }
}

/// Loads an edge-list file.
///
/// `default_weight` applies to lines without a weight column; when it is
/// `None`, such lines are an error so that link weights are never implicit.
pub fn load_edge_list(path: &Path, default_weight: Option<f64>, directed: bool) -> Result<Graph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path, default_weight, directed)
}

pub fn parse_edge_list(
    text: &str,
    path: &Path,
    default_weight: Option<f64>,
    directed: bool,
) -> Result<Graph> {
    if let Some(w) = default_weight {
        check_probability("default link weight", w)?;
    }
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut raw: Vec<(usize, &str, &str, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let weight = match fields.len() {
            2 => default_weight.ok_or_else(|| {
                parse_err(
                    lineno,
                    "edge has no weight column and no default link weight was given".into(),
                )
            })?,
            3 => fields[2]
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("bad weight `{}`", fields[2])))?,
            n => {
                return Err(parse_err(
                    lineno,
                    format!("expected `u v [w]`, found {n} fields"),
                ))
            }
        };
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Validation(format!(
                "{}:{lineno}: edge weight {weight} is outside [0, 1]",
                path.display()
            )));
        }
        if fields[0] == fields[1] {
            return Err(Error::Validation(format!(
                "{}:{lineno}: self-loop on node {}",
                path.display(),
                fields[0]
            )));
        }
        raw.push((lineno, fields[0], fields[1], weight));
    }

    let mut order: Vec<&str> = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for &(_, u, v, _) in &raw {
        for id in [u, v] {
            if seen.insert(id) {
                order.push(id);
            }
        }
    }
    let numeric: Option<Vec<i64>> = order.iter().map(|s| s.parse::<i64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut paired: Vec<(i64, &str)> = nums.into_iter().zip(order.iter().copied()).collect();
        paired.sort_by_key(|&(n, _)| n);
        order = paired.into_iter().map(|(_, s)| s).collect();
    }
    let index: HashMap<&str, usize> = order.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    if order.is_empty() {
        log::warn!("{}: no edges found, graph is empty", path.display());
    }
    let mut g = Graph::new(order.len(), directed);
    g.ids = order.iter().map(|s| s.to_string()).collect();
    for (lineno, u, v, w) in raw {
        g.add_edge(index[u], index[v], w).map_err(|e| match e {
            Error::Validation(msg) => {
                Error::Validation(format!("{}:{lineno}: {msg}", path.display()))
            }
            other => other,
        })?;
    }
    Ok(g)
}

/// Mean local clustering coefficient of the undirected view; nodes of degree
/// below two contribute zero.
pub fn clustering_coefficient(g: &Graph) -> f64 {
    let n = g.n_nodes();
    if n == 0 {
        return 0.0;
    }
    let nb = g.undirected_neighbors();
    let mut total = 0.0;
    for list in &nb {
        let d = list.len();
        if d < 2 {
            continue;
        }
        let mut links = 0usize;
        for (a, &u) in list.iter().enumerate() {
            for &v in &list[a + 1..] {
                if nb[u].binary_search(&v).is_ok() {
                    links += 1;
                }
            }
        }
        total += 2.0 * links as f64 / (d * (d - 1)) as f64;
    }
    total / n as f64
}
