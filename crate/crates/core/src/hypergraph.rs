//! Hypergraphs, their derived adjacency, and the hyperedge-list text format.
//!
//! A graph is the special case where every hyperedge has cardinality two.
//! Vertices are dense ids `0..n`; each hyperedge stores a sorted set of
//! distinct ids. Repeated identical hyperedges are allowed (multihypergraph).

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum HypergraphError {
    #[error("hyperedge {edge} is empty")]
    EmptyEdge { edge: EdgeId },
    #[error("hyperedge {edge} references vertex {vertex} but the hypergraph has {n} vertices")]
    VertexOutOfRange { edge: EdgeId, vertex: VertexId, n: usize },
    #[error("hyperedge {edge} lists vertex {vertex} more than once")]
    RepeatedVertex { edge: EdgeId, vertex: VertexId },
    #[error("hyperedge {edge} has non-positive or non-finite weight {weight}")]
    BadWeight { edge: EdgeId, weight: f64 },
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("line {line}: malformed token {token:?}")]
    MalformedToken { line: usize, token: String },
    #[error("line {line}: hyperedge has no vertices")]
    EmptyLine { line: usize },
    #[error("read failed: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<VertexId>>,
    weights: Option<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl Hypergraph {
    /// Builds a hypergraph over `n` vertices. Each hyperedge must be non-empty
    /// and list distinct in-range ids; ids are sorted on the way in.
    pub fn new(n: usize, edges: Vec<Vec<VertexId>>) -> Result<Self, HypergraphError> {
        let mut sorted = Vec::with_capacity(edges.len());
        for (id, mut edge) in edges.into_iter().enumerate() {
            if edge.is_empty() {
                return Err(HypergraphError::EmptyEdge { edge: id });
            }
            edge.sort_unstable();
            for w in edge.windows(2) {
                if w[0] == w[1] {
                    return Err(HypergraphError::RepeatedVertex { edge: id, vertex: w[0] });
                }
            }
            if let Some(&max) = edge.last() {
                if max >= n {
                    return Err(HypergraphError::VertexOutOfRange { edge: id, vertex: max, n });
                }
            }
            sorted.push(edge);
        }
        Ok(Self { n, edges: sorted, weights: None, labels: None })
    }

    /// Graph constructor: one cardinality-2 hyperedge per pair.
    pub fn from_pairs(n: usize, pairs: &[(VertexId, VertexId)]) -> Result<Self, HypergraphError> {
        Self::new(n, pairs.iter().map(|&(u, v)| vec![u, v]).collect())
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, HypergraphError> {
        if weights.len() != self.edges.len() {
            return Err(HypergraphError::WeightCount { expected: self.edges.len(), got: weights.len() });
        }
        if let Some((edge, &weight)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(HypergraphError::BadWeight { edge, weight });
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<VertexId>] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &[VertexId] {
        &self.edges[id]
    }

    /// Weight of a hyperedge; 1 when the hypergraph is unweighted.
    pub fn weight(&self, id: EdgeId) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[id])
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Original vertex labels when the hypergraph was loaded with remapping.
    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: VertexId) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    /// Canonical hyperedge-list form: sorted ids per line, edges in order.
    pub fn to_hyperedge_list(&self) -> String {
        let mut out = String::new();
        for edge in &self.edges {
            let mut first = true;
            for v in edge {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Result of reading a hyperedge list.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub hypergraph: Hypergraph,
    /// Number of repeated vertex ids dropped from within a line.
    pub duplicates_collapsed: usize,
}

/// Reads one hyperedge per line of whitespace-separated nonnegative integer
/// ids. `#` comment lines and blank lines are skipped; `n` is one past the
/// largest id seen.
pub fn parse_hyperedge_list<R: BufRead>(reader: R) -> Result<Parsed, HypergraphError> {
    read_lines(reader, |token, line| {
        token.parse::<VertexId>().map_err(|_| HypergraphError::MalformedToken { line, token: token.to_string() })
    })
    .map(|(edges, dup)| {
        let n = edges.iter().flatten().max().map_or(0, |m| m + 1);
        Parsed { hypergraph: Hypergraph { n, edges, weights: None, labels: None }, duplicates_collapsed: dup }
    })
}

/// Like [`parse_hyperedge_list`] but accepts arbitrary tokens as vertex
/// labels, assigning dense ids in order of first appearance.
pub fn parse_labeled_hyperedge_list<R: BufRead>(reader: R) -> Result<Parsed, HypergraphError> {
    let mut index: HashMap<String, VertexId> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let (edges, dup) = read_lines(reader, |token, _| {
        let next = labels.len();
        let id = *index.entry(token.to_string()).or_insert(next);
        if id == next {
            labels.push(token.to_string());
        }
        Ok(id)
    })?;
    Ok(Parsed {
        hypergraph: Hypergraph { n: labels.len(), edges, weights: None, labels: Some(labels) },
        duplicates_collapsed: dup,
    })
}

fn read_lines<R, F>(reader: R, mut token_id: F) -> Result<(Vec<Vec<VertexId>>, usize), HypergraphError>
where
    R: BufRead,
    F: FnMut(&str, usize) -> Result<VertexId, HypergraphError>,
{
    let mut edges = Vec::new();
    let mut duplicates = 0;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| HypergraphError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut edge = Vec::new();
        for token in trimmed.split_whitespace() {
            edge.push(token_id(token, line_no)?);
        }
        if edge.is_empty() {
            return Err(HypergraphError::EmptyLine { line: line_no });
        }
        edge.sort_unstable();
        let before = edge.len();
        edge.dedup();
        duplicates += before - edge.len();
        edges.push(edge);
    }
    Ok((edges, duplicates))
}

/// Per-vertex neighborhoods, degrees and incident hyperedges.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyIndex {
    neighbors: Vec<Vec<VertexId>>,
    degree: Vec<usize>,
    incident: Vec<Vec<EdgeId>>,
    component: Vec<usize>,
}

pub fn build_adjacency(h: &Hypergraph) -> AdjacencyIndex {
    let n = h.num_vertices();
    let mut neighbors: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut incident: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    for (id, edge) in h.edges().iter().enumerate() {
        for &v in edge {
            incident[v].push(id);
            neighbors[v].extend(edge.iter().copied().filter(|&u| u != v));
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }
    let degree = incident.iter().map(Vec::len).collect();
    let component = label_components(&neighbors);
    AdjacencyIndex { neighbors, degree, incident, component }
}

fn label_components(neighbors: &[Vec<VertexId>]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; neighbors.len()];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..neighbors.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &u in &neighbors[v] {
                if comp[u] == usize::MAX {
                    comp[u] = next;
                    queue.push_back(u);
                }
            }
        }
        next += 1;
    }
    comp
}

impl AdjacencyIndex {
    pub fn num_vertices(&self) -> usize {
        self.neighbors.len()
    }

    /// Sorted distinct neighbors of `v`, never containing `v` itself.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[v]
    }

    /// Number of incident hyperedges, counting repeats and singletons.
    pub fn degree(&self, v: VertexId) -> usize {
        self.degree[v]
    }

    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    pub fn component(&self, v: VertexId) -> usize {
        self.component[v]
    }

    pub fn same_component(&self, u: VertexId, v: VertexId) -> bool {
        self.component[u] == self.component[v]
    }

    /// Unordered adjacent pairs `(u, v)` with `u < v`, in lexicographic order.
    pub fn adjacent_pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (u, list) in self.neighbors.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// BFS distances from `source` to each of `targets`, stopping as soon as
    /// every target has been reached. `None` marks an unreachable target.
    pub fn distances_from(&self, source: VertexId, targets: &[VertexId]) -> Vec<Option<u32>> {
        let mut result = vec![None; targets.len()];
        let mut pending = 0usize;
        let mut wanted: HashMap<VertexId, Vec<usize>> = HashMap::new();
        for (i, &t) in targets.iter().enumerate() {
            if t == source {
                result[i] = Some(0);
            } else if self.same_component(source, t) {
                wanted.entry(t).or_default().push(i);
                pending += 1;
            }
        }
        if pending == 0 {
            return result;
        }
        let mut dist: HashMap<VertexId, u32> = HashMap::new();
        dist.insert(source, 0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for &u in &self.neighbors[v] {
                if dist.contains_key(&u) {
                    continue;
                }
                dist.insert(u, d + 1);
                if let Some(slots) = wanted.remove(&u) {
                    pending -= slots.len();
                    for i in slots {
                        result[i] = Some(d + 1);
                    }
                    if pending == 0 {
                        return result;
                    }
                }
                queue.push_back(u);
            }
        }
        result
    }
}

/// Shortest-path hop count between `s` and `t`; `None` when they lie in
/// different components.
pub fn graph_distance(adj: &AdjacencyIndex, s: VertexId, t: VertexId) -> Option<u32> {
    if s == t {
        return Some(0);
    }
    if adj.is_adjacent(s, t) {
        return Some(1);
    }
    adj.distances_from(s, &[t])[0]
}
