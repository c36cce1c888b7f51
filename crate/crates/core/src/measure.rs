//! Local probability measures and the random walks that produce them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{AdjacencyIndex, Hypergraph, VertexId};
use crate::metric::IntegerMetricSpace;

/// Tolerance on the total mass of a measure.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("vertex {0} has no neighbors; no measure definable")]
    Isolated(VertexId),
    #[error("vertex {0} belongs only to singleton hyperedges")]
    OnlySingletons(VertexId),
    #[error("laziness {0} is outside the allowed range")]
    InvalidAlpha(f64),
    #[error("base mass {base_mass} is smaller than the laziness {alpha} to remove")]
    InsufficientBaseMass { base_mass: f64, alpha: f64 },
    #[error("mass {mass} at {point} is not a positive finite number")]
    BadMass { point: String, mass: f64 },
    #[error("point {0} appears twice in the support")]
    DuplicatePoint(String),
    #[error("masses sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("support point {0} is not within distance 1 of the base point")]
    NotLocal(String),
}

/// Finitely supported probability measure attached to a base point.
///
/// Support is kept sorted by point, zero masses are never stored, and the
/// masses sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMeasure<P = VertexId> {
    base: P,
    support: Vec<(P, f64)>,
}

impl<P: Ord + Clone + fmt::Debug> LocalMeasure<P> {
    pub fn new(base: P, mut support: Vec<(P, f64)>) -> Result<Self, MeasureError> {
        support.sort_by(|a, b| a.0.cmp(&b.0));
        for w in support.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(MeasureError::DuplicatePoint(format!("{:?}", w[0].0)));
            }
        }
        for (p, m) in &support {
            if !(m.is_finite() && *m > 0.0) {
                return Err(MeasureError::BadMass { point: format!("{p:?}"), mass: *m });
            }
        }
        let total: f64 = support.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(MeasureError::NotNormalized(total));
        }
        Ok(Self { base, support })
    }

    /// Builds a measure and additionally checks that every support point is
    /// the base or one of its unit neighbors in `space`.
    pub fn new_in<S>(space: &S, base: P, support: Vec<(P, f64)>) -> Result<Self, MeasureError>
    where
        S: IntegerMetricSpace<Point = P>,
    {
        let mu = Self::new(base, support)?;
        mu.check_support(space)?;
        Ok(mu)
    }

    /// Unit mass at `base`.
    pub fn dirac(base: P) -> Self {
        Self { support: vec![(base.clone(), 1.0)], base }
    }

    pub fn check_support<S>(&self, space: &S) -> Result<(), MeasureError>
    where
        S: IntegerMetricSpace<Point = P>,
    {
        for (p, _) in &self.support {
            if *p != self.base && !space.is_adjacent(&self.base, p) {
                return Err(MeasureError::NotLocal(format!("{p:?}")));
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    /// `(point, mass)` pairs sorted by point.
    pub fn support(&self) -> &[(P, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn mass(&self, p: &P) -> f64 {
        self.support.binary_search_by(|(q, _)| q.cmp(p)).map_or(0.0, |i| self.support[i].1)
    }

    pub fn base_mass(&self) -> f64 {
        self.mass(&self.base)
    }

    pub fn total_mass(&self) -> f64 {
        self.support.iter().map(|(_, m)| m).sum()
    }
}

/// `α δ_base + (1 − α) μ` for `α ∈ (0, 1)`.
pub fn lazify<P: Ord + Clone + fmt::Debug>(mu: &LocalMeasure<P>, alpha: f64) -> Result<LocalMeasure<P>, MeasureError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MeasureError::InvalidAlpha(alpha));
    }
    let mut support: Vec<(P, f64)> = mu.support.iter().map(|(p, m)| (p.clone(), (1.0 - alpha) * m)).collect();
    match support.binary_search_by(|(q, _)| q.cmp(&mu.base)) {
        Ok(i) => support[i].1 += alpha,
        Err(i) => support.insert(i, (mu.base.clone(), alpha)),
    }
    Ok(LocalMeasure { base: mu.base.clone(), support })
}

/// Removes laziness `α ∈ [0, 1)` from the base point and renormalizes:
/// `(μ − α δ_base) / (1 − α)`.
pub fn delazify<P: Ord + Clone + fmt::Debug>(
    mu: &LocalMeasure<P>,
    alpha: f64,
) -> Result<LocalMeasure<P>, MeasureError> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(MeasureError::InvalidAlpha(alpha));
    }
    if alpha == 0.0 {
        return Ok(mu.clone());
    }
    let base_mass = mu.base_mass();
    if base_mass < alpha - MASS_TOLERANCE {
        return Err(MeasureError::InsufficientBaseMass { base_mass, alpha });
    }
    let scale = 1.0 / (1.0 - alpha);
    let support = mu
        .support
        .iter()
        .filter_map(|(p, m)| {
            let m = if *p == mu.base { m - alpha } else { *m };
            (m > MASS_TOLERANCE).then(|| (p.clone(), m * scale))
        })
        .collect();
    Ok(LocalMeasure { base: mu.base.clone(), support })
}

/// Symmetric per-pair weights, `w_xy = Σ` of the weights of hyperedges
/// containing both `x` and `y`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeWeights {
    map: HashMap<(VertexId, VertexId), f64>,
}

impl EdgeWeights {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_hypergraph(h: &Hypergraph) -> Self {
        let mut w = Self::new();
        for (id, edge) in h.edges().iter().enumerate() {
            for (i, &u) in edge.iter().enumerate() {
                for &v in &edge[i + 1..] {
                    *w.map.entry((u, v)).or_insert(0.0) += h.weight(id);
                }
            }
        }
        w
    }

    pub fn set(&mut self, u: VertexId, v: VertexId, weight: f64) {
        self.map.insert(key(u, v), weight);
    }

    /// Missing pairs weigh 1.
    pub fn get(&self, u: VertexId, v: VertexId) -> f64 {
        self.map.get(&key(u, v)).copied().unwrap_or(1.0)
    }
}

fn key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Random-walk measure of a (weighted) graph: `μ_x(y) = w_xy / Σ_z w_xz`
/// over neighbors; uniform over neighbors when `weights` is `None`.
pub fn graph_measure(
    adj: &AdjacencyIndex,
    weights: Option<&EdgeWeights>,
    x: VertexId,
) -> Result<LocalMeasure, MeasureError> {
    let nbrs = adj.neighbors(x);
    if nbrs.is_empty() {
        return Err(MeasureError::Isolated(x));
    }
    let support: Vec<(VertexId, f64)> = match weights {
        None => {
            let m = 1.0 / nbrs.len() as f64;
            nbrs.iter().map(|&y| (y, m)).collect()
        }
        Some(w) => {
            let total: f64 = nbrs.iter().map(|&y| w.get(x, y)).sum();
            nbrs.iter().map(|&y| (y, w.get(x, y) / total)).collect()
        }
    };
    LocalMeasure::new(x, support)
}

/// Equal-nodes walk: uniform over the neighborhood.
pub fn measure_equal_nodes(_h: &Hypergraph, adj: &AdjacencyIndex, x: VertexId) -> Result<LocalMeasure, MeasureError> {
    graph_measure(adj, None, x)
}

/// Equal-edges walk: pick an incident non-singleton hyperedge uniformly,
/// then another of its vertices uniformly.
pub fn measure_equal_edges(h: &Hypergraph, adj: &AdjacencyIndex, x: VertexId) -> Result<LocalMeasure, MeasureError> {
    let singletons = adj.incident_edges(x).iter().filter(|&&e| h.edge(e).len() == 1).count();
    let effective = adj.degree(x) - singletons;
    if effective == 0 {
        return Err(if adj.degree(x) == 0 { MeasureError::Isolated(x) } else { MeasureError::OnlySingletons(x) });
    }
    let mut acc = Accumulator::new(adj.neighbors(x));
    for &e in adj.incident_edges(x) {
        let edge = h.edge(e);
        if edge.len() < 2 {
            continue;
        }
        let share = 1.0 / (edge.len() - 1) as f64;
        for &y in edge.iter().filter(|&&y| y != x) {
            acc.add(y, share);
        }
    }
    acc.finish(x, effective as f64)
}

/// Weighted-edges walk: pick an incident hyperedge with probability
/// proportional to `|e| − 1`, then another of its vertices uniformly.
/// Reduces to `μ_x(y) = m_xy / Σ_{f∋x} (|f| − 1)`.
pub fn measure_weighted_edges(h: &Hypergraph, adj: &AdjacencyIndex, x: VertexId) -> Result<LocalMeasure, MeasureError> {
    let denom: usize = adj.incident_edges(x).iter().map(|&e| h.edge(e).len() - 1).sum();
    if denom == 0 {
        return Err(if adj.degree(x) == 0 { MeasureError::Isolated(x) } else { MeasureError::OnlySingletons(x) });
    }
    let mut acc = Accumulator::new(adj.neighbors(x));
    for &e in adj.incident_edges(x) {
        for &y in h.edge(e).iter().filter(|&&y| y != x) {
            acc.add(y, 1.0);
        }
    }
    acc.finish(x, denom as f64)
}

/// Dense accumulator over a sorted neighbor list.
struct Accumulator<'a> {
    nbrs: &'a [VertexId],
    sums: Vec<f64>,
}

impl<'a> Accumulator<'a> {
    fn new(nbrs: &'a [VertexId]) -> Self {
        Self { nbrs, sums: vec![0.0; nbrs.len()] }
    }

    fn add(&mut self, y: VertexId, amount: f64) {
        let i = self.nbrs.binary_search(&y).expect("co-member is a neighbor");
        self.sums[i] += amount;
    }

    fn finish(self, x: VertexId, denom: f64) -> Result<LocalMeasure, MeasureError> {
        let support = self.nbrs.iter().zip(self.sums).map(|(&y, s)| (y, s / denom)).collect();
        LocalMeasure::new(x, support)
    }
}

/// Which random walk defines the local measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    /// Equal-nodes walk.
    En,
    /// Equal-edges walk.
    Ee,
    /// Weighted-edges walk.
    We,
    /// Graph random walk on the clique expansion, weighted by hyperedge
    /// weights when present.
    Graph,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 4] = [MeasureKind::En, MeasureKind::Ee, MeasureKind::We, MeasureKind::Graph];

    pub fn build(self, h: &Hypergraph, adj: &AdjacencyIndex, x: VertexId) -> Result<LocalMeasure, MeasureError> {
        match self {
            MeasureKind::En => measure_equal_nodes(h, adj, x),
            MeasureKind::Ee => measure_equal_edges(h, adj, x),
            MeasureKind::We => measure_weighted_edges(h, adj, x),
            MeasureKind::Graph if h.is_weighted() => graph_measure(adj, Some(&EdgeWeights::from_hypergraph(h)), x),
            MeasureKind::Graph => graph_measure(adj, None, x),
        }
    }

    /// Measures for every vertex; `Err` entries for vertices where the walk
    /// is undefined.
    pub fn build_all(self, h: &Hypergraph, adj: &AdjacencyIndex) -> Vec<Result<LocalMeasure, MeasureError>> {
        let weights = (self == MeasureKind::Graph && h.is_weighted()).then(|| EdgeWeights::from_hypergraph(h));
        (0..h.num_vertices())
            .map(|x| match self {
                MeasureKind::Graph => graph_measure(adj, weights.as_ref(), x),
                other => other.build(h, adj, x),
            })
            .collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::En => "en",
            MeasureKind::Ee => "ee",
            MeasureKind::We => "we",
            MeasureKind::Graph => "graph",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(MeasureKind::En),
            "ee" => Ok(MeasureKind::Ee),
            "we" => Ok(MeasureKind::We),
            "graph" => Ok(MeasureKind::Graph),
            _ => Err(format!("unknown measure {s:?}, expected en|ee|we|graph")),
        }
    }
}
