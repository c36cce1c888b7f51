//! Hypergraph curvature: pairwise W1 estimates aggregated per hyperedge,
//! edge curvature `κ(e) = 1 − AGG(e)`, and two node curvatures.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::{w1_upper_bound_with, BoundError, OverlapRule};
use crate::hypergraph::{build_adjacency, AdjacencyIndex, EdgeId, Hypergraph, VertexId};
use crate::measure::{lazify, LocalMeasure, MeasureError, MeasureKind};
use crate::metric::{graph_space, GraphSpace};
use crate::par;
use crate::transport::{
    exact_w1_capped, sinkhorn_run, SinkhornConfig, TransportError, TransportProblem, DEFAULT_SUPPORT_CAP,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(VertexId, VertexId),
    #[error("hyperedge has a single vertex; no pair to aggregate")]
    Singleton,
    #[error("vertex {0} has no neighbors")]
    IsolatedNode(VertexId),
    #[error("vertex {0} has no incident hyperedge with a curvature")]
    NoCurvatureEdge(VertexId),
    #[error("measure at vertex {vertex}: {source}")]
    Measure { vertex: VertexId, source: MeasureError },
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("pair ({0}, {1}) failed: {2}")]
    Pair(VertexId, VertexId, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggKind {
    /// Mean over vertex pairs.
    A,
    /// Maximum over vertex pairs.
    M,
}

impl AggKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AggKind::A => "a",
            AggKind::M => "m",
        }
    }

    pub fn aggregate<F>(self, edge: &[VertexId], w1: F) -> Result<f64, CurvatureError>
    where
        F: FnMut(VertexId, VertexId) -> Result<f64, CurvatureError>,
    {
        match self {
            AggKind::A => agg_average(edge, w1),
            AggKind::M => agg_max(edge, w1),
        }
    }
}

impl fmt::Display for AggKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AggKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" => Ok(AggKind::A),
            "m" => Ok(AggKind::M),
            _ => Err(format!("unknown aggregation {s:?}, expected a|m")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Closed-form upper bound on W1; curvatures are lower bounds.
    Bound,
    /// Minimum-cost-flow W1.
    Exact,
    /// Entropic-regularized W1.
    Sinkhorn,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Bound => "bound",
            EstimatorKind::Exact => "exact",
            EstimatorKind::Sinkhorn => "sinkhorn",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bound" => Ok(EstimatorKind::Bound),
            "exact" => Ok(EstimatorKind::Exact),
            "sinkhorn" => Ok(EstimatorKind::Sinkhorn),
            _ => Err(format!("unknown estimator {s:?}, expected bound|exact|sinkhorn")),
        }
    }
}

/// `(2 / (|e|(|e| − 1))) Σ_{i<j} W1(μ_i, μ_j)`.
pub fn agg_average<F>(edge: &[VertexId], mut w1: F) -> Result<f64, CurvatureError>
where
    F: FnMut(VertexId, VertexId) -> Result<f64, CurvatureError>,
{
    if edge.len() < 2 {
        return Err(CurvatureError::Singleton);
    }
    let mut sum = 0.0;
    for (a, &i) in edge.iter().enumerate() {
        for &j in &edge[a + 1..] {
            sum += w1(i, j)?;
        }
    }
    let k = edge.len() as f64;
    Ok(2.0 * sum / (k * (k - 1.0)))
}

/// `max_{i<j} W1(μ_i, μ_j)`.
pub fn agg_max<F>(edge: &[VertexId], mut w1: F) -> Result<f64, CurvatureError>
where
    F: FnMut(VertexId, VertexId) -> Result<f64, CurvatureError>,
{
    if edge.len() < 2 {
        return Err(CurvatureError::Singleton);
    }
    let mut best = f64::NEG_INFINITY;
    for (a, &i) in edge.iter().enumerate() {
        for &j in &edge[a + 1..] {
            best = best.max(w1(i, j)?);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureConfig {
    pub measure: MeasureKind,
    pub agg: AggKind,
    pub estimator: EstimatorKind,
    /// Extra laziness mixed into every measure before estimation.
    pub alpha: Option<f64>,
    pub sinkhorn: SinkhornConfig,
    pub overlap: OverlapRule,
    /// Largest support the exact solver accepts per side.
    pub support_cap: usize,
    /// Count singleton hyperedges in the denominator of the edge-based node
    /// curvature.
    pub singletons_in_node_degree: bool,
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        Self {
            measure: MeasureKind::En,
            agg: AggKind::A,
            estimator: EstimatorKind::Bound,
            alpha: None,
            sinkhorn: SinkhornConfig::default(),
            overlap: OverlapRule::CommonSupport,
            support_cap: DEFAULT_SUPPORT_CAP,
            singletons_in_node_degree: false,
            threads: None,
        }
    }
}

/// Pairwise W1 under one estimator, plus its evaluation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairValue {
    pub w1: f64,
    pub time_ns: u64,
}

/// Holds the measures of every vertex and evaluates pairwise W1 between
/// adjacent vertices with the configured estimator.
pub struct CurvatureEngine<'h> {
    hypergraph: &'h Hypergraph,
    adjacency: AdjacencyIndex,
    measures: Vec<Result<LocalMeasure, MeasureError>>,
    config: CurvatureConfig,
}

impl<'h> CurvatureEngine<'h> {
    pub fn new(hypergraph: &'h Hypergraph, config: CurvatureConfig) -> Result<Self, CurvatureError> {
        let adjacency = build_adjacency(hypergraph);
        let mut measures = config.measure.build_all(hypergraph, &adjacency);
        if let Some(alpha) = config.alpha {
            for (vertex, m) in measures.iter_mut().enumerate() {
                if let Ok(mu) = m {
                    *m = Ok(lazify(mu, alpha).map_err(|source| CurvatureError::Measure { vertex, source })?);
                }
            }
        }
        Ok(Self { hypergraph, adjacency, measures, config })
    }

    pub fn config(&self) -> &CurvatureConfig {
        &self.config
    }

    pub fn hypergraph(&self) -> &'h Hypergraph {
        self.hypergraph
    }

    pub fn adjacency(&self) -> &AdjacencyIndex {
        &self.adjacency
    }

    pub fn space(&self) -> GraphSpace<'_> {
        graph_space(&self.adjacency)
    }

    pub fn measure(&self, v: VertexId) -> Result<&LocalMeasure, CurvatureError> {
        self.measures[v].as_ref().map_err(|e| CurvatureError::Measure { vertex: v, source: e.clone() })
    }

    /// W1 estimate between adjacent `i` and `j`.
    pub fn pair_w1(&self, i: VertexId, j: VertexId) -> Result<f64, CurvatureError> {
        self.pair_w1_with(i, j, self.config.estimator)
    }

    pub fn pair_w1_with(&self, i: VertexId, j: VertexId, estimator: EstimatorKind) -> Result<f64, CurvatureError> {
        if i >= self.adjacency.num_vertices() || j >= self.adjacency.num_vertices() || !self.adjacency.is_adjacent(i, j)
        {
            return Err(CurvatureError::NotAdjacent(i, j));
        }
        let (mi, mj) = (self.measure(i)?, self.measure(j)?);
        let space = self.space();
        match estimator {
            EstimatorKind::Bound => Ok(w1_upper_bound_with(&i, &j, mi, mj, &space, self.config.overlap)?.w1_upper),
            EstimatorKind::Exact => {
                let problem = TransportProblem::from_measures(&space, mi, mj)?;
                Ok(exact_w1_capped(&problem, self.config.support_cap)?.objective)
            }
            EstimatorKind::Sinkhorn => {
                let problem = TransportProblem::from_measures(&space, mi, mj)?;
                Ok(sinkhorn_run(&problem, &self.config.sinkhorn)?.cost)
            }
        }
    }

    /// `1 − W1(μ_i, μ_j)`; the distance between adjacent vertices is one.
    pub fn pair_curvature(&self, i: VertexId, j: VertexId) -> Result<f64, CurvatureError> {
        self.pair_w1(i, j).map(|w| 1.0 - w)
    }

    pub fn edge_agg(&self, edge: &[VertexId]) -> Result<f64, CurvatureError> {
        self.config.agg.aggregate(edge, |i, j| self.pair_w1(i, j))
    }

    /// `κ(e) = 1 − AGG(e)`.
    pub fn edge_curvature(&self, edge: &[VertexId]) -> Result<f64, CurvatureError> {
        self.edge_agg(edge).map(|a| 1.0 - a)
    }

    /// Mean of `κ(i, j)` over the neighbors `j` of `i`.
    pub fn node_curvature_neighborhood(&self, i: VertexId) -> Result<f64, CurvatureError> {
        let nbrs = self.adjacency.neighbors(i);
        if nbrs.is_empty() {
            return Err(CurvatureError::IsolatedNode(i));
        }
        let mut sum = 0.0;
        for &j in nbrs {
            sum += self.pair_curvature(i, j)?;
        }
        Ok(sum / nbrs.len() as f64)
    }

    /// Mean of `κ(e)` over hyperedges containing `i`, repeats counted.
    pub fn node_curvature_edges(&self, i: VertexId) -> Result<f64, CurvatureError> {
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut bearing = 0usize;
        for &e in self.adjacency.incident_edges(i) {
            let edge = self.hypergraph.edge(e);
            if edge.len() < 2 {
                if self.config.singletons_in_node_degree {
                    count += 1;
                }
                continue;
            }
            sum += self.edge_curvature(edge)?;
            count += 1;
            bearing += 1;
        }
        if bearing == 0 {
            return Err(CurvatureError::NoCurvatureEdge(i));
        }
        Ok(sum / count as f64)
    }

    /// Evaluates every adjacent pair once, in parallel, keyed by `(u, v)`
    /// with `u < v`.
    pub fn pair_table(&self) -> PairTable {
        self.pair_table_with(self.config.estimator)
    }

    pub fn pair_table_with(&self, estimator: EstimatorKind) -> PairTable {
        let pairs = self.adjacency.adjacent_pairs();
        let values = par::with_threads(self.config.threads, || {
            par::map(&pairs, |&(u, v)| {
                let start = Instant::now();
                let w1 = self.pair_w1_with(u, v, estimator);
                let time_ns = start.elapsed().as_nanos() as u64;
                w1.map(|w1| PairValue { w1, time_ns }).map_err(|e| e.to_string())
            })
        });
        PairTable::new(pairs, values)
    }

    /// Full report: every hyperedge and every vertex, skipped entries
    /// carrying their reason.
    pub fn report(&self) -> CurvatureReport {
        let table = self.pair_table();
        self.report_from(&table)
    }

    pub fn report_from(&self, table: &PairTable) -> CurvatureReport {
        let h = self.hypergraph;
        let agg = self.config.agg;
        let mut edges = Vec::with_capacity(h.num_edges());
        let mut edge_kappa: Vec<Option<f64>> = Vec::with_capacity(h.num_edges());
        for (edge_id, edge) in h.edges().iter().enumerate() {
            let mut time_ns = 0u64;
            let value = agg.aggregate(edge, |i, j| {
                let pv = table.get(i, j)?;
                time_ns += pv.time_ns;
                Ok(pv.w1)
            });
            let record = match value {
                Ok(a) => EdgeRecord {
                    edge_id,
                    cardinality: edge.len(),
                    agg: Some(a),
                    curvature: Some(1.0 - a),
                    time_ns,
                    skip_reason: None,
                },
                Err(e) => EdgeRecord {
                    edge_id,
                    cardinality: edge.len(),
                    agg: None,
                    curvature: None,
                    time_ns,
                    skip_reason: Some(skip_text(&e)),
                },
            };
            edge_kappa.push(record.curvature);
            edges.push(record);
        }

        let nodes = (0..h.num_vertices())
            .map(|i| {
                let kn = self.node_neighborhood_from(table, i);
                let ke = self.node_edges_from(&edge_kappa, i);
                NodeRecord {
                    node_id: i,
                    kappa_n: kn.as_ref().ok().copied(),
                    kappa_e: ke.as_ref().ok().copied(),
                    skip_reason: match (kn, ke) {
                        (Ok(_), Ok(_)) => None,
                        (Err(e), Ok(_)) => Some(format!("kappa_n: {}", skip_text(&e))),
                        (Ok(_), Err(e)) => Some(format!("kappa_e: {}", skip_text(&e))),
                        (Err(a), Err(b)) => Some(format!("kappa_n: {}; kappa_e: {}", skip_text(&a), skip_text(&b))),
                    },
                }
            })
            .collect();

        CurvatureReport { meta: ReportMeta::new(&self.config), edges, nodes }
    }

    fn node_neighborhood_from(&self, table: &PairTable, i: VertexId) -> Result<f64, CurvatureError> {
        let nbrs = self.adjacency.neighbors(i);
        if nbrs.is_empty() {
            return Err(CurvatureError::IsolatedNode(i));
        }
        let mut sum = 0.0;
        for &j in nbrs {
            sum += 1.0 - table.get(i, j)?.w1;
        }
        Ok(sum / nbrs.len() as f64)
    }

    fn node_edges_from(&self, edge_kappa: &[Option<f64>], i: VertexId) -> Result<f64, CurvatureError> {
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut bearing = 0usize;
        for &e in self.adjacency.incident_edges(i) {
            if self.hypergraph.edge(e).len() < 2 {
                if self.config.singletons_in_node_degree {
                    count += 1;
                }
                continue;
            }
            bearing += 1;
            match edge_kappa[e] {
                Some(k) => {
                    sum += k;
                    count += 1;
                }
                None => return Err(CurvatureError::Pair(i, i, format!("incident hyperedge {e} has no curvature"))),
            }
        }
        if bearing == 0 {
            return Err(CurvatureError::NoCurvatureEdge(i));
        }
        Ok(sum / count as f64)
    }
}

fn skip_text(e: &CurvatureError) -> String {
    match e {
        CurvatureError::Singleton => "singleton hyperedge".into(),
        CurvatureError::IsolatedNode(_) => "isolated vertex".into(),
        CurvatureError::NoCurvatureEdge(_) => "no incident hyperedge of cardinality >= 2".into(),
        other => other.to_string(),
    }
}

/// Memo of pairwise W1 values over adjacent pairs.
#[derive(Debug, Clone)]
pub struct PairTable {
    pairs: Vec<(VertexId, VertexId)>,
    index: HashMap<(VertexId, VertexId), usize>,
    values: Vec<Result<PairValue, String>>,
}

impl PairTable {
    fn new(pairs: Vec<(VertexId, VertexId)>, values: Vec<Result<PairValue, String>>) -> Self {
        let index = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        Self { pairs, index, values }
    }

    pub fn pairs(&self) -> &[(VertexId, VertexId)] {
        &self.pairs
    }

    pub fn values(&self) -> &[Result<PairValue, String>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, i: VertexId, j: VertexId) -> Result<PairValue, CurvatureError> {
        let key = if i < j { (i, j) } else { (j, i) };
        match self.index.get(&key) {
            None => Err(CurvatureError::NotAdjacent(i, j)),
            Some(&k) => self.values[k].clone().map_err(|e| CurvatureError::Pair(key.0, key.1, e)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub edge_id: EdgeId,
    pub cardinality: usize,
    pub agg: Option<f64>,
    pub curvature: Option<f64>,
    /// Sum of the evaluation times of the pairs this hyperedge uses.
    pub time_ns: u64,
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node_id: VertexId,
    pub kappa_n: Option<f64>,
    pub kappa_e: Option<f64>,
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub schema_version: u32,
    pub measure: MeasureKind,
    pub agg: AggKind,
    pub estimator: EstimatorKind,
    pub alpha: Option<f64>,
    pub overlap: OverlapRule,
    pub sinkhorn_reg: f64,
    pub sinkhorn_iters: usize,
    pub sinkhorn_threshold: f64,
    pub threads: usize,
    pub build: String,
}

impl ReportMeta {
    pub fn new(config: &CurvatureConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            measure: config.measure,
            agg: config.agg,
            estimator: config.estimator,
            alpha: config.alpha,
            overlap: config.overlap,
            sinkhorn_reg: config.sinkhorn.reg,
            sinkhorn_iters: config.sinkhorn.max_iters,
            sinkhorn_threshold: config.sinkhorn.threshold,
            threads: config.threads.unwrap_or_else(par::current_threads),
            build: par::build_flags(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub meta: ReportMeta,
    pub edges: Vec<EdgeRecord>,
    pub nodes: Vec<NodeRecord>,
}

impl CurvatureReport {
    pub fn edge_curvatures(&self) -> Vec<Option<f64>> {
        self.edges.iter().map(|e| e.curvature).collect()
    }
}

/// Curvature report for `h` under `config`.
pub fn compute_curvature(h: &Hypergraph, config: CurvatureConfig) -> Result<CurvatureReport, CurvatureError> {
    Ok(CurvatureEngine::new(h, config)?.report())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-9;

    fn engine(h: &Hypergraph, measure: MeasureKind, estimator: EstimatorKind) -> CurvatureEngine<'_> {
        CurvatureEngine::new(h, CurvatureConfig { measure, estimator, ..CurvatureConfig::default() }).unwrap()
    }

    fn triangle_hyperedge() -> Hypergraph {
        Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn single_hyperedge_all_measures() {
        let h = triangle_hyperedge();
        for measure in [MeasureKind::En, MeasureKind::Ee, MeasureKind::We] {
            for estimator in [EstimatorKind::Exact, EstimatorKind::Bound] {
                let eng = engine(&h, measure, estimator);
                assert!((eng.edge_agg(h.edge(0)).unwrap() - 0.5).abs() < EPS);
                assert!((eng.edge_curvature(h.edge(0)).unwrap() - 0.5).abs() < EPS);
                assert!((eng.node_curvature_edges(0).unwrap() - 0.5).abs() < EPS);
            }
        }
    }

    #[test]
    fn agg_examples() {
        let w = |i: usize, j: usize| Ok((i + j) as f64);
        assert_eq!(agg_average(&[0, 1, 2], w).unwrap(), (1.0 + 2.0 + 3.0) / 3.0);
        assert_eq!(agg_max(&[0, 1, 2], w).unwrap(), 3.0);
        assert_eq!(agg_average(&[4, 5], w).unwrap(), 9.0);
        assert_eq!(agg_max(&[4, 5], w).unwrap(), 9.0);
        assert_eq!(agg_average(&[0, 1, 2], |_, _| Ok(0.0)).unwrap(), 0.0);
        assert_eq!(agg_average(&[3], w), Err(CurvatureError::Singleton));
        assert_eq!(agg_max(&[3], w), Err(CurvatureError::Singleton));
    }

    #[test]
    fn non_adjacent_pair_is_rejected() {
        let h = Hypergraph::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        let eng = engine(&h, MeasureKind::Graph, EstimatorKind::Bound);
        assert_eq!(eng.edge_curvature(&[0, 2]), Err(CurvatureError::NotAdjacent(0, 2)));
    }

    #[test]
    fn node_curvatures() {
        let k3 = Hypergraph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let eng = engine(&k3, MeasureKind::Graph, EstimatorKind::Exact);
        for v in 0..3 {
            assert!((eng.node_curvature_neighborhood(v).unwrap() - 0.5).abs() < EPS);
        }
        let k2 = Hypergraph::from_pairs(2, &[(0, 1)]).unwrap();
        let eng = engine(&k2, MeasureKind::Graph, EstimatorKind::Exact);
        assert!(eng.node_curvature_neighborhood(0).unwrap().abs() < EPS);
    }

    #[test]
    fn node_edge_curvature_averages_incident_edges() {
        // Vertex 1 lies in {0,1} and {1,2,3}; multiedge {0,1} repeated.
        let h = Hypergraph::new(4, vec![vec![0, 1], vec![1, 2, 3], vec![0, 1]]).unwrap();
        let eng = engine(&h, MeasureKind::En, EstimatorKind::Exact);
        let k0 = eng.edge_curvature(h.edge(0)).unwrap();
        let k1 = eng.edge_curvature(h.edge(1)).unwrap();
        let expected = (2.0 * k0 + k1) / 3.0;
        assert!((eng.node_curvature_edges(1).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn singletons_and_isolated_vertices_are_reported() {
        let h = Hypergraph::new(4, vec![vec![0, 1], vec![0], vec![2]]).unwrap();
        let report = compute_curvature(&h, CurvatureConfig::default()).unwrap();
        assert_eq!(report.edges.len(), 3);
        assert!(report.edges[0].curvature.is_some());
        assert_eq!(report.edges[1].skip_reason.as_deref(), Some("singleton hyperedge"));
        assert!(report.nodes[2].skip_reason.as_deref().unwrap().contains("isolated vertex"));
        assert!(report.nodes[3].kappa_n.is_none() && report.nodes[3].kappa_e.is_none());

        // Singleton excluded from vertex 0's denominator by default.
        assert_eq!(report.nodes[0].kappa_e, report.edges[0].curvature);
        let cfg = CurvatureConfig { singletons_in_node_degree: true, ..CurvatureConfig::default() };
        let report = compute_curvature(&h, cfg).unwrap();
        assert_eq!(report.nodes[0].kappa_e, report.edges[0].curvature.map(|k| k / 2.0));
    }

    #[test]
    fn report_matches_direct_evaluation() {
        let h = Hypergraph::new(6, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![1, 4]]).unwrap();
        for agg in [AggKind::A, AggKind::M] {
            let cfg = CurvatureConfig { agg, estimator: EstimatorKind::Exact, ..CurvatureConfig::default() };
            let eng = CurvatureEngine::new(&h, cfg).unwrap();
            let report = eng.report();
            for (e, rec) in report.edges.iter().enumerate() {
                let direct = eng.edge_curvature(h.edge(e)).unwrap();
                assert!((rec.curvature.unwrap() - direct).abs() < 1e-12);
                assert!((rec.curvature.unwrap() - (1.0 - rec.agg.unwrap())).abs() < 1e-15);
            }
            for (v, rec) in report.nodes.iter().enumerate() {
                assert!((rec.kappa_n.unwrap() - eng.node_curvature_neighborhood(v).unwrap()).abs() < 1e-12);
                assert!((rec.kappa_e.unwrap() - eng.node_curvature_edges(v).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laziness_is_applied() {
        let k2 = Hypergraph::from_pairs(2, &[(0, 1)]).unwrap();
        let cfg = CurvatureConfig {
            measure: MeasureKind::Graph,
            alpha: Some(0.5),
            estimator: EstimatorKind::Exact,
            ..CurvatureConfig::default()
        };
        let eng = CurvatureEngine::new(&k2, cfg).unwrap();
        assert!(eng.pair_w1(0, 1).unwrap().abs() < 1e-12);
        assert!((eng.measure(0).unwrap().base_mass() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("a".parse::<AggKind>().unwrap(), AggKind::A);
        assert_eq!("m".parse::<AggKind>().unwrap(), AggKind::M);
        assert!("b".parse::<AggKind>().is_err());
        for k in [EstimatorKind::Bound, EstimatorKind::Exact, EstimatorKind::Sinkhorn] {
            assert_eq!(k.as_str().parse::<EstimatorKind>().unwrap(), k);
        }
    }
}
