//! Reference Wasserstein-1 solvers.
//!
//! * [`exact_w1`]: minimum-cost flow by successive shortest paths. Costs are
//!   integer metric distances, so path lengths and potentials are exact
//!   integers; only the flows are floating point.
//! * [`sinkhorn_w1`]: entropic-regularized transport by matrix scaling, the
//!   usual numerical baseline.
//! * [`dual_witness_lower_bound`]: certified lower bound from any
//!   1-Lipschitz potential (Kantorovich duality).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{LocalMeasure, MASS_TOLERANCE};
use crate::metric::{IntegerMetricSpace, MetricError};

/// Flows at or below this are treated as zero.
const FLOW_EPS: f64 = 1e-14;

pub const DEFAULT_SUPPORT_CAP: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("{side} masses sum to {total}, not 1")]
    NotNormalized { side: &'static str, total: f64 },
    #[error("{side} mass {mass} at index {index} is not a positive finite number")]
    BadMass { side: &'static str, index: usize, mass: f64 },
    #[error("cost matrix is {rows}x{cols}, expected {m}x{n}")]
    Shape { rows: usize, cols: usize, m: usize, n: usize },
    #[error("infinite transport cost: {0}")]
    InfiniteCost(#[from] MetricError),
    #[error("{side} support has {len} points, above the exact-solver cap of {cap}; use the Sinkhorn estimator")]
    CapExceeded { side: &'static str, len: usize, cap: usize },
    #[error("regularization must be positive, got {0}")]
    BadRegularization(f64),
    #[error("Sinkhorn kernel row {row} underflowed to zero; increase the regularization")]
    KernelUnderflow { row: usize },
    #[error("potential is not 1-Lipschitz between {u} and {v}: |f(u) - f(v)| = {gap} > d = {dist}")]
    LipschitzViolation { u: String, v: String, gap: f64, dist: u32 },
    #[error("residual graph has a negative cycle; flow is not optimal")]
    NotOptimal,
}

/// Two discrete measures and the integer ground costs between their
/// support points.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportProblem<P> {
    sources: Vec<(P, f64)>,
    sinks: Vec<(P, f64)>,
    cost: Vec<u32>,
}

impl<P: Clone + fmt::Debug> TransportProblem<P> {
    /// `cost[i][j]` is the distance from source `i` to sink `j`.
    pub fn new(sources: Vec<(P, f64)>, sinks: Vec<(P, f64)>, cost: Vec<Vec<u32>>) -> Result<Self, TransportError> {
        check_masses("source", &sources)?;
        check_masses("sink", &sinks)?;
        let (m, n) = (sources.len(), sinks.len());
        if cost.len() != m || cost.iter().any(|row| row.len() != n) {
            return Err(TransportError::Shape { rows: cost.len(), cols: cost.first().map_or(0, Vec::len), m, n });
        }
        Ok(Self { sources, sinks, cost: cost.into_iter().flatten().collect() })
    }

    /// Transport from `mu` to `nu` with costs from `space`, one distance row
    /// per source point.
    pub fn from_measures<S>(space: &S, mu: &LocalMeasure<P>, nu: &LocalMeasure<P>) -> Result<Self, TransportError>
    where
        S: IntegerMetricSpace<Point = P>,
        P: Ord,
    {
        let sources = mu.support().to_vec();
        let sinks = nu.support().to_vec();
        let targets: Vec<P> = sinks.iter().map(|(p, _)| p.clone()).collect();
        let mut cost = Vec::with_capacity(sources.len() * sinks.len());
        for (p, _) in &sources {
            cost.extend(space.distance_row(p, &targets)?);
        }
        Ok(Self { sources, sinks, cost })
    }

    pub fn sources(&self) -> &[(P, f64)] {
        &self.sources
    }

    pub fn sinks(&self) -> &[(P, f64)] {
        &self.sinks
    }

    pub fn cost(&self, i: usize, j: usize) -> u32 {
        self.cost[i * self.sinks.len() + j]
    }

    pub fn max_cost(&self) -> u32 {
        self.cost.iter().copied().max().unwrap_or(0)
    }

    /// Same problem with the roles of sources and sinks exchanged.
    pub fn reversed(&self) -> Self {
        let (m, n) = (self.sources.len(), self.sinks.len());
        let mut cost = vec![0; m * n];
        for i in 0..m {
            for j in 0..n {
                cost[j * m + i] = self.cost(i, j);
            }
        }
        Self { sources: self.sinks.clone(), sinks: self.sources.clone(), cost }
    }
}

fn check_masses<P>(side: &'static str, masses: &[(P, f64)]) -> Result<(), TransportError> {
    for (index, (_, mass)) in masses.iter().enumerate() {
        if !(mass.is_finite() && *mass > 0.0) {
            return Err(TransportError::BadMass { side, index, mass: *mass });
        }
    }
    let total: f64 = masses.iter().map(|(_, m)| m).sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(TransportError::NotNormalized { side, total });
    }
    Ok(())
}

/// Sparse coupling: `(source index, sink index, mass)` entries with
/// positive mass, plus its total cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub flows: Vec<(usize, usize, f64)>,
    pub objective: f64,
}

impl TransportPlan {
    pub fn row_sums(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for &(i, _, f) in &self.flows {
            out[i] += f;
        }
        out
    }

    pub fn col_sums(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(_, j, f) in &self.flows {
            out[j] += f;
        }
        out
    }
}

/// Optimal dual variables: `source[i] − sink[j] ≤ cost(i, j)` with equality
/// wherever the optimal plan moves mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials {
    pub source: Vec<f64>,
    pub sink: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    rev: usize,
    cap: f64,
    cost: i64,
}

struct FlowNetwork {
    arcs: Vec<Vec<Arc>>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        Self { arcs: vec![Vec::new(); n] }
    }

    fn link(&mut self, u: usize, v: usize, cap: f64, cost: i64) {
        let ru = self.arcs[v].len();
        let rv = self.arcs[u].len();
        self.arcs[u].push(Arc { to: v, rev: ru, cap, cost });
        self.arcs[v].push(Arc { to: u, rev: rv, cap: 0.0, cost: -cost });
    }

    /// Successive shortest paths with Johnson potentials; pushes as much
    /// flow as possible from `s` to `t`.
    fn min_cost_flow(&mut self, s: usize, t: usize) {
        let n = self.arcs.len();
        let mut potential = vec![0i64; n];
        let mut dist = vec![i64::MAX; n];
        let mut prev: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); n];
        loop {
            dist.fill(i64::MAX);
            dist[s] = 0;
            let mut heap = BinaryHeap::from([Reverse((0i64, s))]);
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for (k, arc) in self.arcs[u].iter().enumerate() {
                    if arc.cap <= FLOW_EPS {
                        continue;
                    }
                    let nd = d + arc.cost + potential[u] - potential[arc.to];
                    if nd < dist[arc.to] {
                        dist[arc.to] = nd;
                        prev[arc.to] = (u, k);
                        heap.push(Reverse((nd, arc.to)));
                    }
                }
            }
            if dist[t] == i64::MAX {
                return;
            }
            for v in 0..n {
                if dist[v] != i64::MAX {
                    potential[v] += dist[v];
                }
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                let (u, k) = prev[v];
                push = push.min(self.arcs[u][k].cap);
                v = u;
            }
            let mut v = t;
            while v != s {
                let (u, k) = prev[v];
                let rev = self.arcs[u][k].rev;
                self.arcs[u][k].cap -= push;
                self.arcs[v][rev].cap += push;
                v = u;
            }
        }
    }
}

/// Exact W1 with the default support cap.
pub fn exact_w1<P: Clone + fmt::Debug>(p: &TransportProblem<P>) -> Result<TransportPlan, TransportError> {
    exact_w1_capped(p, DEFAULT_SUPPORT_CAP)
}

pub fn exact_w1_capped<P: Clone + fmt::Debug>(
    p: &TransportProblem<P>,
    cap: usize,
) -> Result<TransportPlan, TransportError> {
    for (side, len) in [("source", p.sources.len()), ("sink", p.sinks.len())] {
        if len > cap {
            return Err(TransportError::CapExceeded { side, len, cap });
        }
    }
    let (m, n) = (p.sources.len(), p.sinks.len());
    let (s, t) = (m + n, m + n + 1);
    let mut net = FlowNetwork::new(m + n + 2);
    for (i, (_, a)) in p.sources.iter().enumerate() {
        net.link(s, i, *a, 0);
    }
    for (j, (_, b)) in p.sinks.iter().enumerate() {
        net.link(m + j, t, *b, 0);
    }
    for i in 0..m {
        for j in 0..n {
            net.link(i, m + j, f64::INFINITY, p.cost(i, j) as i64);
        }
    }
    net.min_cost_flow(s, t);

    let mut flows = Vec::new();
    let mut objective = 0.0;
    for i in 0..m {
        for arc in &net.arcs[i] {
            if arc.to >= m && arc.to < m + n {
                // Flow sits on the reverse arc.
                let f = net.arcs[arc.to][arc.rev].cap;
                if f > FLOW_EPS {
                    let j = arc.to - m;
                    flows.push((i, j, f));
                    objective += f * p.cost(i, j) as f64;
                }
            }
        }
    }
    Ok(TransportPlan { flows, objective })
}

/// Exact W1 together with optimal dual potentials.
pub fn exact_w1_with_duals<P: Clone + fmt::Debug>(
    p: &TransportProblem<P>,
) -> Result<(TransportPlan, Potentials), TransportError> {
    let plan = exact_w1(p)?;
    let duals = plan_duals(p, &plan)?;
    Ok((plan, duals))
}

/// Shortest distances from a virtual root in the residual graph of an
/// optimal plan give potentials satisfying complementary slackness.
fn plan_duals<P: Clone + fmt::Debug>(
    p: &TransportProblem<P>,
    plan: &TransportPlan,
) -> Result<Potentials, TransportError> {
    let (m, n) = (p.sources.len(), p.sinks.len());
    let mut backward: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for &(i, j, _) in &plan.flows {
        backward[j].push((i, -(p.cost(i, j) as i64)));
    }
    let mut dist = vec![0i64; m + n];
    let mut queued = vec![true; m + n];
    let mut relaxations = vec![0usize; m + n];
    let mut queue: VecDeque<usize> = (0..m + n).collect();
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        let mut relax = |v: usize, nd: i64, dist: &mut Vec<i64>, queue: &mut VecDeque<usize>| -> bool {
            if nd < dist[v] {
                dist[v] = nd;
                relaxations[v] += 1;
                if relaxations[v] > m + n {
                    return false;
                }
                if !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
            true
        };
        if u < m {
            for j in 0..n {
                let nd = dist[u] + p.cost(u, j) as i64;
                if !relax(m + j, nd, &mut dist, &mut queue) {
                    return Err(TransportError::NotOptimal);
                }
            }
        } else {
            for &(i, c) in &backward[u - m] {
                let nd = dist[u] + c;
                if !relax(i, nd, &mut dist, &mut queue) {
                    return Err(TransportError::NotOptimal);
                }
            }
        }
    }
    Ok(Potentials {
        source: dist[..m].iter().map(|&d| -d as f64).collect(),
        sink: dist[m..].iter().map(|&d| -d as f64).collect(),
    })
}

/// The 1-Lipschitz extension `f(q) = min_j d(q, t_j) + ψ_j` of the sink
/// potentials, evaluated on every source and sink point.
pub fn kantorovich_potential<S>(
    space: &S,
    p: &TransportProblem<S::Point>,
    duals: &Potentials,
) -> Result<Vec<(S::Point, f64)>, TransportError>
where
    S: IntegerMetricSpace,
{
    let sinks: Vec<S::Point> = p.sinks.iter().map(|(q, _)| q.clone()).collect();
    let mut points: Vec<S::Point> = p.sources.iter().chain(&p.sinks).map(|(q, _)| q.clone()).collect();
    points.sort();
    points.dedup();
    points
        .into_iter()
        .map(|q| {
            let row = space.distance_row(&q, &sinks)?;
            let f = row.iter().zip(&duals.sink).map(|(&d, &psi)| d as f64 + psi).fold(f64::INFINITY, f64::min);
            Ok((q, f))
        })
        .collect()
}

/// `Σ f dμ − Σ f dν` for a potential `f` that is checked to be 1-Lipschitz
/// on every pair of support points; a lower bound on W1.
pub fn dual_witness_lower_bound<S, F>(space: &S, p: &TransportProblem<S::Point>, f: F) -> Result<f64, TransportError>
where
    S: IntegerMetricSpace,
    F: Fn(&S::Point) -> f64,
{
    let mut points: Vec<S::Point> = p.sources.iter().chain(&p.sinks).map(|(q, _)| q.clone()).collect();
    points.sort();
    points.dedup();
    let values: Vec<f64> = points.iter().map(&f).collect();
    for (a, u) in points.iter().enumerate() {
        let row = space.distance_row(u, &points[a + 1..])?;
        for (k, &d) in row.iter().enumerate() {
            let gap = (values[a] - values[a + 1 + k]).abs();
            if gap > d as f64 + 1e-12 {
                return Err(TransportError::LipschitzViolation {
                    u: format!("{u:?}"),
                    v: format!("{:?}", points[a + 1 + k]),
                    gap,
                    dist: d,
                });
            }
        }
    }
    let source: f64 = p.sources.iter().map(|(q, m)| f(q) * m).sum();
    let sink: f64 = p.sinks.iter().map(|(q, m)| f(q) * m).sum();
    Ok(source - sink)
}

/// Sinkhorn baseline configuration. The regularization is relative to the
/// largest ground cost of each problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkhornConfig {
    pub reg: f64,
    pub max_iters: usize,
    pub threshold: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self { reg: 0.1, max_iters: 500, threshold: 1e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOutcome {
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Transport cost of the entropic plan; see [`sinkhorn_run`].
pub fn sinkhorn_w1<P: Clone + fmt::Debug>(
    p: &TransportProblem<P>,
    config: &SinkhornConfig,
) -> Result<f64, TransportError> {
    sinkhorn_run(p, config).map(|o| o.cost)
}

/// Alternating scaling `u ← a / K v`, `v ← b / Kᵀ u` on the Gibbs kernel
/// `K = exp(−C / (reg · max C))`. Stops after `max_iters` or once the
/// largest relative change of `u` drops below `threshold`; hitting the cap
/// is not an error.
pub fn sinkhorn_run<P: Clone + fmt::Debug>(
    p: &TransportProblem<P>,
    config: &SinkhornConfig,
) -> Result<SinkhornOutcome, TransportError> {
    if !(config.reg.is_finite() && config.reg > 0.0) {
        return Err(TransportError::BadRegularization(config.reg));
    }
    let (m, n) = (p.sources.len(), p.sinks.len());
    let max_cost = p.max_cost();
    if max_cost == 0 {
        return Ok(SinkhornOutcome { cost: 0.0, iterations: 0, converged: true });
    }
    let eps = config.reg * max_cost as f64;
    let kernel: Vec<f64> = p.cost.iter().map(|&c| (-(c as f64) / eps).exp()).collect();
    let a: Vec<f64> = p.sources.iter().map(|s| s.1).collect();
    let b: Vec<f64> = p.sinks.iter().map(|s| s.1).collect();
    let mut u = vec![1.0; m];
    let mut v = vec![1.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        iterations += 1;
        let mut change = 0.0f64;
        for i in 0..m {
            let kv: f64 = kernel[i * n..(i + 1) * n].iter().zip(&v).map(|(k, v)| k * v).sum();
            if kv.is_nan() || kv <= 0.0 {
                return Err(TransportError::KernelUnderflow { row: i });
            }
            let next = a[i] / kv;
            change = change.max((next - u[i]).abs() / next.abs().max(f64::MIN_POSITIVE));
            u[i] = next;
        }
        for (j, vj) in v.iter_mut().enumerate() {
            let ku: f64 = (0..m).map(|i| kernel[i * n + j] * u[i]).sum();
            if ku.is_nan() || ku <= 0.0 {
                return Err(TransportError::KernelUnderflow { row: j });
            }
            *vj = b[j] / ku;
        }
        if change < config.threshold {
            converged = true;
            break;
        }
    }
    let mut cost = 0.0;
    for i in 0..m {
        for j in 0..n {
            cost += u[i] * kernel[i * n + j] * v[j] * p.cost(i, j) as f64;
        }
    }
    Ok(SinkhornOutcome { cost, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{build_adjacency, Hypergraph};
    use crate::measure::graph_measure;
    use crate::metric::graph_space;

    fn dirac_pair(d: u32) -> TransportProblem<usize> {
        TransportProblem::new(vec![(0, 1.0)], vec![(1, 1.0)], vec![vec![d]]).unwrap()
    }

    fn k3_problem() -> TransportProblem<usize> {
        let h = Hypergraph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let adj = build_adjacency(&h);
        let mu = graph_measure(&adj, None, 0).unwrap();
        let nu = graph_measure(&adj, None, 1).unwrap();
        TransportProblem::from_measures(&graph_space(&adj), &mu, &nu).unwrap()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(exact_w1(&dirac_pair(1)).unwrap().objective, 1.0);

        let same =
            TransportProblem::new(vec![(0, 0.25), (1, 0.75)], vec![(0, 0.25), (1, 0.75)], vec![vec![0, 1], vec![1, 0]])
                .unwrap();
        let plan = exact_w1(&same).unwrap();
        assert_eq!(plan.objective, 0.0);
        assert_eq!(plan.flows, vec![(0, 0, 0.25), (1, 1, 0.75)]);

        let k3 = k3_problem();
        assert_eq!(k3.sources(), &[(1, 0.5), (2, 0.5)]);
        assert_eq!(k3.sinks(), &[(0, 0.5), (2, 0.5)]);
        let plan = exact_w1(&k3).unwrap();
        assert!((plan.objective - 0.5).abs() < 1e-12);
        let rows = plan.row_sums(2);
        let cols = plan.col_sums(2);
        assert!((rows[0] - 0.5).abs() < 1e-12 && (cols[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_reroutes_through_reverse_arcs() {
        // Both sources are closest to sink 0; the optimum sends source 0 to
        // sink 1 instead: 0.5 * 2 + 0.5 * 1.
        let p = TransportProblem::new(vec![(0, 0.5), (1, 0.5)], vec![(2, 0.5), (3, 0.5)], vec![vec![1, 2], vec![1, 3]])
            .unwrap();
        assert!((exact_w1(&p).unwrap().objective - 1.5).abs() < 1e-12);
        assert!((exact_w1(&p.reversed()).unwrap().objective - 1.5).abs() < 1e-12);
    }

    #[test]
    fn exact_cap() {
        let p = k3_problem();
        assert!(matches!(exact_w1_capped(&p, 1), Err(TransportError::CapExceeded { len: 2, cap: 1, .. })));
    }

    #[test]
    fn problem_validation() {
        assert!(matches!(
            TransportProblem::new(vec![(0, 0.5)], vec![(1, 1.0)], vec![vec![1]]),
            Err(TransportError::NotNormalized { side: "source", .. })
        ));
        assert!(matches!(
            TransportProblem::new(vec![(0, 1.0)], vec![(1, 1.0)], vec![vec![1, 2]]),
            Err(TransportError::Shape { .. })
        ));
        let h = Hypergraph::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        let adj = build_adjacency(&h);
        let mu = graph_measure(&adj, None, 0).unwrap();
        let nu = graph_measure(&adj, None, 2).unwrap();
        assert!(matches!(
            TransportProblem::from_measures(&graph_space(&adj), &mu, &nu),
            Err(TransportError::InfiniteCost(MetricError::Unreachable))
        ));
    }

    #[test]
    fn duals_certify_optimum() {
        let h = Hypergraph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let adj = build_adjacency(&h);
        let space = graph_space(&adj);
        let p = k3_problem();
        let (plan, duals) = exact_w1_with_duals(&p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(duals.source[i] - duals.sink[j] <= p.cost(i, j) as f64 + 1e-12);
            }
        }
        let f = kantorovich_potential(&space, &p, &duals).unwrap();
        let lookup = |q: &usize| f.iter().find(|(r, _)| r == q).unwrap().1;
        let witness = dual_witness_lower_bound(&space, &p, lookup).unwrap();
        assert!((witness - plan.objective).abs() < 1e-12);
    }

    #[test]
    fn witness_examples() {
        let h = Hypergraph::from_pairs(2, &[(0, 1)]).unwrap();
        let adj = build_adjacency(&h);
        let space = graph_space(&adj);
        let p = dirac_pair(1);
        assert_eq!(dual_witness_lower_bound(&space, &p, |_| 0.0).unwrap(), 0.0);
        let to_b = |q: &usize| space.distance(q, &1).unwrap() as f64;
        assert_eq!(dual_witness_lower_bound(&space, &p, to_b).unwrap(), 1.0);
        let steep = |q: &usize| 3.0 * *q as f64;
        assert!(matches!(
            dual_witness_lower_bound(&space, &p, steep),
            Err(TransportError::LipschitzViolation { dist: 1, .. })
        ));
    }

    #[test]
    fn sinkhorn_examples() {
        let cfg = SinkhornConfig::default();
        let same =
            TransportProblem::new(vec![(0, 0.5), (1, 0.5)], vec![(0, 0.5), (1, 0.5)], vec![vec![0, 1], vec![1, 0]])
                .unwrap();
        assert!(sinkhorn_w1(&same, &cfg).unwrap().abs() < 0.05);
        assert!((sinkhorn_w1(&dirac_pair(1), &cfg).unwrap() - 1.0).abs() < 0.05);
        assert!((sinkhorn_w1(&k3_problem(), &cfg).unwrap() - 0.5).abs() < 0.1);
    }

    #[test]
    fn sinkhorn_errors() {
        let bad = SinkhornConfig { reg: 0.0, ..SinkhornConfig::default() };
        assert_eq!(sinkhorn_w1(&k3_problem(), &bad), Err(TransportError::BadRegularization(0.0)));
        let tiny = SinkhornConfig { reg: 1e-4, ..SinkhornConfig::default() };
        let far = TransportProblem::new(vec![(0, 1.0)], vec![(1, 1.0)], vec![vec![3]]).unwrap();
        // Single entry equals the max cost, so exp(-1/1e-4) underflows.
        assert!(matches!(sinkhorn_w1(&far, &tiny), Err(TransportError::KernelUnderflow { .. })));
    }
}
