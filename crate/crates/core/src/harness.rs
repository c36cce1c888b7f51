//! Timing and agreement experiments comparing the closed-form bound with
//! transport-based estimators on the same workload.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::curvature::{
    compute_curvature, AggKind, CurvatureConfig, CurvatureEngine, CurvatureError, EstimatorKind, SCHEMA_VERSION,
};
use crate::hypergraph::{EdgeId, Hypergraph, VertexId};
use crate::measure::MeasureKind;
use crate::par;
use crate::transport::SinkhornConfig;

/// Slack allowed when checking that a bound curvature does not exceed the
/// exact one.
pub const SOUNDNESS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub measure: MeasureKind,
    pub agg: AggKind,
    pub sinkhorn: SinkhornConfig,
    /// Worker count for the pair loop; `Some(1)` gives the quietest numbers.
    pub threads: Option<usize>,
    /// Evaluate every pair once with both estimators before timing.
    pub warmup: bool,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            measure: MeasureKind::We,
            agg: AggKind::A,
            sinkhorn: SinkhornConfig::default(),
            threads: Some(1),
            warmup: true,
        }
    }
}

/// Wall-time totals and per-pair means for one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorTiming {
    pub estimator: EstimatorKind,
    pub total_ns: u64,
    pub per_pair_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub schema_version: u32,
    pub dataset: String,
    pub measure: MeasureKind,
    pub agg: AggKind,
    /// Adjacent pairs in the dataset.
    pub pairs_total: usize,
    /// Pairs that entered both totals.
    pub pairs_timed: usize,
    /// Pairs where either estimator failed; excluded from both totals.
    pub pairs_failed: usize,
    pub bound: EstimatorTiming,
    pub sinkhorn: EstimatorTiming,
    /// `sinkhorn.total_ns / bound.total_ns`, absent when nothing was timed.
    pub speedup: Option<f64>,
    pub sinkhorn_reg: f64,
    pub sinkhorn_iters: usize,
    pub sinkhorn_threshold: f64,
    pub threads: usize,
    pub build: String,
}

struct PairTiming {
    ns: u64,
    ok: bool,
}

fn time_pairs(
    engine: &CurvatureEngine<'_>,
    pairs: &[(VertexId, VertexId)],
    estimator: EstimatorKind,
) -> Vec<PairTiming> {
    par::map(pairs, |&(u, v)| {
        let start = Instant::now();
        let result = engine.pair_w1_with(u, v, estimator);
        let ns = start.elapsed().as_nanos() as u64;
        PairTiming { ns, ok: result.is_ok() }
    })
}

/// Times the W1 phase of the bound and of Sinkhorn over every adjacent pair
/// of `h`. Measures are built before the clock starts; a pair on which
/// either estimator fails is left out of both totals.
pub fn run_timing(dataset: &str, h: &Hypergraph, config: &TimingConfig) -> Result<BenchResult, CurvatureError> {
    let curvature_config = CurvatureConfig {
        measure: config.measure,
        agg: config.agg,
        estimator: EstimatorKind::Bound,
        sinkhorn: config.sinkhorn,
        threads: config.threads,
        ..CurvatureConfig::default()
    };
    let engine = CurvatureEngine::new(h, curvature_config)?;
    let pairs = engine.adjacency().adjacent_pairs();

    let (bound, sinkhorn, threads) = par::with_threads(config.threads, || {
        if config.warmup {
            time_pairs(&engine, &pairs, EstimatorKind::Bound);
            time_pairs(&engine, &pairs, EstimatorKind::Sinkhorn);
        }
        let sinkhorn = time_pairs(&engine, &pairs, EstimatorKind::Sinkhorn);
        let bound = time_pairs(&engine, &pairs, EstimatorKind::Bound);
        (bound, sinkhorn, par::current_threads())
    });

    let mut bound_total = 0u64;
    let mut sinkhorn_total = 0u64;
    let mut timed = 0usize;
    for (b, s) in bound.iter().zip(&sinkhorn) {
        if b.ok && s.ok {
            bound_total += b.ns;
            sinkhorn_total += s.ns;
            timed += 1;
        }
    }
    let per_pair = |total: u64| if timed == 0 { 0.0 } else { total as f64 / timed as f64 };
    Ok(BenchResult {
        schema_version: SCHEMA_VERSION,
        dataset: dataset.to_string(),
        measure: config.measure,
        agg: config.agg,
        pairs_total: pairs.len(),
        pairs_timed: timed,
        pairs_failed: pairs.len() - timed,
        bound: EstimatorTiming {
            estimator: EstimatorKind::Bound,
            total_ns: bound_total,
            per_pair_ns: per_pair(bound_total),
        },
        sinkhorn: EstimatorTiming {
            estimator: EstimatorKind::Sinkhorn,
            total_ns: sinkhorn_total,
            per_pair_ns: per_pair(sinkhorn_total),
        },
        speedup: (bound_total > 0).then(|| sinkhorn_total as f64 / bound_total as f64),
        sinkhorn_reg: config.sinkhorn.reg,
        sinkhorn_iters: config.sinkhorn.max_iters,
        sinkhorn_threshold: config.sinkhorn.threshold,
        threads,
        build: par::build_flags(),
    })
}

/// Graph in which adjacent vertices 0 and 1 each have `k` private
/// neighbors and `k` common ones, so both equal-nodes measures have support
/// `2k + 1`. Every other vertex has degree at most two, keeping the
/// instance linear in `k`.
pub fn scaling_instance(k: usize) -> Hypergraph {
    let mut pairs = vec![(0, 1)];
    for i in 0..k {
        pairs.push((0, 2 + i));
        pairs.push((1, 2 + k + i));
        pairs.push((0, 2 + 2 * k + i));
        pairs.push((1, 2 + 2 * k + i));
    }
    Hypergraph::from_pairs(2 + 3 * k, &pairs).expect("scaling instance is well formed")
}

/// Block sizes `k` for [`run_support_scaling`]. They start where the
/// per-call constant overhead is already small next to the linear pass.
pub const SCALING_SIZES: [usize; 7] = [256, 512, 1024, 2048, 4096, 8192, 16384];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    /// Combined support size of the two measures.
    pub support: usize,
    pub per_pair_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub schema_version: u32,
    pub measure: MeasureKind,
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln(time)` against `ln(support)`.
    pub log_log_slope: f64,
}

/// Per-pair bound cost on [`scaling_instance`] for each `k`. Each point is
/// the fastest of `batches` batches, each batch running at least
/// `min_batch_ns` of repeated evaluations.
pub fn run_support_scaling(
    sizes: &[usize],
    measure: MeasureKind,
    batches: usize,
    min_batch_ns: u64,
) -> Result<ScalingResult, CurvatureError> {
    let mut points = Vec::with_capacity(sizes.len());
    for &k in sizes {
        let h = scaling_instance(k);
        let config = CurvatureConfig { measure, threads: Some(1), ..CurvatureConfig::default() };
        let engine = CurvatureEngine::new(&h, config)?;
        let support = engine.measure(0)?.len() + engine.measure(1)?.len();
        std::hint::black_box(engine.pair_w1_with(0, 1, EstimatorKind::Bound)?);

        let mut reps = 1u64;
        loop {
            let start = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(engine.pair_w1_with(0, 1, EstimatorKind::Bound)?);
            }
            if start.elapsed().as_nanos() as u64 >= min_batch_ns {
                break;
            }
            reps *= 2;
        }
        let mut best = f64::INFINITY;
        for _ in 0..batches.max(1) {
            let start = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(engine.pair_w1_with(0, 1, EstimatorKind::Bound)?);
            }
            best = best.min(start.elapsed().as_nanos() as f64 / reps as f64);
        }
        points.push(ScalingPoint { support, per_pair_ns: best });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.support as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.per_pair_ns.ln()).collect();
    let log_log_slope = ols(&xs, &ys).map_or(f64::NAN, |t| t.slope);
    Ok(ScalingResult { schema_version: SCHEMA_VERSION, measure, points, log_log_slope })
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub slope: f64,
    pub intercept: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Least-squares fit; `None` with fewer than two points or constant `x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<Trend> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some(Trend { slope, intercept: my - slope * mx })
}

/// Pearson correlation; `None` when either series is constant. Two
/// identical series give exactly 1.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return None;
    }
    if xs == ys {
        return xs.iter().any(|&x| x != xs[0]).then_some(1.0);
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties receiving the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Equal-width bins over a shared range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Bins `series` on one set of edges spanning all their values.
pub fn shared_histograms(series: &[&[f64]], bins: usize) -> Vec<Histogram> {
    let bins = bins.max(1);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &x in *s {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|b| if b == bins { hi } else { lo + b as f64 * width }).collect();
    series
        .iter()
        .map(|s| {
            let mut counts = vec![0; bins];
            for &x in *s {
                let b = (((x - lo) / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
            Histogram { edges: edges.clone(), counts }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementSample {
    pub edge_id: EdgeId,
    pub bound: f64,
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub count: usize,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub mean_bound: f64,
    pub mean_baseline: f64,
    /// `mean_baseline − mean_bound`.
    pub mean_shift: f64,
    /// Least-squares fit of baseline against bound.
    pub trend: Option<Trend>,
    /// Samples where the bound curvature exceeds the baseline by more than
    /// the soundness slack.
    pub above_baseline: usize,
    pub bound_histogram: Histogram,
    pub baseline_histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementResult {
    pub schema_version: u32,
    pub dataset: String,
    pub measure: MeasureKind,
    pub agg: AggKind,
    pub baseline: EstimatorKind,
    pub samples: Vec<AgreementSample>,
    /// Hyperedges without a curvature under either estimator, with reason.
    pub skipped: Vec<(EdgeId, String)>,
    pub summary: AgreementSummary,
}

pub fn summarize(samples: &[AgreementSample], bins: usize) -> AgreementSummary {
    let xs: Vec<f64> = samples.iter().map(|s| s.bound).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.baseline).collect();
    let hist = shared_histograms(&[&xs, &ys], bins);
    let (mean_bound, mean_baseline) = (mean(&xs), mean(&ys));
    AgreementSummary {
        count: samples.len(),
        pearson: pearson(&xs, &ys),
        spearman: spearman(&xs, &ys),
        mean_bound,
        mean_baseline,
        mean_shift: if samples.is_empty() { 0.0 } else { mean_baseline - mean_bound },
        trend: ols(&xs, &ys),
        above_baseline: samples.iter().filter(|s| s.bound > s.baseline + SOUNDNESS_SLACK).count(),
        bound_histogram: hist[0].clone(),
        baseline_histogram: hist[1].clone(),
    }
}

/// Edge curvatures of `h` under the bound and under `baseline`, paired by
/// hyperedge.
pub fn run_agreement(
    dataset: &str,
    h: &Hypergraph,
    config: &CurvatureConfig,
    baseline: EstimatorKind,
    bins: usize,
) -> Result<AgreementResult, CurvatureError> {
    let bound = compute_curvature(h, CurvatureConfig { estimator: EstimatorKind::Bound, ..config.clone() })?;
    let other = compute_curvature(h, CurvatureConfig { estimator: baseline, ..config.clone() })?;
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for (b, o) in bound.edges.iter().zip(&other.edges) {
        match (b.curvature, o.curvature) {
            (Some(bound), Some(baseline)) => samples.push(AgreementSample { edge_id: b.edge_id, bound, baseline }),
            _ => {
                let reason = b.skip_reason.clone().or_else(|| o.skip_reason.clone()).unwrap_or_default();
                skipped.push((b.edge_id, reason));
            }
        }
    }
    let summary = summarize(&samples, bins);
    Ok(AgreementResult {
        schema_version: SCHEMA_VERSION,
        dataset: dataset.to_string(),
        measure: config.measure,
        agg: config.agg,
        baseline,
        samples,
        skipped,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn correlations() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(pearson(&x, &x), Some(1.0));
        assert_eq!(spearman(&x, &[10.0, 20.0, 30.0, 1000.0]), Some(1.0));
        assert!((pearson(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&x, &[1.0; 4]), None);
    }

    #[test]
    fn least_squares_line() {
        let t = ols(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((t.slope - 2.0).abs() < 1e-15 && (t.intercept - 1.0).abs() < 1e-15);
        assert_eq!(ols(&[1.0, 1.0], &[0.0, 1.0]), None);
    }

    #[test]
    fn histograms_share_edges() {
        let h = shared_histograms(&[&[0.0, 0.5, 1.0], &[0.25, 0.75]], 4);
        assert_eq!(h[0].edges, h[1].edges);
        assert_eq!(h[0].counts, vec![1, 0, 1, 1]);
        assert_eq!(h[1].counts, vec![0, 1, 0, 1]);
        let single = shared_histograms(&[&[0.5]], 3);
        assert_eq!(single[0].counts.iter().sum::<usize>(), 1);
    }

    #[test]
    fn self_comparison_is_perfect() {
        let h =
            crate::generators::generate_hcm(&crate::generators::random_hcm_spec(30, 30, 2, 4, 1)).unwrap().hypergraph;
        let r = run_agreement("self", &h, &CurvatureConfig::default(), EstimatorKind::Bound, 10).unwrap();
        assert_eq!(r.summary.mean_shift, 0.0);
        assert_eq!(r.summary.pearson, Some(1.0));
        assert_eq!(r.summary.above_baseline, 0);
    }

    #[test]
    fn triangle_gives_one_point() {
        let h = Hypergraph::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let k3 = Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap();
        for g in [h, k3] {
            let r = run_agreement("k3", &g, &CurvatureConfig::default(), EstimatorKind::Exact, 5).unwrap();
            for s in &r.samples {
                assert!((s.bound - 0.5).abs() < 1e-12 && (s.baseline - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_workload_has_zero_totals() {
        let h = Hypergraph::new(2, vec![vec![0], vec![1]]).unwrap();
        let r = run_timing("empty", &h, &TimingConfig::default()).unwrap();
        assert_eq!((r.pairs_total, r.bound.total_ns, r.sinkhorn.total_ns), (0, 0, 0));
        assert_eq!(r.speedup, None);
        assert_eq!(r.bound.per_pair_ns, 0.0);
    }

    #[test]
    fn scaling_instance_support() {
        let h = scaling_instance(5);
        let engine = CurvatureEngine::new(&h, CurvatureConfig::default()).unwrap();
        assert_eq!(engine.measure(0).unwrap().len(), 11);
        assert_eq!(engine.measure(1).unwrap().len(), 11);
    }
}
