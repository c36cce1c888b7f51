use hyperorc::bound::{w1_simple_bound, w1_upper_bound, w1_upper_bound_with, OverlapRule};
use hyperorc::curvature::{compute_curvature, AggKind, CurvatureConfig, EstimatorKind};
use hyperorc::generators::random_hypergraph;
use hyperorc::measure::{LocalMeasure, MeasureKind};
use hyperorc::metric::{hamming_space, l1_lattice_space, BitString, IntegerMetricSpace};
use hyperorc::transport::{exact_w1, SinkhornConfig, TransportProblem};
use proptest::prelude::*;

/// Random local measure at `base`: positive weights on `base` (optionally)
/// and on a random subset of its unit neighbors.
fn local_measure<S: IntegerMetricSpace>(
    space: &S,
    base: S::Point,
    weights: &[f64],
    with_base: bool,
) -> LocalMeasure<S::Point> {
    let mut points = space.unit_neighbors(&base).unwrap();
    if with_base {
        points.push(base.clone());
    }
    let chosen: Vec<(S::Point, f64)> =
        points.into_iter().zip(weights.iter().cycle()).filter(|(_, &w)| w > 0.3).map(|(p, &w)| (p, w)).collect();
    if chosen.is_empty() {
        return LocalMeasure::dirac(base);
    }
    let total: f64 = chosen.iter().map(|c| c.1).sum();
    let mut support: Vec<_> = chosen.into_iter().map(|(p, w)| (p, w / total)).collect();
    let rest: f64 = support[1..].iter().map(|c| c.1).sum();
    support[0].1 = 1.0 - rest;
    LocalMeasure::new_in(space, base, support).unwrap()
}

fn assert_sound<S: IntegerMetricSpace>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    mx: &LocalMeasure<S::Point>,
    my: &LocalMeasure<S::Point>,
) -> Result<(), TestCaseError> {
    let p = TransportProblem::from_measures(space, mx, my).unwrap();
    let exact = exact_w1(&p).unwrap().objective;
    let b = w1_upper_bound(x, y, mx, my, space).unwrap();
    prop_assert!(b.w1_upper >= exact - 1e-9, "bound {} < exact {}", b.w1_upper, exact);
    prop_assert!(w1_simple_bound(x, y, mx, my) >= exact - 1e-9);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bound_is_sound_on_the_square_lattice(
        wx in proptest::collection::vec(0.0f64..1.0, 5),
        wy in proptest::collection::vec(0.0f64..1.0, 5),
        lazy_x: bool,
        lazy_y: bool,
        axis in 0usize..2,
    ) {
        let space = l1_lattice_space(2, &[(-3, 3), (-3, 3)]).unwrap();
        let x = vec![0, 0];
        let mut y = x.clone();
        y[axis] = 1;
        let mx = local_measure(&space, x.clone(), &wx, lazy_x);
        let my = local_measure(&space, y.clone(), &wy, lazy_y);
        assert_sound(&space, &x, &y, &mx, &my)?;
    }

    #[test]
    fn bound_is_sound_on_the_hypercube(
        wx in proptest::collection::vec(0.0f64..1.0, 7),
        wy in proptest::collection::vec(0.0f64..1.0, 7),
        bits in 0u64..64,
        flip in 0usize..6,
        lazy: bool,
    ) {
        let space = hamming_space(6).unwrap();
        let x = BitString::new(6, bits);
        let y = x.flip(flip);
        let mx = local_measure(&space, x, &wx, lazy);
        let my = local_measure(&space, y, &wy, lazy);
        assert_sound(&space, &x, &y, &mx, &my)?;
    }

    /// On a line, W1 is the L1 distance between cumulative distributions.
    #[test]
    fn exact_matches_the_cdf_formula_on_a_line(
        a in proptest::collection::vec(0.0f64..1.0, 9),
        b in proptest::collection::vec(0.0f64..1.0, 9),
    ) {
        prop_assume!(a.iter().sum::<f64>() > 0.1 && b.iter().sum::<f64>() > 0.1);
        let space = l1_lattice_space(1, &[(0, 8)]).unwrap();
        let normalize = |w: &[f64]| {
            let t: f64 = w.iter().sum();
            let mut v: Vec<(Vec<i64>, f64)> =
                w.iter().enumerate().filter(|(_, &m)| m > 0.0).map(|(i, &m)| (vec![i as i64], m / t)).collect();
            let rest: f64 = v[1..].iter().map(|c| c.1).sum();
            v[0].1 = 1.0 - rest;
            v
        };
        let (sa, sb) = (normalize(&a), normalize(&b));
        let cdf = |s: &[(Vec<i64>, f64)], k: i64| s.iter().filter(|c| c.0[0] <= k).map(|c| c.1).sum::<f64>();
        let oracle: f64 = (0..8).map(|k| (cdf(&sa, k) - cdf(&sb, k)).abs()).sum();
        let mu = LocalMeasure::new(sa[0].0.clone(), sa.clone()).unwrap();
        let nu = LocalMeasure::new(sb[0].0.clone(), sb.clone()).unwrap();
        let p = TransportProblem::from_measures(&space, &mu, &nu).unwrap();
        let exact = exact_w1(&p).unwrap().objective;
        prop_assert!((exact - oracle).abs() < 1e-12, "exact {exact}, cdf {oracle}");
        let reversed = exact_w1(&p.reversed()).unwrap().objective;
        prop_assert!((exact - reversed).abs() < 1e-12);
    }
}

/// Summing overlaps over every point also counts mass sitting on `x` and
/// `y` and mass charged by one side only, which can push the value below W1.
#[test]
fn all_points_overlap_can_undercut_exact() {
    let space = l1_lattice_space(2, &[(-3, 3), (-3, 3)]).unwrap();
    let (x, y) = (vec![0, 0], vec![1, 0]);
    let mx = LocalMeasure::new_in(&space, x.clone(), vec![(vec![-1, 0], 1.0)]).unwrap();
    let my = LocalMeasure::new_in(&space, y.clone(), vec![(vec![2, 0], 1.0)]).unwrap();
    let p = TransportProblem::from_measures(&space, &mx, &my).unwrap();
    let exact = exact_w1(&p).unwrap().objective;
    let sound = w1_upper_bound(&x, &y, &mx, &my, &space).unwrap().w1_upper;
    let literal = w1_upper_bound_with(&x, &y, &mx, &my, &space, OverlapRule::AllPoints).unwrap().w1_upper;
    assert_eq!(exact, 3.0);
    assert_eq!(sound, 3.0);
    assert!(literal < exact, "all-points value {literal}");
}

#[test]
fn tight_sinkhorn_converges_to_exact() {
    let config = SinkhornConfig { reg: 0.01, max_iters: 20_000, threshold: 1e-9 };
    for seed in 0..20 {
        let h = random_hypergraph(10, 8, 2, 4, seed);
        let r =
            compute_curvature(&h, CurvatureConfig { estimator: EstimatorKind::Exact, ..CurvatureConfig::default() })
                .unwrap();
        let s = compute_curvature(
            &h,
            CurvatureConfig { estimator: EstimatorKind::Sinkhorn, sinkhorn: config, ..CurvatureConfig::default() },
        )
        .unwrap();
        for (a, b) in r.edges.iter().zip(&s.edges) {
            if let (Some(x), Some(y)) = (a.curvature, b.curvature) {
                assert!((x - y).abs() < 0.02, "seed {seed}: exact {x}, sinkhorn {y}");
            }
        }
    }
}

#[test]
fn sinkhorn_gap_shrinks_with_regularization() {
    let h = random_hypergraph(12, 10, 2, 5, 3);
    let engine_exact =
        compute_curvature(&h, CurvatureConfig { estimator: EstimatorKind::Exact, ..CurvatureConfig::default() })
            .unwrap();
    let gap = |reg: f64| {
        let config = SinkhornConfig { reg, max_iters: 50_000, threshold: 1e-10 };
        let s = compute_curvature(
            &h,
            CurvatureConfig { estimator: EstimatorKind::Sinkhorn, sinkhorn: config, ..CurvatureConfig::default() },
        )
        .unwrap();
        engine_exact
            .edges
            .iter()
            .zip(&s.edges)
            .filter_map(|(a, b)| Some((a.curvature? - b.curvature?).abs()))
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (gap(0.1), gap(0.01));
    assert!(fine < coarse, "gap at 0.01 = {fine}, at 0.1 = {coarse}");
}

#[test]
fn bound_agrees_between_api_and_engine() {
    let h = random_hypergraph(15, 12, 2, 5, 21);
    for measure in [MeasureKind::En, MeasureKind::Ee, MeasureKind::We] {
        let engine =
            hyperorc::curvature::CurvatureEngine::new(&h, CurvatureConfig { measure, ..CurvatureConfig::default() })
                .unwrap();
        let space = engine.space();
        for (u, v) in engine.adjacency().adjacent_pairs() {
            let direct =
                w1_upper_bound(&u, &v, engine.measure(u).unwrap(), engine.measure(v).unwrap(), &space).unwrap();
            assert_eq!(engine.pair_w1(u, v).unwrap(), direct.w1_upper);
            let swapped =
                w1_upper_bound(&v, &u, engine.measure(v).unwrap(), engine.measure(u).unwrap(), &space).unwrap();
            assert!((direct.w1_upper - swapped.w1_upper).abs() < 1e-12);
        }
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let h = random_hypergraph(40, 60, 2, 6, 8);
    for estimator in [EstimatorKind::Bound, EstimatorKind::Exact] {
        for agg in [AggKind::A, AggKind::M] {
            let run = |threads| {
                let config = CurvatureConfig { estimator, agg, threads, ..CurvatureConfig::default() };
                let r = compute_curvature(&h, config).unwrap();
                let edges: Vec<_> = r.edges.iter().map(|e| (e.edge_id, e.curvature, e.skip_reason.clone())).collect();
                let nodes: Vec<_> = r.nodes.iter().map(|n| (n.node_id, n.kappa_n, n.kappa_e)).collect();
                (edges, nodes)
            };
            assert_eq!(run(Some(1)), run(Some(4)));
            assert_eq!(run(Some(1)), run(None));
        }
    }
}
