//! Closed-form upper bound on W1 between the local measures of two adjacent
//! points, and the matching lower bound on Ollivier-Ricci curvature.
//!
//! Given adjacent `x`, `y` with measures `μ_x`, `μ_y`:
//!
//! 1. `α = min(μ_x(x), μ_y(y))` is treated as shared laziness and removed,
//!    giving `ν_x`, `ν_y`.
//! 2. One merge pass over the two sorted supports collects the cross masses
//!    `ν_x(y)`, `ν_y(x)` and, over common support points `z ∉ {x, y}`, the
//!    overlap sums `Σ ν_x(z) ∧ ν_y(z)` and `Σ ν_x(z) ∨ ν_y(z)`.
//! 3. With `A = 1 − ν_x(y) − ν_y(x) − Σ∨` and `B = 1 − ν_x(y) − ν_y(x) − Σ∧`,
//!
//!    ```text
//!    W1(μ_x, μ_y) ≤ α + (1 − α) · (1 + A₊ + B₊ − Σ∧)
//!    ```
//!
//! The pass is linear in `|supp μ_x| + |supp μ_y|` and never touches the rest
//! of the space.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{delazify, LocalMeasure, MeasureError, MASS_TOLERANCE};
use crate::metric::IntegerMetricSpace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("points {x} and {y} are not adjacent")]
    NotAdjacent { x: String, y: String },
    #[error("measure is attached to {found}, expected {expected}")]
    WrongBase { expected: String, found: String },
    #[error("laziness {0} is outside (0, 1)")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Which points enter the overlap sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapRule {
    /// Points charged by both measures, other than `x` and `y`.
    #[default]
    CommonSupport,
    /// Every point of either support, `x` and `y` included, as in a literal
    /// loop over all vertices. Not guaranteed to give an upper bound; kept
    /// for comparison runs.
    AllPoints,
}

/// Every intermediate quantity of one bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    /// Laziness removed from both measures.
    pub alpha: f64,
    /// `ν_x(y)`.
    pub mu_x_of_y: f64,
    /// `ν_y(x)`.
    pub mu_y_of_x: f64,
    pub overlap_min: f64,
    pub overlap_max: f64,
    pub term_a: f64,
    pub term_b: f64,
    pub w1_upper: f64,
    pub kappa_lower: f64,
}

impl BoundBreakdown {
    /// The three regimes of the transport argument behind the bound.
    pub fn case(&self) -> BoundCase {
        if self.term_a >= 0.0 {
            BoundCase::BothNonNegative
        } else if self.term_b >= 0.0 {
            BoundCase::OnlyBNonNegative
        } else {
            BoundCase::BothNegative
        }
    }

    /// The bound for `ν_x`, `ν_y` before laziness is added back.
    pub fn inner_bound(&self) -> f64 {
        1.0 + self.term_a.max(0.0) + self.term_b.max(0.0) - self.overlap_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundCase {
    /// `0 ≤ A ≤ B`
    BothNonNegative,
    /// `A < 0 ≤ B`
    OnlyBNonNegative,
    /// `A ≤ B < 0`
    BothNegative,
}

/// Upper bound on `W1(μ_x, μ_y)` for adjacent `x`, `y`.
pub fn w1_upper_bound<S: IntegerMetricSpace>(
    x: &S::Point,
    y: &S::Point,
    mu_x: &LocalMeasure<S::Point>,
    mu_y: &LocalMeasure<S::Point>,
    space: &S,
) -> Result<BoundBreakdown, BoundError> {
    w1_upper_bound_with(x, y, mu_x, mu_y, space, OverlapRule::CommonSupport)
}

pub fn w1_upper_bound_with<S: IntegerMetricSpace>(
    x: &S::Point,
    y: &S::Point,
    mu_x: &LocalMeasure<S::Point>,
    mu_y: &LocalMeasure<S::Point>,
    space: &S,
    rule: OverlapRule,
) -> Result<BoundBreakdown, BoundError> {
    if !space.is_adjacent(x, y) {
        return Err(BoundError::NotAdjacent { x: format!("{x:?}"), y: format!("{y:?}") });
    }
    for (mu, p) in [(mu_x, x), (mu_y, y)] {
        if mu.base() != p {
            return Err(BoundError::WrongBase { expected: format!("{p:?}"), found: format!("{:?}", mu.base()) });
        }
    }
    Ok(bound_from_measures(x, y, mu_x, mu_y, rule))
}

/// The bound itself, without adjacency or base checks.
pub(crate) fn bound_from_measures<P: Ord + Clone + fmt::Debug>(
    x: &P,
    y: &P,
    mu_x: &LocalMeasure<P>,
    mu_y: &LocalMeasure<P>,
    rule: OverlapRule,
) -> BoundBreakdown {
    let alpha = mu_x.base_mass().min(mu_y.base_mass());
    if alpha >= 1.0 - MASS_TOLERANCE {
        // Both measures are Dirac masses at adjacent points.
        let empty = PassSums { mu_x_of_y: 0.0, mu_y_of_x: 0.0, overlap_min: 0.0, overlap_max: 0.0 };
        finish(1.0, empty)
    } else if alpha > 0.0 {
        let nu_x = delazify(mu_x, alpha).expect("α is at most the base mass");
        let nu_y = delazify(mu_y, alpha).expect("α is at most the base mass");
        finish(alpha, merge_pass(x, y, nu_x.support(), nu_y.support(), rule))
    } else {
        finish(0.0, merge_pass(x, y, mu_x.support(), mu_y.support(), rule))
    }
}

struct PassSums {
    mu_x_of_y: f64,
    mu_y_of_x: f64,
    overlap_min: f64,
    overlap_max: f64,
}

fn merge_pass<P: Ord>(x: &P, y: &P, a: &[(P, f64)], b: &[(P, f64)], rule: OverlapRule) -> PassSums {
    let mut s = PassSums { mu_x_of_y: 0.0, mu_y_of_x: 0.0, overlap_min: 0.0, overlap_max: 0.0 };
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (p, ma, mb) = match (a.get(i), b.get(j)) {
            (Some((pa, ma)), Some((pb, mb))) => match pa.cmp(pb) {
                Ordering::Less => {
                    i += 1;
                    (pa, *ma, 0.0)
                }
                Ordering::Greater => {
                    j += 1;
                    (pb, 0.0, *mb)
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (pa, *ma, *mb)
                }
            },
            (Some((pa, ma)), None) => {
                i += 1;
                (pa, *ma, 0.0)
            }
            (None, Some((pb, mb))) => {
                j += 1;
                (pb, 0.0, *mb)
            }
            (None, None) => unreachable!(),
        };
        if p == y {
            s.mu_x_of_y = ma;
        }
        if p == x {
            s.mu_y_of_x = mb;
        }
        let counted = match rule {
            OverlapRule::CommonSupport => ma > 0.0 && mb > 0.0 && p != x && p != y,
            OverlapRule::AllPoints => true,
        };
        if counted {
            s.overlap_min += ma.min(mb);
            s.overlap_max += ma.max(mb);
        }
    }
    s
}

fn finish(alpha: f64, s: PassSums) -> BoundBreakdown {
    let cross = s.mu_x_of_y + s.mu_y_of_x;
    let term_a = 1.0 - cross - s.overlap_max;
    let term_b = 1.0 - cross - s.overlap_min;
    let inner = 1.0 + term_a.max(0.0) + term_b.max(0.0) - s.overlap_min;
    let w1_upper = alpha + (1.0 - alpha) * inner;
    BoundBreakdown {
        alpha,
        mu_x_of_y: s.mu_x_of_y,
        mu_y_of_x: s.mu_y_of_x,
        overlap_min: s.overlap_min,
        overlap_max: s.overlap_max,
        term_a,
        term_b,
        w1_upper,
        kappa_lower: 1.0 - w1_upper,
    }
}

/// Lower bound on `κ(x, y) = 1 − W1(μ_x, μ_y)` for adjacent `x`, `y`.
pub fn kappa_lower_bound<S: IntegerMetricSpace>(
    x: &S::Point,
    y: &S::Point,
    mu_x: &LocalMeasure<S::Point>,
    mu_y: &LocalMeasure<S::Point>,
    space: &S,
) -> Result<f64, BoundError> {
    w1_upper_bound(x, y, mu_x, mu_y, space).map(|b| b.kappa_lower)
}

/// Weaker bound using only the cross masses: `1 + 2(1 − μ_x(y) − μ_y(x))₊`.
/// Applied to the raw measures with no laziness handling.
pub fn w1_simple_bound<P: Ord + Clone + fmt::Debug>(
    x: &P,
    y: &P,
    mu_x: &LocalMeasure<P>,
    mu_y: &LocalMeasure<P>,
) -> f64 {
    1.0 + 2.0 * (1.0 - mu_x.mass(y) - mu_y.mass(x)).max(0.0)
}

/// W1 bound for α-lazy measures given a bound `w1` for the non-lazy ones.
pub fn lazy_w1_bound(w1: f64, alpha: f64) -> Result<f64, BoundError> {
    check_alpha(alpha)?;
    Ok((1.0 - alpha) * w1 + alpha)
}

/// Curvature lower bound for α-lazy measures: `(1 − α) κ`.
pub fn lazy_kappa_bound(kappa: f64, alpha: f64) -> Result<f64, BoundError> {
    check_alpha(alpha)?;
    Ok((1.0 - alpha) * kappa)
}

fn check_alpha(alpha: f64) -> Result<(), BoundError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(BoundError::InvalidAlpha(alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{build_adjacency, AdjacencyIndex, Hypergraph};
    use crate::measure::{graph_measure, lazify};
    use crate::metric::graph_space;

    const EPS: f64 = 1e-12;

    fn graph(n: usize, pairs: &[(usize, usize)]) -> AdjacencyIndex {
        build_adjacency(&Hypergraph::from_pairs(n, pairs).unwrap())
    }

    fn bound_on(adj: &AdjacencyIndex, x: usize, y: usize) -> BoundBreakdown {
        let mx = graph_measure(adj, None, x).unwrap();
        let my = graph_measure(adj, None, y).unwrap();
        w1_upper_bound(&x, &y, &mx, &my, &graph_space(adj)).unwrap()
    }

    #[test]
    fn triangle_edge() {
        let adj = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let b = bound_on(&adj, 0, 1);
        assert_eq!(b.alpha, 0.0);
        assert!((b.mu_x_of_y - 0.5).abs() < EPS && (b.mu_y_of_x - 0.5).abs() < EPS);
        assert!((b.overlap_min - 0.5).abs() < EPS && (b.overlap_max - 0.5).abs() < EPS);
        assert!((b.term_a + 0.5).abs() < EPS && (b.term_b + 0.5).abs() < EPS);
        assert!((b.w1_upper - 0.5).abs() < EPS);
        assert!((b.kappa_lower - 0.5).abs() < EPS);
    }

    #[test]
    fn path_edge() {
        let adj = graph(3, &[(0, 1), (1, 2)]);
        let b = bound_on(&adj, 0, 1);
        assert_eq!((b.mu_x_of_y, b.mu_y_of_x), (1.0, 0.5));
        assert_eq!((b.overlap_min, b.overlap_max), (0.0, 0.0));
        assert!((b.term_a + 0.5).abs() < EPS && (b.term_b + 0.5).abs() < EPS);
        assert!((b.w1_upper - 1.0).abs() < EPS);
        assert!(b.kappa_lower.abs() < EPS);
    }

    #[test]
    fn single_edge() {
        let adj = graph(2, &[(0, 1)]);
        let b = bound_on(&adj, 0, 1);
        assert_eq!((b.term_a, b.term_b), (-1.0, -1.0));
        assert_eq!(b.w1_upper, 1.0);
        assert_eq!(b.kappa_lower, 0.0);
    }

    #[test]
    fn lazy_single_edge() {
        let adj = graph(2, &[(0, 1)]);
        let mx = lazify(&graph_measure(&adj, None, 0).unwrap(), 0.5).unwrap();
        let my = lazify(&graph_measure(&adj, None, 1).unwrap(), 0.5).unwrap();
        let b = w1_upper_bound(&0, &1, &mx, &my, &graph_space(&adj)).unwrap();
        assert!((b.alpha - 0.5).abs() < EPS);
        assert!((b.inner_bound() - 1.0).abs() < EPS);
        assert!((b.w1_upper - 1.0).abs() < EPS);
    }

    #[test]
    fn unequal_laziness_keeps_residual_mass() {
        let adj = graph(2, &[(0, 1)]);
        let space = graph_space(&adj);
        let mx = LocalMeasure::new(0usize, vec![(0, 0.2), (1, 0.8)]).unwrap();
        let my = LocalMeasure::new(1usize, vec![(0, 0.4), (1, 0.6)]).unwrap();
        let b = w1_upper_bound(&0, &1, &mx, &my, &space).unwrap();
        assert!((b.alpha - 0.2).abs() < EPS);
        assert!((b.mu_x_of_y - 1.0).abs() < EPS);
        assert!((b.mu_y_of_x - 0.5).abs() < EPS);
        // Exact W1 moves 0.2 units across the edge.
        assert!(b.w1_upper >= 0.2 - 1e-9);
    }

    #[test]
    fn rejects_non_adjacent_and_wrong_base() {
        let adj = graph(3, &[(0, 1), (1, 2)]);
        let space = graph_space(&adj);
        let m0 = graph_measure(&adj, None, 0).unwrap();
        let m1 = graph_measure(&adj, None, 1).unwrap();
        let m2 = graph_measure(&adj, None, 2).unwrap();
        assert!(matches!(w1_upper_bound(&0, &2, &m0, &m2, &space), Err(BoundError::NotAdjacent { .. })));
        assert!(matches!(w1_upper_bound(&0, &1, &m1, &m0, &space), Err(BoundError::WrongBase { .. })));
        assert!(kappa_lower_bound(&0, &2, &m0, &m2, &space).is_err());
    }

    #[test]
    fn case_fixtures() {
        // Both terms non-negative: long path, all mass on own neighbors.
        let adj = graph(6, &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)]);
        let b = bound_on(&adj, 0, 1);
        assert_eq!(b.case(), BoundCase::BothNonNegative);
        let closed = 3.0 - 2.0 * b.mu_x_of_y - 2.0 * b.mu_y_of_x - b.overlap_max - 2.0 * b.overlap_min;
        assert!((b.w1_upper - closed).abs() < EPS);

        // A < 0 ≤ B: one common neighbor with unequal masses.
        let adj = graph(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4)]);
        let b = bound_on(&adj, 0, 1);
        assert_eq!(b.case(), BoundCase::OnlyBNonNegative);
        let closed = 2.0 - b.mu_x_of_y - b.mu_y_of_x - 2.0 * b.overlap_min;
        assert!((b.w1_upper - closed).abs() < EPS);

        // Both negative: triangle.
        let adj = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let b = bound_on(&adj, 0, 1);
        assert_eq!(b.case(), BoundCase::BothNegative);
        assert!((b.w1_upper - (1.0 - b.overlap_min)).abs() < EPS);
    }

    #[test]
    fn all_points_rule_counts_everything() {
        let adj = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let space = graph_space(&adj);
        let mx = graph_measure(&adj, None, 0).unwrap();
        let my = graph_measure(&adj, None, 1).unwrap();
        let b = w1_upper_bound_with(&0, &1, &mx, &my, &space, OverlapRule::AllPoints).unwrap();
        // Points 0, 1, 2 with masses (0, .5), (.5, 0), (.5, .5).
        assert!((b.overlap_min - 0.5).abs() < EPS);
        assert!((b.overlap_max - 1.5).abs() < EPS);
    }

    #[test]
    fn simple_bound_examples() {
        let k2 = graph(2, &[(0, 1)]);
        let m = |adj: &AdjacencyIndex, v| graph_measure(adj, None, v).unwrap();
        assert_eq!(w1_simple_bound(&0, &1, &m(&k2, 0), &m(&k2, 1)), 1.0);
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(w1_simple_bound(&0, &1, &m(&k3, 0), &m(&k3, 1)), 1.0);
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(w1_simple_bound(&0, &1, &m(&p3, 0), &m(&p3, 1)), 1.0);
    }

    #[test]
    fn laziness_formulas() {
        assert_eq!(lazy_w1_bound(1.0, 0.5).unwrap(), 1.0);
        assert_eq!(lazy_w1_bound(0.5, 0.5).unwrap(), 0.75);
        assert!((lazy_w1_bound(2.0, 1e-12).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(lazy_kappa_bound(0.5, 0.5).unwrap(), 0.25);
        assert_eq!(lazy_kappa_bound(0.0, 0.3).unwrap(), 0.0);
        assert_eq!(lazy_kappa_bound(-1.0, 0.5).unwrap(), -0.5);
        assert_eq!(lazy_w1_bound(1.0, 1.0), Err(BoundError::InvalidAlpha(1.0)));
        assert_eq!(lazy_kappa_bound(1.0, 0.0), Err(BoundError::InvalidAlpha(0.0)));
    }
}
